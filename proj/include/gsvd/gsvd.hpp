#ifndef GSVD_GSVD_HPP
#define GSVD_GSVD_HPP

/**
 * @file gsvd.hpp
 * @brief Umbrella header for the group-sparse SVD library.
 */

#include "errors.hpp"
#include "groups.hpp"
#include "prox.hpp"
#include "penalty.hpp"
#include "solver.hpp"
#include "simulation.hpp"
#include "metrics.hpp"
#include "benchmark.hpp"
#include "io.hpp"

#endif

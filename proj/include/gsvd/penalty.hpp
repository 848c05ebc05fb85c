#ifndef GSVD_PENALTY_HPP
#define GSVD_PENALTY_HPP

#include <cmath>
#include <cstddef>
#include <memory>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "Eigen/Dense"

#include "errors.hpp"
#include "groups.hpp"
#include "prox.hpp"

/**
 * @file penalty.hpp
 * @brief Tagged penalty choices for one side of the rank-one model, and the half-step each one induces.
 */

namespace gsvd {

using GroupsPtr = std::shared_ptr<const GroupStructure>;

namespace penalty {

struct None {};

struct L1 {
    double lambda = 0;
};

struct L0 {
    std::size_t k = 1;
};

struct GL1 {
    double lambda = 0;
    GroupsPtr groups;
};

struct GL0 {
    std::size_t k = 1;
    GroupsPtr groups;
    bool weighted = false;
};

struct OGL1 {
    double lambda = 0;
    GroupsPtr groups;
    AdmmConfig admm;
};

struct OGL0 {
    std::size_t k = 1;
    GroupsPtr groups;
};

}

/**
 * L1 and GL1/OGL1 take a penalty level `lambda`; L0, GL0 and OGL0 take a cardinality `k` (coordinates or groups).
 */
using PenaltySpec = std::variant<penalty::None, penalty::L1, penalty::L0, penalty::GL1, penalty::GL0, penalty::OGL1, penalty::OGL0>;

inline std::string penalty_name(const PenaltySpec& p) {
    static const char* names[] = { "none", "l1", "l0", "gl1", "gl0", "ogl1", "ogl0" };
    return names[p.index()];
}

/**
 * Short human-readable description, e.g. `gl0(k=10)`.
 */
inline std::string describe(const PenaltySpec& p) {
    std::ostringstream out;
    out.precision(6);
    out << penalty_name(p);
    std::visit([&](const auto& q) {
        using T = std::decay_t<decltype(q)>;
        if constexpr (std::is_same_v<T, penalty::L1> || std::is_same_v<T, penalty::GL1> || std::is_same_v<T, penalty::OGL1>) {
            out << "(lambda=" << q.lambda << ")";
        } else if constexpr (std::is_same_v<T, penalty::GL0>) {
            out << "(k=" << q.k << (q.weighted ? ", weighted" : "") << ")";
        } else if constexpr (!std::is_same_v<T, penalty::None>) {
            out << "(k=" << q.k << ")";
        }
    }, p);
    return out.str();
}

/**
 * Checks hyperparameters and that any group structure indexes a vector of length `dim`.
 *
 * @param axis Label used in error messages, e.g. "u".
 */
inline void validate_penalty(const PenaltySpec& p, std::size_t dim, const std::string& axis) {
    auto where = axis + " penalty " + penalty_name(p);
    auto check_groups = [&](const GroupsPtr& g) {
        if (!g) {
            throw InvalidArgument(where + ": no group structure supplied");
        }
        if (g->dimension() != dim) {
            throw InvalidArgument(where + ": groups index " + std::to_string(g->dimension()) +
                                  " variables but the axis has " + std::to_string(dim));
        }
    };
    auto check_lambda = [&](double lambda) {
        if (!(lambda >= 0) || !std::isfinite(lambda)) {
            throw InvalidArgument(where + ": lambda must be finite and non-negative");
        }
    };
    auto check_k = [&](std::size_t k, std::size_t limit, const char* unit) {
        if (k == 0 || k > limit) {
            throw InvalidArgument(where + ": k = " + std::to_string(k) + " must lie in [1, " + std::to_string(limit) + "] " + unit);
        }
    };

    std::visit([&](const auto& q) {
        using T = std::decay_t<decltype(q)>;
        if constexpr (std::is_same_v<T, penalty::L1>) {
            check_lambda(q.lambda);
        } else if constexpr (std::is_same_v<T, penalty::L0>) {
            check_k(q.k, dim, "coordinates");
        } else if constexpr (std::is_same_v<T, penalty::GL1>) {
            check_lambda(q.lambda);
            check_groups(q.groups);
            q.groups->require_partition(where);
        } else if constexpr (std::is_same_v<T, penalty::GL0>) {
            check_groups(q.groups);
            q.groups->require_partition(where);
            check_k(q.k, q.groups->size(), "groups");
        } else if constexpr (std::is_same_v<T, penalty::OGL1>) {
            check_lambda(q.lambda);
            check_groups(q.groups);
            q.admm.validate();
        } else if constexpr (std::is_same_v<T, penalty::OGL0>) {
            check_groups(q.groups);
            check_k(q.k, q.groups->size(), "groups");
        }
    }, p);
}

/**
 * Value of the Lagrangian penalty term at `x`: `lambda * sum |x_i|` for L1, `lambda * sum w_l ||x_l||` for GL1 and OGL1
 * (the latter summed over the given groups, an upper bound on the latent-group norm), and 0 for the cardinality penalties.
 */
inline double penalty_value(const Eigen::VectorXd& x, const PenaltySpec& p) {
    return std::visit([&](const auto& q) -> double {
        using T = std::decay_t<decltype(q)>;
        if constexpr (std::is_same_v<T, penalty::L1>) {
            return q.lambda * x.lpNorm<1>();
        } else if constexpr (std::is_same_v<T, penalty::GL1> || std::is_same_v<T, penalty::OGL1>) {
            double s = 0;
            for (std::size_t l = 0; l < q.groups->size(); ++l) {
                s += q.groups->weight(l) * detail::block_norm(x, q.groups->group(l));
            }
            return q.lambda * s;
        } else {
            return 0.0;
        }
    }, p);
}

/**
 * @brief Unnormalized result of one penalized half-step.
 */
struct HalfStep {
    Eigen::VectorXd x;

    /**
     * Selected groups, ascending; empty for the group-free penalties.
     */
    std::vector<std::size_t> groups;

    /**
     * ADMM diagnostics for OGL1, zero otherwise.
     */
    int admm_iterations = 0;
    bool admm_converged = true;
};

/**
 * Applies the penalty-specific update to `z`.
 * L0 keeps the `k` largest `|z_i|`, which is the group-L0 projection on singleton groups.
 * OGL1 masks `z` to the active groups returned by the ADMM, which starts from `warm` when given.
 */
inline HalfStep apply_penalty(const Eigen::VectorXd& z, const PenaltySpec& p, AdmmState* warm = nullptr) {
    HalfStep out;
    std::visit([&](const auto& q) {
        using T = std::decay_t<decltype(q)>;
        if constexpr (std::is_same_v<T, penalty::None>) {
            out.x = z;
        } else if constexpr (std::is_same_v<T, penalty::L1>) {
            out.x = soft_threshold(z, q.lambda);
        } else if constexpr (std::is_same_v<T, penalty::L0>) {
            std::vector<double> mag(z.size());
            for (Eigen::Index i = 0; i < z.size(); ++i) {
                mag[i] = std::abs(z[i]);
            }
            out.x = Eigen::VectorXd::Zero(z.size());
            for (auto i : top_k_indices(mag, q.k)) {
                out.x[i] = z[i];
            }
        } else if constexpr (std::is_same_v<T, penalty::GL1>) {
            out.x = group_soft_threshold(z, *q.groups, q.lambda);
            for (std::size_t l = 0; l < q.groups->size(); ++l) {
                if (detail::block_norm(out.x, q.groups->group(l)) > 0) {
                    out.groups.push_back(l);
                }
            }
        } else if constexpr (std::is_same_v<T, penalty::GL0>) {
            out.groups = group_l0_select(z, *q.groups, q.k, q.weighted);
            out.x = mask_groups(z, *q.groups, out.groups);
        } else if constexpr (std::is_same_v<T, penalty::OGL1>) {
            AdmmConfig cfg = q.admm;
            cfg.lambda = q.lambda;
            auto res = ogl1_prox_admm(z, *q.groups, cfg, warm);
            out.groups = std::move(res.active);
            out.x = mask_groups(z, *q.groups, out.groups);
            out.admm_iterations = res.iterations;
            out.admm_converged = res.converged;
        } else if constexpr (std::is_same_v<T, penalty::OGL0>) {
            out.groups = ogl0_select(z, *q.groups, q.k);
            out.x = mask_groups(z, *q.groups, out.groups);
        }
    }, p);
    return out;
}

}

#endif

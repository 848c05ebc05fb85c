#ifndef GSVD_PROX_HPP
#define GSVD_PROX_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "Eigen/Dense"

#include "errors.hpp"
#include "groups.hpp"

/**
 * @file prox.hpp
 * @brief Penalty-specific vector updates used inside the alternating solvers.
 *
 * Each operator takes the current "pull" vector `z` (either `X v` or `X^T u`) and returns an unnormalized update.
 * The solver normalizes afterwards, so the Lagrange multiplier attached to the unit-norm constraint never appears here.
 */

namespace gsvd {

namespace detail {

inline double block_norm(const Eigen::VectorXd& z, std::span<const std::size_t> idx) {
    double s = 0;
    for (auto i : idx) {
        s += z[i] * z[i];
    }
    return std::sqrt(s);
}

inline void check_length(const Eigen::VectorXd& z, const GroupStructure& gs, const char* who) {
    if (static_cast<std::size_t>(z.size()) != gs.dimension()) {
        throw InvalidArgument(std::string(who) + ": vector length " + std::to_string(z.size()) +
                              " does not match group dimension " + std::to_string(gs.dimension()));
    }
}

inline void check_finite(const Eigen::VectorXd& z, const char* who) {
    if (!z.allFinite()) {
        throw InvalidArgument(std::string(who) + ": input contains non-finite values");
    }
}

}

/**
 * Indices of the `k` largest entries of `scores`, ties going to the lower index, returned in ascending order.
 */
inline std::vector<std::size_t> top_k_indices(const std::vector<double>& scores, std::size_t k) {
    if (k == 0 || k > scores.size()) {
        throw InvalidArgument("k = " + std::to_string(k) + " must lie in [1, " + std::to_string(scores.size()) + "]");
    }
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::partial_sort(order.begin(), order.begin() + k, order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) {
            return scores[a] > scores[b];
        }
        return a < b;
    });
    order.resize(k);
    std::sort(order.begin(), order.end());
    return order;
}

/**
 * Copy of `z` restricted to the union of the listed groups; zero elsewhere.
 */
inline Eigen::VectorXd mask_groups(const Eigen::VectorXd& z, const GroupStructure& gs, const std::vector<std::size_t>& selected) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(z.size());
    for (auto l : selected) {
        for (auto i : gs.group(l)) {
            out[i] = z[i];
        }
    }
    return out;
}

/**
 * Elementwise shrinkage: `z_i * (1 - lambda / |z_i|)` where `|z_i| > lambda`, zero otherwise.
 */
inline Eigen::VectorXd soft_threshold(const Eigen::VectorXd& z, double lambda) {
    if (!(lambda >= 0)) {
        throw InvalidArgument("soft_threshold: lambda must be non-negative");
    }
    Eigen::VectorXd out(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) {
        double a = std::abs(z[i]);
        out[i] = (a > lambda ? (1 - lambda / a) * z[i] : 0.0);
    }
    return out;
}

/**
 * Blockwise group-lasso shrinkage over a partition.
 * Block `l` becomes `(1 - lambda * w_l / ||z_l||) * z_l` when `||z_l|| > lambda * w_l` and is zeroed otherwise.
 */
inline Eigen::VectorXd group_soft_threshold(const Eigen::VectorXd& z, const GroupStructure& gs, double lambda) {
    detail::check_length(z, gs, "group_soft_threshold");
    gs.require_partition("group_soft_threshold");
    if (!(lambda >= 0)) {
        throw InvalidArgument("group_soft_threshold: lambda must be non-negative");
    }

    Eigen::VectorXd out = Eigen::VectorXd::Zero(z.size());
    for (std::size_t l = 0; l < gs.size(); ++l) {
        auto idx = gs.group(l);
        double nrm = detail::block_norm(z, idx);
        double cut = lambda * gs.weight(l);
        if (nrm > cut) {
            double scale = 1 - cut / nrm;
            for (auto i : idx) {
                out[i] = scale * z[i];
            }
        }
    }
    return out;
}

/**
 * Per-group scores used by the top-k projections: `||z_l||`, or `w_l * ||z_l||` when weighted.
 */
inline std::vector<double> group_scores(const Eigen::VectorXd& z, const GroupStructure& gs, bool weighted = false) {
    std::vector<double> scores(gs.size());
    for (std::size_t l = 0; l < gs.size(); ++l) {
        scores[l] = detail::block_norm(z, gs.group(l));
        if (weighted) {
            scores[l] *= gs.weight(l);
        }
    }
    return scores;
}

/**
 * Groups kept by the group-L0 projection: the `k` highest-scoring groups, lowest index first on ties.
 */
inline std::vector<std::size_t> group_l0_select(const Eigen::VectorXd& z, const GroupStructure& gs, std::size_t k, bool weighted = false) {
    detail::check_length(z, gs, "group_l0_project");
    gs.require_partition("group_l0_project");
    if (k == 0 || k > gs.size()) {
        throw InvalidArgument("group_l0_project: k = " + std::to_string(k) + " must lie in [1, " + std::to_string(gs.size()) + "]");
    }
    return top_k_indices(group_scores(z, gs, weighted), k);
}

/**
 * Exact projection for the non-overlapping group-L0 constraint.
 * Normalizing the output gives the unit vector maximizing `z^T u` among vectors supported on at most `k` groups.
 */
inline Eigen::VectorXd group_l0_project(const Eigen::VectorXd& z, const GroupStructure& gs, std::size_t k, bool weighted = false) {
    return mask_groups(z, gs, group_l0_select(z, gs, k, weighted));
}

inline std::vector<std::size_t> ogl0_select(const Eigen::VectorXd& z, const GroupStructure& gs, std::size_t k) {
    detail::check_length(z, gs, "ogl0_project");
    if (k == 0 || k > gs.size()) {
        throw InvalidArgument("ogl0_project: k = " + std::to_string(k) + " must lie in [1, " + std::to_string(gs.size()) + "]");
    }
    return top_k_indices(group_scores(z, gs, false), k);
}

/**
 * Greedy projection for the overlapping group-L0 constraint: keep `z` on the union of the `k` groups with the largest norms.
 * The support is a union of whole groups, possibly smaller than the sum of their sizes.
 */
inline Eigen::VectorXd ogl0_project(const Eigen::VectorXd& z, const GroupStructure& gs, std::size_t k) {
    return mask_groups(z, gs, ogl0_select(z, gs, k));
}

/**
 * How the ADMM forms its `u` iterate from `b = z + sum(theta) + rho * sum(y)`, with `c_i` the number of groups covering `i`.
 *
 * - `PROX` sets `u_i = b_i / (1 + rho * c_i)`, the exact minimizer of the augmented Lagrangian of
 *   `min 1/2 ||u - z||^2 + lambda * Omega(u)`. Because the penalty is positively homogeneous, the normalized solution of that
 *   problem also minimizes `-u^T z + lambda * Omega(u)` over the unit ball. Coordinates in no group stay zero.
 * - `NORMALIZE` sets `u = b / ||b||`.
 */
enum class AdmmUpdate { PROX, NORMALIZE };

/**
 * @brief Settings for the overlapping group lasso ADMM.
 */
struct AdmmConfig {
    /**
     * Initial augmented Lagrangian parameter.
     * The iteration runs on `z / ||z||` with `lambda / ||z||`, so `rho` is relative to the scale of `z`.
     */
    double rho = 1.0;

    /**
     * Rebalance `rho` every 10 sweeps: double it when the primal residual exceeds 10 times the dual one, halve it in the
     * opposite case.
     */
    bool adaptive_rho = true;

    /**
     * Penalty level, on the same scale as `z`.
     */
    double lambda = 0.0;

    int max_iter = 5000;

    /**
     * Relative tolerance. Stop once the primal residual `||y - A u||` is below `tol * max(||A u||, ||y||)` and the dual
     * residual `rho * ||A^T (y - y_prev)||` is below `tol * ||A^T theta||`, each with an absolute floor of `1e-3 * tol`.
     * `A` copies `u` into the stacked group blocks.
     */
    double tol = 1e-6;

    AdmmUpdate update = AdmmUpdate::PROX;

    void validate() const {
        if (!(rho > 0) || !std::isfinite(rho)) {
            throw InvalidArgument("ADMM rho must be positive");
        }
        if (!(lambda >= 0)) {
            throw InvalidArgument("ADMM lambda must be non-negative");
        }
        if (max_iter < 1) {
            throw InvalidArgument("ADMM max_iter must be at least 1");
        }
        if (!(tol > 0)) {
            throw InvalidArgument("ADMM tol must be positive");
        }
    }
};

/**
 * @brief Output of `ogl1_prox_admm()`.
 */
struct AdmmResult {
    /**
     * Groups whose latent block `y_l` is nonzero, ascending.
     */
    std::vector<std::size_t> active;

    /**
     * Latent copies `y_l` of `u` restricted to each group, in group order.
     */
    std::vector<Eigen::VectorXd> y;

    /**
     * Final `u` iterate: unit norm under `NORMALIZE`, the proximal point of `z / ||z||` under `PROX`.
     */
    Eigen::VectorXd u;

    int iterations = 0;
    double residual = 0;
    bool converged = false;
};

/**
 * @brief Latent blocks, multipliers and penalty parameter carried from one ADMM call to the next.
 *
 * Passing the same state to successive calls on slowly changing inputs (the alternating solver's half-steps)
 * starts each run from the previous solution. A state whose shape does not match the groups is ignored.
 */
struct AdmmState {
    std::vector<Eigen::VectorXd> y, theta;
    double rho = 0;
};

/**
 * ADMM for the overlapping group lasso subproblem `min -u^T z + lambda * Omega(u)` over `||u|| <= 1`.
 *
 * The penalty is split onto per-group latent blocks `y_l = u_{G_l}` with multipliers `theta_l`, both started at zero.
 * Each sweep updates `u` (see `AdmmUpdate`), then every `y_l` by group shrinkage of `rho * u_{G_l} - theta_l`,
 * then `theta_l += rho * (y_l - u_{G_l})`. Group updates are independent and run in group order.
 *
 * On a partition the fixed point reproduces `group_soft_threshold()` up to normalization:
 * the active groups are exactly those with `||z_l|| > lambda * w_l`.
 */
inline AdmmResult ogl1_prox_admm(const Eigen::VectorXd& z, const GroupStructure& gs, const AdmmConfig& cfg, AdmmState* warm = nullptr) {
    detail::check_length(z, gs, "ogl1_prox_admm");
    detail::check_finite(z, "ogl1_prox_admm");
    cfg.validate();

    const std::size_t L = gs.size();
    const Eigen::Index p = z.size();
    AdmmResult res;
    res.y.resize(L);
    std::vector<Eigen::VectorXd> theta(L);
    for (std::size_t l = 0; l < L; ++l) {
        res.y[l] = Eigen::VectorXd::Zero(gs.group_size(l));
        theta[l] = Eigen::VectorXd::Zero(gs.group_size(l));
    }

    const double scale = z.norm();
    if (scale == 0) {
        res.u = Eigen::VectorXd::Zero(p);
        res.converged = true;
        return res;
    }

    const Eigen::VectorXd zs = z / scale;
    const double lam = cfg.lambda / scale;
    const double floor = 1e-3 * cfg.tol;
    const auto& cover = gs.coverage_counts();
    double rho = cfg.rho;

    Eigen::VectorXd u(p), t, y_prev;
    Eigen::VectorXd sum_y = Eigen::VectorXd::Zero(p), sum_theta = Eigen::VectorXd::Zero(p), dy(p);
    if (warm && warm->y.size() == L && warm->theta.size() == L && warm->rho > 0) {
        bool fits = true;
        for (std::size_t l = 0; l < L && fits; ++l) {
            fits = warm->y[l].size() == res.y[l].size() && warm->theta[l].size() == theta[l].size();
        }
        if (fits) {
            res.y = warm->y;
            theta = warm->theta;
            rho = warm->rho;
            for (std::size_t l = 0; l < L; ++l) {
                auto idx = gs.group(l);
                for (std::size_t j = 0; j < idx.size(); ++j) {
                    sum_y[idx[j]] += res.y[l][j];
                    sum_theta[idx[j]] += theta[l][j];
                }
            }
        }
    }
    for (int it = 1; it <= cfg.max_iter; ++it) {
        u = zs + sum_theta + rho * sum_y;
        if (cfg.update == AdmmUpdate::PROX) {
            for (Eigen::Index i = 0; i < p; ++i) {
                u[i] = cover[i] == 0 ? 0.0 : u[i] / (1 + rho * static_cast<double>(cover[i]));
            }
        } else {
            // z has unit norm here, so a vanishing update means every block has been shrunk away.
            double unorm = u.norm();
            if (unorm > 1e-12) {
                u /= unorm;
            } else {
                u.setZero();
            }
        }

        double primal2 = 0, au2 = 0, y2 = 0;
        sum_y.setZero();
        sum_theta.setZero();
        dy.setZero();
        for (std::size_t l = 0; l < L; ++l) {
            auto idx = gs.group(l);
            auto& y = res.y[l];
            auto& th = theta[l];
            t.resize(idx.size());
            for (std::size_t j = 0; j < idx.size(); ++j) {
                t[j] = rho * u[idx[j]] - th[j];
            }

            y_prev = y;
            double tn = t.norm();
            double cut = lam * gs.weight(l);
            if (tn > cut) {
                y = ((1 - cut / tn) / rho) * t;
            } else {
                y.setZero();
            }

            for (std::size_t j = 0; j < idx.size(); ++j) {
                double ui = u[idx[j]];
                double diff = y[j] - ui;
                th[j] += rho * diff;
                primal2 += diff * diff;
                au2 += ui * ui;
                y2 += y[j] * y[j];
                sum_y[idx[j]] += y[j];
                sum_theta[idx[j]] += th[j];
                dy[idx[j]] += y[j] - y_prev[j];
            }
        }

        double primal = std::sqrt(primal2);
        double dual = rho * dy.norm();
        res.iterations = it;
        res.residual = std::max(primal, dual);
        if (primal <= cfg.tol * std::sqrt(std::max(au2, y2)) + floor && dual <= cfg.tol * sum_theta.norm() + floor) {
            res.converged = true;
            break;
        }
        if (cfg.adaptive_rho && it % 10 == 0) {
            if (primal > 10 * dual) {
                rho *= 2;
            } else if (dual > 10 * primal) {
                rho /= 2;
            }
        }
    }

    for (std::size_t l = 0; l < L; ++l) {
        if (res.y[l].norm() > 0) {
            res.active.push_back(l);
        }
    }
    if (warm) {
        warm->y = res.y;
        warm->theta = std::move(theta);
        warm->rho = rho;
    }
    res.u = std::move(u);
    return res;
}

}

#endif

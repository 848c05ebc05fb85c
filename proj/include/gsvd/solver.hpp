#ifndef GSVD_SOLVER_HPP
#define GSVD_SOLVER_HPP

#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "Eigen/Dense"
#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>

#include "errors.hpp"
#include "penalty.hpp"

/**
 * @file solver.hpp
 * @brief Alternating rank-one solvers and the deflation driver.
 */

namespace gsvd {

/**
 * Starting vector strategies for `v`.
 *
 * - `LEADING`: leading right singular vector of `X`, by power iteration on `X^T X`.
 * - `RANDOM`: normalized standard normal draw from a seeded generator.
 * - `UNIFORM`: all entries `1 / sqrt(n)`.
 */
enum class InitStrategy { LEADING, RANDOM, UNIFORM };

struct SolveOptions {
    /**
     * Relative tolerance on successive values of `d`.
     */
    double tol = 1e-6;

    int max_iter = 200;

    InitStrategy init = InitStrategy::LEADING;

    /**
     * Seed for `InitStrategy::RANDOM`.
     */
    std::uint64_t seed = 0;

    /**
     * Explicit starting vector; overrides `init` when set. Normalized before use.
     */
    std::optional<Eigen::VectorXd> v0;
};

/**
 * @brief One `(u, v, d)` triple.
 */
struct Factor {
    Eigen::VectorXd u;
    Eigen::VectorXd v;
    double d = 0;

    /**
     * Groups selected on each side in the final iteration, for the group penalties.
     */
    std::vector<std::size_t> groups_u, groups_v;

    /**
     * Set when the factor was fit on an all-zero matrix; `u`, `v` are then zero and `d = 0`.
     */
    bool degenerate = false;
};

struct SolveReport {
    int iterations = 0;

    /**
     * Value of `d = u^T X v` after every outer iteration.
     */
    std::vector<double> d_trace;

    /**
     * Penalized objective `u^T X v - P_u(u) - P_v(v)` after every outer iteration.
     * Each half-step maximizes it for the L1, GL1 and cardinality penalties, so it never decreases for them;
     * `d` alone can decrease under the Lagrangian penalties.
     */
    std::vector<double> objective_trace;

    bool converged = false;

    double wall_time = 0;

    /**
     * Total inner ADMM sweeps, for the OGL1 penalty.
     */
    long admm_iterations = 0;
    bool admm_all_converged = true;
};

struct RankOneResult {
    Factor factor;
    SolveReport report;
};

namespace detail {

inline constexpr std::size_t gram_limit = 1024;

template<class M>
Eigen::VectorXd leading_right_singular(const M& X, double tol = 1e-9, int max_iter = 1000) {
    const Eigen::Index n = X.cols();

    // Fixed pseudo-random start, so the result never depends on the caller's seed.
    boost::random::mt19937_64 rng(0x5eedULL);
    boost::random::normal_distribution<double> normal;
    Eigen::VectorXd v(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        v[j] = normal(rng);
    }
    v.normalize();

    const bool use_gram = static_cast<std::size_t>(n) <= gram_limit;
    Eigen::MatrixXd G;
    if (use_gram) {
        G = Eigen::MatrixXd(X.transpose() * X);
    }

    Eigen::VectorXd next(n);
    for (int it = 0; it < max_iter; ++it) {
        if (use_gram) {
            next.noalias() = G * v;
        } else {
            Eigen::VectorXd tmp = X * v;
            next.noalias() = X.transpose() * tmp;
        }
        double nrm = next.norm();
        if (nrm == 0) {
            return Eigen::VectorXd::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
        }
        next /= nrm;
        double change = (next - v).norm();
        v.swap(next);
        if (change < tol) {
            break;
        }
    }

    // Sign convention: largest-magnitude entry positive.
    Eigen::Index imax;
    v.cwiseAbs().maxCoeff(&imax);
    if (v[imax] < 0) {
        v = -v;
    }
    return v;
}

}

/**
 * Unit-norm starting vector of length `X.cols()`, deterministic given `strategy` and `seed`.
 */
template<class M>
Eigen::VectorXd init_v(const M& X, InitStrategy strategy, std::uint64_t seed = 0) {
    const Eigen::Index n = X.cols();
    if (n < 1) {
        throw InvalidArgument("init_v: matrix has no columns");
    }
    switch (strategy) {
        case InitStrategy::UNIFORM:
            return Eigen::VectorXd::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
        case InitStrategy::RANDOM: {
            boost::random::mt19937_64 rng(seed);
            boost::random::normal_distribution<double> normal;
            Eigen::VectorXd v(n);
            for (Eigen::Index j = 0; j < n; ++j) {
                v[j] = normal(rng);
            }
            return v / v.norm();
        }
        case InitStrategy::LEADING:
        default:
            return detail::leading_right_singular(X);
    }
}

/**
 * Alternating solver for `max u^T X v` under the penalties `pu` on `u` and `pv` on `v`, with `||u|| = ||v|| = 1`.
 *
 * Each iteration computes `z = X v`, applies the u-penalty and normalizes, then `z = X^T u`, applies the v-penalty and normalizes,
 * and records `d = z^T v`. An OGL0 half-step keeps the previous group set when the greedy choice captures less of `||z||`,
 * so `d` never decreases under the cardinality penalties. Iteration stops when `|d_t - d_{t-1}| < tol * max(1, |d_{t-1}|)` or after `max_iter` iterations.
 *
 * @throws DegenerateSolution if a half-step zeroes the whole vector.
 */
template<class M>
RankOneResult rank_one_solve(const M& X, const PenaltySpec& pu, const PenaltySpec& pv, const SolveOptions& opts = {}) {
    const auto start = std::chrono::steady_clock::now();
    const Eigen::Index p = X.rows(), n = X.cols();
    if (p < 1 || n < 1) {
        throw InvalidArgument("rank_one_solve: matrix must be non-empty");
    }
    if (!X.allFinite()) {
        throw InvalidArgument("rank_one_solve: matrix contains non-finite values");
    }
    validate_penalty(pu, p, "u");
    validate_penalty(pv, n, "v");
    if (!(opts.tol > 0) || opts.max_iter < 1) {
        throw InvalidArgument("rank_one_solve: tol must be positive and max_iter at least 1");
    }

    Eigen::VectorXd v;
    if (opts.v0) {
        if (opts.v0->size() != n) {
            throw InvalidArgument("rank_one_solve: starting vector has length " + std::to_string(opts.v0->size()) +
                                  ", expected " + std::to_string(n));
        }
        double nrm = opts.v0->norm();
        if (!(nrm > 0) || !std::isfinite(nrm)) {
            throw InvalidArgument("rank_one_solve: starting vector must be finite and nonzero");
        }
        v = *opts.v0 / nrm;
    } else {
        v = init_v(X, opts.init, opts.seed);
    }

    auto normalized = [](HalfStep& step, const PenaltySpec& pen, const char* side) {
        double nrm = step.x.norm();
        if (!(nrm > 0)) {
            throw DegenerateSolution(std::string(side) + " half-step produced the zero vector under " + describe(pen) +
                                     "; the penalty is too aggressive");
        }
        step.x /= nrm;
    };

    // The greedy OGL0 selection is not an exact maximizer; fall back to the previous groups when they capture more of z.
    auto guard = [](HalfStep& step, const Eigen::VectorXd& z, const PenaltySpec& pen, const std::vector<std::size_t>& prev) {
        const auto* q = std::get_if<penalty::OGL0>(&pen);
        if (!q || prev.empty() || prev == step.groups) {
            return;
        }
        Eigen::VectorXd kept = mask_groups(z, *q->groups, prev);
        if (kept.norm() > step.x.norm()) {
            step.x = std::move(kept);
            step.groups = prev;
        }
    };

    RankOneResult out;
    auto& rep = out.report;
    Eigen::VectorXd z_u(p), z_v(n);
    HalfStep su, sv;
    AdmmState warm_u, warm_v;
    double d = 0;
    for (int it = 1; it <= opts.max_iter; ++it) {
        z_u.noalias() = X * v;
        auto prev_u = std::move(su.groups);
        su = apply_penalty(z_u, pu, &warm_u);
        guard(su, z_u, pu, prev_u);
        normalized(su, pu, "u");

        z_v.noalias() = X.transpose() * su.x;
        auto prev_v = std::move(sv.groups);
        sv = apply_penalty(z_v, pv, &warm_v);
        guard(sv, z_v, pv, prev_v);
        normalized(sv, pv, "v");
        v = sv.x;

        d = z_v.dot(v);
        rep.admm_iterations += su.admm_iterations + sv.admm_iterations;
        rep.admm_all_converged = rep.admm_all_converged && su.admm_converged && sv.admm_converged;
        rep.iterations = it;
        rep.d_trace.push_back(d);
        rep.objective_trace.push_back(d - penalty_value(su.x, pu) - penalty_value(v, pv));

        if (it > 1) {
            double prev = rep.d_trace[it - 2];
            if (std::abs(d - prev) < opts.tol * std::max(1.0, std::abs(prev))) {
                rep.converged = true;
                break;
            }
        }
    }

    out.factor.u = std::move(su.x);
    out.factor.v = std::move(v);
    out.factor.d = d;
    out.factor.groups_u = std::move(su.groups);
    out.factor.groups_v = std::move(sv.groups);
    if (out.factor.d < 0) {
        out.factor.u = -out.factor.u;
        out.factor.d = -out.factor.d;
    }

    rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

/**
 * @brief Ordered factors from repeated rank-one fits with deflation.
 */
struct Decomposition {
    std::vector<Factor> factors;
    std::vector<SolveReport> reports;

    /**
     * Share of `||X||_F^2` removed by each factor.
     */
    std::vector<double> variance_explained;

    /**
     * `1 - ||X - sum_{j <= i} d_j u_j v_j^T||_F^2 / ||X||_F^2` after each factor.
     */
    std::vector<double> cumulative_variance_explained;

    double residual_norm = 0;
};

/**
 * Fits `r` factors in sequence, subtracting `d u v^T` from the working matrix after each one.
 * A degenerate half-step in factor `i` is rethrown with the factor index in the message.
 */
template<class M>
Decomposition deflate_solve(const M& X, const PenaltySpec& pu, const PenaltySpec& pv, int r, const SolveOptions& opts = {}) {
    if (r < 1) {
        throw InvalidArgument("deflate_solve: rank must be at least 1");
    }
    Eigen::MatrixXd R = X;
    const double total = R.squaredNorm();

    Decomposition dec;
    double prev_ss = total;
    for (int i = 0; i < r; ++i) {
        RankOneResult res;
        if (prev_ss == 0) {
            // Nothing left to explain.
            res.factor.u = Eigen::VectorXd::Zero(R.rows());
            res.factor.v = Eigen::VectorXd::Zero(R.cols());
            res.factor.degenerate = true;
            res.report.converged = true;
            dec.variance_explained.push_back(0.0);
            dec.cumulative_variance_explained.push_back(1.0);
            dec.factors.push_back(std::move(res.factor));
            dec.reports.push_back(std::move(res.report));
            continue;
        }
        try {
            res = rank_one_solve(R, pu, pv, opts);
        } catch (const DegenerateSolution& e) {
            throw DegenerateSolution("factor " + std::to_string(i + 1) + ": " + e.what());
        } catch (const InvalidArgument& e) {
            throw InvalidArgument("factor " + std::to_string(i + 1) + ": " + e.what());
        }

        const auto& f = res.factor;
        R.noalias() -= f.d * f.u * f.v.transpose();
        double ss = R.squaredNorm();
        dec.variance_explained.push_back(total > 0 ? (prev_ss - ss) / total : 0.0);
        dec.cumulative_variance_explained.push_back(total > 0 ? 1 - ss / total : 1.0);
        prev_ss = ss;

        dec.factors.push_back(std::move(res.factor));
        dec.reports.push_back(std::move(res.report));
    }
    dec.residual_norm = std::sqrt(prev_ss);
    return dec;
}

}

#endif

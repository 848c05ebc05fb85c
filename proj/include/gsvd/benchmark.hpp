#ifndef GSVD_BENCHMARK_HPP
#define GSVD_BENCHMARK_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "Eigen/Dense"

#include "errors.hpp"
#include "metrics.hpp"
#include "penalty.hpp"
#include "simulation.hpp"
#include "solver.hpp"

/**
 * @file benchmark.hpp
 * @brief Replicated simulation benchmark over methods and data configurations.
 */

namespace gsvd {

enum class MethodFamily { L1, L0, GL1, GL0, OGL1, OGL0 };

/**
 * @brief A benchmark method: the penalty family applied to `u`, with hyperparameters matched to the planted truth.
 *
 * Cardinality penalties use the planted size directly (`k` = planted coordinates for L0, planted groups for GL0/OGL0).
 * Lasso-type penalties bisect `lambda` until the support of `u` has the planted number of coordinates.
 * `make_method("ogl1")` loosens the inner ADMM to `tol = 1e-4`, `max_iter = 1000`, since every bisection step runs a full solve.
 */
struct BenchMethod {
    std::string name;
    MethodFamily family = MethodFamily::GL0;

    PenaltySpec v_penalty = penalty::None{};

    AdmmConfig admm;
    bool weighted = false;

    int bisection_steps = 60;

    /**
     * Bisection also stops once the bracket is narrower than this fraction of the starting ceiling.
     */
    double lambda_resolution = 1e-6;

    /**
     * Accepted relative deviation of the support size from its target.
     */
    double cardinality_tol = 0.01;
};

inline BenchMethod make_method(const std::string& name) {
    BenchMethod m;
    m.name = name;
    if (name == "l1") {
        m.family = MethodFamily::L1;
    } else if (name == "l0") {
        m.family = MethodFamily::L0;
    } else if (name == "gl1") {
        m.family = MethodFamily::GL1;
    } else if (name == "gl0") {
        m.family = MethodFamily::GL0;
    } else if (name == "ogl1") {
        m.family = MethodFamily::OGL1;
        m.admm.tol = 1e-4;
        m.admm.max_iter = 1000;
    } else if (name == "ogl0") {
        m.family = MethodFamily::OGL0;
    } else {
        throw InvalidArgument("unknown benchmark method '" + name + "' (expected l1, l0, gl1, gl0, ogl1 or ogl0)");
    }
    return m;
}

inline bool is_overlap_method(MethodFamily f) {
    return f == MethodFamily::OGL1 || f == MethodFamily::OGL0;
}

struct Stat {
    double mean = 0, sd = 0;
};

/**
 * Mean and sample standard deviation, accumulated in index order.
 */
inline Stat summarize(const std::vector<double>& x) {
    Stat s;
    if (x.empty()) {
        return s;
    }
    double sum = 0;
    for (double v : x) {
        sum += v;
    }
    s.mean = sum / static_cast<double>(x.size());
    if (x.size() > 1) {
        double ss = 0;
        for (double v : x) {
            ss += (v - s.mean) * (v - s.mean);
        }
        s.sd = std::sqrt(ss / static_cast<double>(x.size() - 1));
    }
    return s;
}

struct BenchRow {
    std::string method;
    SimKind kind = SimKind::GR;
    std::size_t group_size = 0;
    std::size_t p = 0;
    std::size_t n = 0;
    double log_snr = 0;
    std::size_t replicates = 0;

    /**
     * Replicates where the support size could not be matched, or the solve degenerated.
     */
    std::size_t flagged = 0;

    Stat tpr, tnr, fpr, fdr, acc, d, time;
};

/**
 * @brief Outcome of one method on one replicate.
 */
struct ReplicateOutcome {
    Rates rates;
    double d = 0;
    double time = 0;
    std::size_t support = 0;
    double lambda = 0;
    bool flagged = false;
};

struct BenchOptions {
    /**
     * Worker threads for replicates; 0 means hardware concurrency.
     */
    unsigned threads = 0;

    double zero_tol = 1e-10;

    SolveOptions solve;

    /**
     * Called after each finished replicate with (configuration index, replicate index). May be called from worker threads.
     */
    std::function<void(std::size_t, std::size_t)> progress;
};

namespace detail {

inline std::size_t support_size(const Eigen::VectorXd& x, double zero_tol) {
    std::size_t s = 0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        s += std::abs(x[i]) > zero_tol;
    }
    return s;
}

/**
 * Largest penalty level that can leave any coordinate (or group) of `u` active: beyond it every half-step is zero.
 */
inline double lambda_ceiling(const Eigen::MatrixXd& X, MethodFamily family, const GroupStructure& gs) {
    double top = 0;
    if (family == MethodFamily::L1) {
        top = X.rowwise().norm().maxCoeff();
    } else {
        for (std::size_t l = 0; l < gs.size(); ++l) {
            double ss = 0;
            for (auto i : gs.group(l)) {
                ss += X.row(i).squaredNorm();
            }
            top = std::max(top, std::sqrt(ss) / gs.weight(l));
        }
    }
    return top * 1.01;
}

}

/**
 * Penalty on `u` for a method at a given level; `level` is `lambda` for lasso-type families and ignored otherwise.
 */
inline PenaltySpec method_penalty(const BenchMethod& m, const std::shared_ptr<const GroupStructure>& gs, std::size_t planted_coords,
                                  std::size_t planted_groups, double level) {
    switch (m.family) {
        case MethodFamily::L1:
            return penalty::L1{level};
        case MethodFamily::L0:
            return penalty::L0{planted_coords};
        case MethodFamily::GL1:
            return penalty::GL1{level, gs};
        case MethodFamily::GL0:
            return penalty::GL0{planted_groups, gs, m.weighted};
        case MethodFamily::OGL1:
            return penalty::OGL1{level, gs, m.admm};
        case MethodFamily::OGL0:
        default:
            return penalty::OGL0{planted_groups, gs};
    }
}

/**
 * Solves one simulated instance with `m`. Lasso-type methods bisect `lambda` on `[0, ceiling]` until the support of `u`
 * is within `cardinality_tol` of the planted size or the bracket shrinks below `lambda_resolution`; if no step gets there the
 * closest solution is kept and flagged.
 */
inline ReplicateOutcome run_method(const BenchMethod& m, const SimInstance& inst, std::size_t planted_groups, const SolveOptions& opts,
                                   double zero_tol) {
    const std::size_t target = detail::support_size(inst.u_true, 0.0);
    ReplicateOutcome out;

    auto finish = [&](const RankOneResult& res) {
        out.rates = rates(confusion(res.factor.u, inst.u_true, zero_tol));
        out.d = res.factor.d;
        out.time = res.report.wall_time;
        out.support = detail::support_size(res.factor.u, zero_tol);
    };

    const bool lasso = m.family == MethodFamily::L1 || m.family == MethodFamily::GL1 || m.family == MethodFamily::OGL1;
    if (!lasso) {
        try {
            finish(rank_one_solve(inst.X, method_penalty(m, inst.groups, target, planted_groups, 0), m.v_penalty, opts));
        } catch (const DegenerateSolution&) {
            out.flagged = true;
            out.rates = rates(confusion(Eigen::VectorXd::Zero(inst.u_true.size()), inst.u_true, zero_tol));
        }
        return out;
    }

    const double slack = m.cardinality_tol * static_cast<double>(target);
    double lo = 0, hi = detail::lambda_ceiling(inst.X, m.family, *inst.groups);
    const double resolution = m.lambda_resolution * hi;
    std::optional<RankOneResult> best;
    double best_gap = 0, best_lambda = 0;

    for (int step = 0; step < m.bisection_steps; ++step) {
        double mid = 0.5 * (lo + hi);
        std::size_t card = 0;
        std::optional<RankOneResult> res;
        try {
            res = rank_one_solve(inst.X, method_penalty(m, inst.groups, target, planted_groups, mid), m.v_penalty, opts);
            card = detail::support_size(res->factor.u, zero_tol);
        } catch (const DegenerateSolution&) {
            card = 0;
        }

        double gap = std::abs(static_cast<double>(card) - static_cast<double>(target));
        if (res && (!best || gap < best_gap)) {
            best = std::move(res);
            best_gap = gap;
            best_lambda = mid;
        }
        if (best && best_gap <= slack) {
            break;
        }
        if (card > target) {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo <= resolution) {
            break;
        }
    }

    if (!best) {
        out.flagged = true;
        out.rates = rates(confusion(Eigen::VectorXd::Zero(inst.u_true.size()), inst.u_true, zero_tol));
        return out;
    }
    finish(*best);
    out.lambda = best_lambda;
    out.flagged = best_gap > slack;
    return out;
}

/**
 * Runs every method on `replicates` instances of every configuration and returns one row per (method, configuration),
 * ordered by configuration and then by method.
 *
 * Replicate `r` of configuration `c` uses seed `substream_seed(c.seed, r)`, and all methods see the same instances and the same
 * leading-singular-vector start. Results do not depend on the thread count.
 */
inline std::vector<BenchRow> run_benchmark(const std::vector<BenchMethod>& methods, const std::vector<SimConfig>& cfgs, std::size_t replicates,
                                           const BenchOptions& options = {}) {
    if (replicates < 1) {
        throw InvalidArgument("run_benchmark: need at least one replicate");
    }
    if (methods.empty() || cfgs.empty()) {
        throw InvalidArgument("run_benchmark: need at least one method and one configuration");
    }
    for (const auto& c : cfgs) {
        c.validate();
        for (const auto& m : methods) {
            if (c.kind == SimKind::OGR && (m.family == MethodFamily::GL1 || m.family == MethodFamily::GL0)) {
                throw InvalidArgument("run_benchmark: method " + m.name + " needs non-overlapping groups, not " + to_string(c.kind) + " data");
            }
        }
    }

    // outcomes[c][m][r]
    std::vector<std::vector<std::vector<ReplicateOutcome> > > outcomes(cfgs.size(),
        std::vector<std::vector<ReplicateOutcome> >(methods.size(), std::vector<ReplicateOutcome>(replicates)));

    const std::size_t jobs = cfgs.size() * replicates;
    std::atomic<std::size_t> next{0};
    std::mutex err_mutex;
    std::exception_ptr first_error;

    auto worker = [&]() {
        while (true) {
            std::size_t job = next.fetch_add(1);
            if (job >= jobs) {
                return;
            }
            std::size_t c = job / replicates, r = job % replicates;
            try {
                SimConfig cfg = cfgs[c];
                cfg.seed = substream_seed(cfgs[c].seed, r);
                auto inst = generate(cfg);

                SolveOptions opts = options.solve;
                if (!opts.v0) {
                    opts.v0 = init_v(inst.X, opts.init, opts.seed);
                }
                const std::size_t planted_groups = cfg.actives().size();
                for (std::size_t m = 0; m < methods.size(); ++m) {
                    outcomes[c][m][r] = run_method(methods[m], inst, planted_groups, opts, options.zero_tol);
                }
                if (options.progress) {
                    options.progress(c, r);
                }
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!first_error) {
                    first_error = std::current_exception();
                }
                next = jobs;
                return;
            }
        }
    };

    unsigned nthreads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
    nthreads = static_cast<unsigned>(std::min<std::size_t>(nthreads, jobs));
    if (nthreads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < nthreads; ++t) {
            pool.emplace_back(worker);
        }
        for (auto& t : pool) {
            t.join();
        }
    }
    if (first_error) {
        std::rethrow_exception(first_error);
    }

    std::vector<BenchRow> rows;
    for (std::size_t c = 0; c < cfgs.size(); ++c) {
        for (std::size_t m = 0; m < methods.size(); ++m) {
            BenchRow row;
            row.method = methods[m].name;
            row.kind = cfgs[c].kind;
            row.group_size = cfgs[c].group_size;
            row.p = cfgs[c].p();
            row.n = cfgs[c].n;
            row.log_snr = cfgs[c].log_snr;
            row.replicates = replicates;

            std::vector<double> tpr, tnr, fpr, fdr, acc, d, time;
            for (const auto& o : outcomes[c][m]) {
                tpr.push_back(o.rates.tpr);
                tnr.push_back(o.rates.tnr);
                fpr.push_back(o.rates.fpr);
                fdr.push_back(o.rates.fdr);
                acc.push_back(o.rates.acc);
                d.push_back(o.d);
                time.push_back(o.time);
                row.flagged += o.flagged;
            }
            row.tpr = summarize(tpr);
            row.tnr = summarize(tnr);
            row.fpr = summarize(fpr);
            row.fdr = summarize(fdr);
            row.acc = summarize(acc);
            row.d = summarize(d);
            row.time = summarize(time);
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

}

#endif

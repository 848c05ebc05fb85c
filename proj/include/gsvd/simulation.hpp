#ifndef GSVD_SIMULATION_HPP
#define GSVD_SIMULATION_HPP

#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "Eigen/Dense"
#include <boost/random/bernoulli_distribution.hpp>
#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>

#include "errors.hpp"
#include "groups.hpp"

/**
 * @file simulation.hpp
 * @brief Synthetic rank-one data with planted group-sparse left singular vectors.
 *
 * Random streams: every instance draws from three independent MT19937-64 generators, seeded with
 * `substream_seed(seed, 0)` for the signs of `u`, `substream_seed(seed, 1)` for `v` and `substream_seed(seed, 2)` for the noise.
 * Normal draws use Boost's ziggurat sampler, so instances are reproducible across platforms and standard libraries.
 */

namespace gsvd {

/**
 * SplitMix64 finalizer applied to `seed + (stream + 1) * golden`. Used to derive substream and replicate seeds.
 */
inline std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + (stream + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/**
 * - `GR`: 50 disjoint groups of `q` consecutive rows, `p = 50 q`.
 * - `OGR`: 49 groups `{j t, ..., (j + 2) t - 1}`, each overlapping its neighbours by `t` rows, `p = 50 t`.
 */
enum class SimKind { GR, OGR };

inline std::string to_string(SimKind k) {
    return k == SimKind::GR ? "gr" : "ogr";
}

/**
 * Default planted groups, 0-based.
 */
inline std::vector<std::size_t> default_active_groups(SimKind kind) {
    if (kind == SimKind::GR) {
        return { 2, 3, 12, 13, 14, 32, 33, 42, 43, 44 };
    }
    return { 2, 12, 13, 32, 42, 43 };
}

inline std::size_t simulated_group_count(SimKind kind) {
    return kind == SimKind::GR ? 50 : 49;
}

struct SimConfig {
    SimKind kind = SimKind::GR;

    /**
     * `q` for GR, `t` for OGR.
     */
    std::size_t group_size = 20;

    std::size_t n = 100;
    double log_snr = -2;
    std::uint64_t seed = 1;

    /**
     * Planted groups (0-based). Empty means `default_active_groups(kind)`.
     */
    std::vector<std::size_t> active_groups;

    std::size_t p() const { return 50 * group_size; }

    std::vector<std::size_t> actives() const {
        return active_groups.empty() ? default_active_groups(kind) : active_groups;
    }

    void validate() const {
        if (group_size == 0 || n == 0) {
            throw InvalidArgument("simulation: group size and n must be positive");
        }
        if (!std::isfinite(log_snr)) {
            throw InvalidArgument("simulation: log SNR must be finite");
        }
        for (auto a : actives()) {
            if (a >= simulated_group_count(kind)) {
                throw InvalidArgument("simulation: active group " + std::to_string(a) + " outside the " +
                                      std::to_string(simulated_group_count(kind)) + " generated groups");
            }
        }
    }
};

struct SimInstance {
    Eigen::MatrixXd X;
    Eigen::VectorXd u_true;
    Eigen::VectorXd v_true;
    std::shared_ptr<const GroupStructure> groups;
    double gamma = 0;
    double d = 1;
};

inline GroupStructure simulated_groups(SimKind kind, std::size_t size) {
    std::vector<std::vector<std::size_t> > groups;
    if (kind == SimKind::GR) {
        for (std::size_t g = 0; g < 50; ++g) {
            std::vector<std::size_t> members(size);
            for (std::size_t j = 0; j < size; ++j) {
                members[j] = g * size + j;
            }
            groups.push_back(std::move(members));
        }
    } else {
        for (std::size_t g = 0; g < 49; ++g) {
            std::vector<std::size_t> members(2 * size);
            for (std::size_t j = 0; j < 2 * size; ++j) {
                members[j] = g * size + j;
            }
            groups.push_back(std::move(members));
        }
    }
    return GroupStructure(50 * size, groups).with_weights(WeightScheme::SQRT_SIZE);
}

/**
 * Noise level giving `log10(||d u v^T||_F^2 / (gamma^2 n p)) = log_snr`, where `p = len(u)` and `n = len(v)`.
 */
inline double gamma_from_logsnr(const Eigen::VectorXd& u, const Eigen::VectorXd& v, double d, double log_snr) {
    double signal = d * d * u.squaredNorm() * v.squaredNorm();
    if (!(signal > 0) || !std::isfinite(signal)) {
        throw InvalidArgument("gamma_from_logsnr: signal energy must be positive and finite");
    }
    double np = static_cast<double>(u.size()) * static_cast<double>(v.size());
    return std::sqrt(signal / (np * std::pow(10.0, log_snr)));
}

/**
 * Forward log SNR of a rank-one signal at noise level `gamma`.
 */
inline double log_snr(const Eigen::VectorXd& u, const Eigen::VectorXd& v, double d, double gamma) {
    double signal = d * d * u.squaredNorm() * v.squaredNorm();
    double np = static_cast<double>(u.size()) * static_cast<double>(v.size());
    return std::log10(signal / (gamma * gamma * np));
}

/**
 * Draws `X = d u v^T + gamma * eps` with `d = 1`: `u` is +-1 on the planted groups and 0 elsewhere,
 * `v` and `eps` are i.i.d. standard normal.
 */
inline SimInstance generate(const SimConfig& cfg) {
    cfg.validate();
    const std::size_t p = cfg.p(), n = cfg.n;

    SimInstance out;
    out.groups = std::make_shared<const GroupStructure>(simulated_groups(cfg.kind, cfg.group_size));

    boost::random::mt19937_64 sign_rng(substream_seed(cfg.seed, 0));
    boost::random::mt19937_64 v_rng(substream_seed(cfg.seed, 1));
    boost::random::mt19937_64 noise_rng(substream_seed(cfg.seed, 2));
    boost::random::bernoulli_distribution<double> coin(0.5);
    boost::random::normal_distribution<double> normal;

    out.u_true = Eigen::VectorXd::Zero(p);
    for (auto g : cfg.actives()) {
        // Overlapped rows of adjacent active groups are redrawn by the later group.
        for (auto i : out.groups->group(g)) {
            out.u_true[i] = coin(sign_rng) ? 1.0 : -1.0;
        }
    }

    out.v_true.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        out.v_true[j] = normal(v_rng);
    }

    out.d = 1;
    out.gamma = gamma_from_logsnr(out.u_true, out.v_true, out.d, cfg.log_snr);

    out.X.resize(p, n);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < p; ++i) {
            out.X(i, j) = out.gamma * normal(noise_rng);
        }
    }
    out.X.noalias() += out.d * out.u_true * out.v_true.transpose();
    return out;
}

}

#endif

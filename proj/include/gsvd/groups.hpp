#ifndef GSVD_GROUPS_HPP
#define GSVD_GROUPS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"

/**
 * @file groups.hpp
 * @brief Variable groupings over one axis of the data matrix.
 */

namespace gsvd {

/**
 * Weighting schemes for group penalties.
 *
 * - `UNIFORM`: every group has weight 1.
 * - `SQRT_SIZE`: weight is the square root of the group size (classic group lasso).
 * - `INV_SQRT_SIZE`: weight is one over the square root of the group size (size-balanced group L0).
 */
enum class WeightScheme { UNIFORM, SQRT_SIZE, INV_SQRT_SIZE };

/**
 * @brief An ordered list of index groups over a vector of length `dimension()`.
 *
 * Groups may overlap. Indices are 0-based and stored sorted within each group, while the order of the groups themselves is kept as given.
 * Instances are immutable once constructed, so they can be shared freely between concurrent solves.
 */
class GroupStructure {
public:
    GroupStructure() = default;

    /**
     * @param dimension Length of the indexed vector, must be positive.
     * @param groups Each group is a non-empty list of distinct indices in `[0, dimension)`.
     * @param weights One positive weight per group. If empty, all weights are set to 1.
     */
    GroupStructure(std::size_t dimension, const std::vector<std::vector<std::size_t> >& groups, std::vector<double> weights = {})
        : dimension_(dimension)
    {
        if (dimension == 0) {
            throw InvalidArgument("group structure dimension must be positive");
        }

        offsets_.reserve(groups.size() + 1);
        for (std::size_t l = 0; l < groups.size(); ++l) {
            auto members = groups[l];
            if (members.empty()) {
                throw InvalidArgument("group " + std::to_string(l) + " is empty");
            }
            std::sort(members.begin(), members.end());
            for (std::size_t j = 0; j < members.size(); ++j) {
                if (members[j] >= dimension) {
                    throw InvalidArgument("group " + std::to_string(l) + " contains index " + std::to_string(members[j]) +
                                          " outside [0, " + std::to_string(dimension) + ")");
                }
                if (j > 0 && members[j] == members[j - 1]) {
                    throw InvalidArgument("group " + std::to_string(l) + " repeats index " + std::to_string(members[j]));
                }
            }
            indices_.insert(indices_.end(), members.begin(), members.end());
            offsets_.push_back(indices_.size());
        }

        if (weights.empty()) {
            weights.assign(groups.size(), 1.0);
        }
        if (weights.size() != groups.size()) {
            throw InvalidArgument("expected " + std::to_string(groups.size()) + " group weights, got " + std::to_string(weights.size()));
        }
        for (std::size_t l = 0; l < weights.size(); ++l) {
            if (!(weights[l] > 0) || !std::isfinite(weights[l])) {
                throw InvalidArgument("weight of group " + std::to_string(l) + " must be positive and finite");
            }
        }
        weights_ = std::move(weights);

        coverage_.assign(dimension_, 0);
        for (auto i : indices_) {
            ++coverage_[i];
        }
        overlapping_ = std::any_of(coverage_.begin(), coverage_.end(), [](std::size_t c) { return c > 1; });
        full_coverage_ = std::none_of(coverage_.begin(), coverage_.end(), [](std::size_t c) { return c == 0; });
    }

public:
    std::size_t dimension() const { return dimension_; }

    std::size_t size() const { return weights_.size(); }

    std::span<const std::size_t> group(std::size_t l) const {
        return std::span<const std::size_t>(indices_.data() + offsets_[l], offsets_[l + 1] - offsets_[l]);
    }

    std::size_t group_size(std::size_t l) const { return offsets_[l + 1] - offsets_[l]; }

    const std::vector<double>& weights() const { return weights_; }

    double weight(std::size_t l) const { return weights_[l]; }

    /**
     * @return Whether any index belongs to two or more groups.
     */
    bool overlapping() const { return overlapping_; }

    /**
     * @return Whether every index in `[0, dimension)` belongs to at least one group.
     */
    bool covers_all() const { return full_coverage_; }

    /**
     * @return Number of groups containing each index.
     */
    const std::vector<std::size_t>& coverage_counts() const { return coverage_; }

    /**
     * @return Sum of all group sizes, counting overlapped indices once per group.
     */
    std::size_t total_members() const { return indices_.size(); }

    /**
     * Throws unless the groups form a partition of `[0, dimension)`, as required by the GL1 and GL0 penalties.
     *
     * @param context Used as the prefix of the error message.
     */
    void require_partition(const std::string& context) const {
        if (overlapping_) {
            throw InvalidArgument(context + ": requires non-overlapping groups");
        }
        if (!full_coverage_) {
            auto it = std::find(coverage_.begin(), coverage_.end(), 0);
            throw InvalidArgument(context + ": every variable must belong to a group, index " +
                                  std::to_string(it - coverage_.begin()) + " is not covered");
        }
    }

    std::vector<std::vector<std::size_t> > to_lists() const {
        std::vector<std::vector<std::size_t> > out;
        out.reserve(size());
        for (std::size_t l = 0; l < size(); ++l) {
            auto g = group(l);
            out.emplace_back(g.begin(), g.end());
        }
        return out;
    }

    /**
     * @return A copy with weights assigned by `scheme`.
     */
    GroupStructure with_weights(WeightScheme scheme) const {
        GroupStructure out = *this;
        for (std::size_t l = 0; l < size(); ++l) {
            double sz = static_cast<double>(group_size(l));
            switch (scheme) {
                case WeightScheme::UNIFORM:
                    out.weights_[l] = 1.0;
                    break;
                case WeightScheme::SQRT_SIZE:
                    out.weights_[l] = std::sqrt(sz);
                    break;
                case WeightScheme::INV_SQRT_SIZE:
                    out.weights_[l] = 1.0 / std::sqrt(sz);
                    break;
            }
        }
        return out;
    }

    friend bool operator==(const GroupStructure&, const GroupStructure&) = default;

private:
    std::size_t dimension_ = 0;
    std::vector<std::size_t> indices_;
    std::vector<std::size_t> offsets_{0};
    std::vector<double> weights_;
    std::vector<std::size_t> coverage_;
    bool overlapping_ = false;
    bool full_coverage_ = false;
};

/**
 * One group per variable, all weights 1. Group penalties on this structure reduce to their elementwise counterparts.
 */
inline GroupStructure make_singleton_groups(std::size_t dimension) {
    if (dimension == 0) {
        throw InvalidArgument("singleton groups need a positive dimension");
    }
    std::vector<std::vector<std::size_t> > groups(dimension);
    for (std::size_t i = 0; i < dimension; ++i) {
        groups[i] = {i};
    }
    return GroupStructure(dimension, groups);
}

/**
 * Edge-as-group construction for network priors.
 * Each undirected edge becomes the two-element group `{i, j}`; duplicate edges, in either orientation, are collapsed onto the first occurrence.
 */
inline GroupStructure make_edge_groups(std::size_t dimension, const std::vector<std::pair<std::size_t, std::size_t> >& edges) {
    std::set<std::pair<std::size_t, std::size_t> > seen;
    std::vector<std::vector<std::size_t> > groups;
    groups.reserve(edges.size());

    for (const auto& [a, b] : edges) {
        auto label = "(" + std::to_string(a) + ", " + std::to_string(b) + ")";
        if (a == b) {
            throw InvalidArgument("self-loop edge " + label);
        }
        if (a >= dimension || b >= dimension) {
            throw InvalidArgument("edge " + label + " is outside [0, " + std::to_string(dimension) + ")");
        }
        auto key = std::minmax(a, b);
        if (seen.insert(key).second) {
            groups.push_back({key.first, key.second});
        }
    }

    return GroupStructure(dimension, groups);
}

inline GroupStructure make_default_weights(const GroupStructure& gs, WeightScheme scheme) {
    return gs.with_weights(scheme);
}

inline std::vector<std::size_t> coverage_counts(const GroupStructure& gs) {
    return gs.coverage_counts();
}

}

#endif

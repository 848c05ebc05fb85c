#ifndef GSVD_METRICS_HPP
#define GSVD_METRICS_HPP

#include <cmath>
#include <cstddef>
#include <string>

#include "Eigen/Dense"

#include "errors.hpp"

/**
 * @file metrics.hpp
 * @brief Support-recovery confusion counts and rates.
 */

namespace gsvd {

struct ConfusionCounts {
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;

    std::size_t positives() const { return tp + fn; }
    std::size_t negatives() const { return tn + fp; }
    std::size_t total() const { return tp + fp + tn + fn; }

    friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

/**
 * Compares the supports (entries with `|x| > zero_tol`) of an estimate and the truth. Signs are ignored.
 */
inline ConfusionCounts confusion(const Eigen::VectorXd& estimated, const Eigen::VectorXd& truth, double zero_tol = 1e-10) {
    if (estimated.size() != truth.size()) {
        throw InvalidArgument("confusion: estimate has length " + std::to_string(estimated.size()) +
                              " but truth has length " + std::to_string(truth.size()));
    }
    if (!(zero_tol >= 0)) {
        throw InvalidArgument("confusion: zero_tol must be non-negative");
    }
    ConfusionCounts c;
    for (Eigen::Index i = 0; i < truth.size(); ++i) {
        bool e = std::abs(estimated[i]) > zero_tol;
        bool t = std::abs(truth[i]) > zero_tol;
        if (e && t) {
            ++c.tp;
        } else if (e) {
            ++c.fp;
        } else if (t) {
            ++c.fn;
        } else {
            ++c.tn;
        }
    }
    return c;
}

struct Rates {
    double tpr = 0, tnr = 0, fpr = 0, fdr = 0, acc = 0;
};

/**
 * Empty denominators: TPR is 1 when there are no positives, TNR is 1 and FPR 0 when there are no negatives,
 * FDR is 0 when nothing was selected, ACC is 1 for an empty vector.
 */
inline Rates rates(const ConfusionCounts& c) {
    Rates r;
    auto ratio = [](std::size_t num, std::size_t den, double fallback) {
        return den == 0 ? fallback : static_cast<double>(num) / static_cast<double>(den);
    };
    r.tpr = ratio(c.tp, c.positives(), 1.0);
    r.tnr = ratio(c.tn, c.negatives(), 1.0);
    r.fpr = ratio(c.fp, c.negatives(), 0.0);
    r.fdr = ratio(c.fp, c.tp + c.fp, 0.0);
    r.acc = ratio(c.tp + c.tn, c.total(), 1.0);
    return r;
}

}

#endif

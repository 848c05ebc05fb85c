#include <algorithm>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "gsvd/metrics.hpp"

using namespace gsvd;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> xs) {
    Eigen::VectorXd v(xs.size());
    std::size_t i = 0;
    for (double x : xs) {
        v[i++] = x;
    }
    return v;
}

}

TEST(Confusion, PerfectRecovery) {
    auto t = vec({ 1, 0, -2, 0, 3 });
    auto c = confusion(t, t);
    EXPECT_EQ(c.fp, 0u);
    EXPECT_EQ(c.fn, 0u);
    EXPECT_DOUBLE_EQ(rates(c).acc, 1.0);
}

TEST(Confusion, EmptyEstimate) {
    auto r = rates(confusion(Eigen::VectorXd::Zero(4), vec({ 1, 1, 0, 0 })));
    EXPECT_EQ(r.tpr, 0.0);
    EXPECT_EQ(r.tnr, 1.0);
    EXPECT_EQ(r.fdr, 0.0);
}

TEST(Confusion, HandEnumeration) {
    auto c = confusion(vec({ 1, 1, 0, 0 }), vec({ 0, 1, 1, 0 }));
    EXPECT_EQ(c, (ConfusionCounts{ 1, 1, 1, 1 }));
    auto r = rates(c);
    EXPECT_DOUBLE_EQ(r.acc, 0.5);
    EXPECT_DOUBLE_EQ(r.fdr, 0.5);
    EXPECT_DOUBLE_EQ(r.tpr, 0.5);
    EXPECT_DOUBLE_EQ(r.fpr, 0.5);
}

TEST(Confusion, SignsIgnoredAndToleranceApplied) {
    auto c = confusion(vec({ -1, 1e-12, 0 }), vec({ 2, 0, 0 }));
    EXPECT_EQ(c, (ConfusionCounts{ 1, 0, 2, 0 }));
    auto strict = confusion(vec({ -1, 1e-12, 0 }), vec({ 2, 0, 0 }), 0.0);
    EXPECT_EQ(strict.fp, 1u);
}

TEST(Confusion, LengthMismatch) {
    EXPECT_THROW(confusion(vec({ 1, 2 }), vec({ 1 })), InvalidArgument);
}

TEST(Rates, AllCorrect) {
    auto r = rates(ConfusionCounts{ 2, 0, 3, 0 });
    EXPECT_EQ(r.tpr, 1.0);
    EXPECT_EQ(r.tnr, 1.0);
    EXPECT_EQ(r.acc, 1.0);
    EXPECT_EQ(r.fpr, 0.0);
    EXPECT_EQ(r.fdr, 0.0);
}

TEST(Rates, EmptyDenominators) {
    EXPECT_EQ(rates(ConfusionCounts{ 0, 0, 3, 0 }).fdr, 0.0);
    EXPECT_EQ(rates(ConfusionCounts{ 0, 0, 3, 0 }).tpr, 1.0);
    auto r = rates(ConfusionCounts{ 2, 0, 0, 1 });
    EXPECT_EQ(r.tnr, 1.0);
    EXPECT_EQ(r.fpr, 0.0);
    EXPECT_EQ(rates(ConfusionCounts{}).acc, 1.0);
}

TEST(Rates, PropertiesOnRandomSupports) {
    std::mt19937_64 rng(31);
    std::bernoulli_distribution coin(0.3);
    for (int rep = 0; rep < 200; ++rep) {
        std::size_t n = 1 + rep % 40;
        Eigen::VectorXd est(n), truth(n);
        for (std::size_t i = 0; i < n; ++i) {
            est[i] = coin(rng);
            truth[i] = coin(rng);
        }
        auto c = confusion(est, truth);
        EXPECT_EQ(c.total(), n);
        auto r = rates(c);
        EXPECT_DOUBLE_EQ(r.acc, static_cast<double>(c.tp + c.tn) / static_cast<double>(n));
        for (double x : { r.tpr, r.tnr, r.fpr, r.fdr, r.acc }) {
            EXPECT_GE(x, 0.0);
            EXPECT_LE(x, 1.0);
        }
        if (c.positives() > 0) {
            EXPECT_NEAR(r.tpr * static_cast<double>(c.positives()) + static_cast<double>(c.fn), static_cast<double>(c.positives()), 1e-12);
        }

        // Joint permutation leaves the counts unchanged.
        std::vector<Eigen::Index> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        Eigen::VectorXd pe(n), pt(n);
        for (std::size_t i = 0; i < n; ++i) {
            pe[i] = est[perm[i]];
            pt[i] = truth[perm[i]];
        }
        EXPECT_EQ(confusion(pe, pt), c);
    }
}

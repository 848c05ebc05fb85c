#include <cmath>
#include <memory>
#include <random>

#include <gtest/gtest.h>

#include "gsvd/simulation.hpp"
#include "gsvd/solver.hpp"

using namespace gsvd;

namespace {

Eigen::VectorXd unit_normal(std::mt19937_64& rng, Eigen::Index n) {
    std::normal_distribution<double> normal;
    Eigen::VectorXd x(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        x[i] = normal(rng);
    }
    return x / x.norm();
}

Eigen::MatrixXd noisy_rank_one(std::mt19937_64& rng, Eigen::Index p, Eigen::Index n, double noise, Eigen::VectorXd* u_out = nullptr) {
    Eigen::VectorXd u = Eigen::VectorXd::Zero(p);
    std::normal_distribution<double> normal;
    for (Eigen::Index i = 0; i < p / 4; ++i) {
        u[i] = normal(rng);
    }
    u /= u.norm();
    Eigen::VectorXd v = unit_normal(rng, n);
    Eigen::MatrixXd X = 10 * u * v.transpose();
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < p; ++i) {
            X(i, j) += noise * normal(rng);
        }
    }
    if (u_out) {
        *u_out = u;
    }
    return X;
}

GroupsPtr blocks(std::size_t p, std::size_t size) {
    std::vector<std::vector<std::size_t> > groups;
    for (std::size_t s = 0; s < p; s += size) {
        std::vector<std::size_t> g;
        for (std::size_t i = s; i < std::min(p, s + size); ++i) {
            g.push_back(i);
        }
        groups.push_back(g);
    }
    return std::make_shared<const GroupStructure>(p, groups);
}

GroupsPtr sliding(std::size_t p, std::size_t width, std::size_t step) {
    std::vector<std::vector<std::size_t> > groups;
    for (std::size_t s = 0; s + width <= p; s += step) {
        std::vector<std::size_t> g;
        for (std::size_t i = s; i < s + width; ++i) {
            g.push_back(i);
        }
        groups.push_back(g);
    }
    return std::make_shared<const GroupStructure>(p, groups);
}

std::vector<bool> support(const Eigen::VectorXd& x) {
    std::vector<bool> s(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        s[i] = x[i] != 0;
    }
    return s;
}

std::vector<bool> union_of(const GroupStructure& gs, const std::vector<std::size_t>& sel) {
    std::vector<bool> s(gs.dimension(), false);
    for (auto l : sel) {
        for (auto i : gs.group(l)) {
            s[i] = true;
        }
    }
    return s;
}

}

TEST(Init, UniformStart) {
    Eigen::MatrixXd X = Eigen::MatrixXd::Ones(3, 4);
    auto v = init_v(X, InitStrategy::UNIFORM);
    EXPECT_EQ(v, Eigen::VectorXd::Constant(4, 0.5));
}

TEST(Init, RandomStartIsSeededAndUnit) {
    Eigen::MatrixXd X = Eigen::MatrixXd::Ones(3, 20);
    auto a = init_v(X, InitStrategy::RANDOM, 5);
    auto b = init_v(X, InitStrategy::RANDOM, 5);
    auto c = init_v(X, InitStrategy::RANDOM, 6);
    EXPECT_EQ(a, b);
    EXPECT_NE(a, c);
    EXPECT_NEAR(a.norm(), 1.0, 1e-14);
}

TEST(Init, LeadingMatchesEigenSvd) {
    std::mt19937_64 rng(1);
    auto X = noisy_rank_one(rng, 40, 15, 0.5);
    auto v = init_v(X, InitStrategy::LEADING);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(X, Eigen::ComputeThinV);
    EXPECT_NEAR(std::abs(v.dot(svd.matrixV().col(0))), 1.0, 1e-9);
}

TEST(RankOne, NoiselessRecovery) {
    std::mt19937_64 rng(42);
    for (int rep = 0; rep < 10; ++rep) {
        auto u0 = unit_normal(rng, 30 + rep);
        auto v0 = unit_normal(rng, 12 + rep);
        double d0 = 0.5 + rep;
        Eigen::MatrixXd X = d0 * u0 * v0.transpose();
        auto res = rank_one_solve(X, penalty::None{}, penalty::None{});
        EXPECT_NEAR(res.factor.d, d0, 1e-8 * d0);
        EXPECT_NEAR(std::abs(res.factor.u.dot(u0)), 1.0, 1e-8);
        EXPECT_NEAR(std::abs(res.factor.v.dot(v0)), 1.0, 1e-8);
        EXPECT_TRUE(res.report.converged);
        EXPECT_FALSE(res.report.d_trace.empty());
    }
}

TEST(RankOne, UnitNormsAndNonNegativeD) {
    std::mt19937_64 rng(3);
    auto X = noisy_rank_one(rng, 60, 20, 1.0);
    auto gs = blocks(60, 5);
    std::vector<PenaltySpec> pens = { penalty::None{}, penalty::L1{ 0.5 }, penalty::L0{ 10 }, penalty::GL1{ 0.5, gs },
                                      penalty::GL0{ 3, gs }, penalty::OGL1{ 0.5, sliding(60, 10, 5), {} }, penalty::OGL0{ 3, sliding(60, 10, 5) } };
    for (const auto& pu : pens) {
        auto res = rank_one_solve(X, pu, penalty::L0{ 15 });
        EXPECT_NEAR(res.factor.u.norm(), 1.0, 1e-12) << describe(pu);
        EXPECT_NEAR(res.factor.v.norm(), 1.0, 1e-12) << describe(pu);
        EXPECT_GE(res.factor.d, 0) << describe(pu);
        EXPECT_NEAR(res.factor.d, res.factor.u.dot(X * res.factor.v), 1e-9 * res.factor.d) << describe(pu);
    }
}

TEST(RankOne, SingletonGroupsReduceToPlainPenalties) {
    std::mt19937_64 rng(8);
    auto X = noisy_rank_one(rng, 50, 20, 1.0);
    auto singles = std::make_shared<const GroupStructure>(make_singleton_groups(50));

    auto a = rank_one_solve(X, penalty::L0{ 7 }, penalty::None{});
    auto b = rank_one_solve(X, penalty::GL0{ 7, singles }, penalty::None{});
    auto c = rank_one_solve(X, penalty::OGL0{ 7, singles }, penalty::None{});
    EXPECT_TRUE(a.factor.u.isApprox(b.factor.u, 1e-14));
    EXPECT_TRUE(a.factor.u.isApprox(c.factor.u, 1e-14));
    EXPECT_NEAR(a.factor.d, b.factor.d, 1e-12);

    auto l1 = rank_one_solve(X, penalty::L1{ 0.8 }, penalty::None{});
    auto gl1 = rank_one_solve(X, penalty::GL1{ 0.8, singles }, penalty::None{});
    EXPECT_TRUE(l1.factor.u.isApprox(gl1.factor.u, 1e-14));
}

TEST(RankOne, MonotoneTraces) {
    std::mt19937_64 rng(12);
    auto gs = blocks(80, 4);
    auto ov = sliding(80, 8, 4);
    for (int rep = 0; rep < 15; ++rep) {
        auto X = noisy_rank_one(rng, 80, 25, 2.0);
        SolveOptions opts;
        opts.init = InitStrategy::RANDOM;
        opts.seed = rep;
        // Cardinality penalties: d itself never decreases.
        std::vector<PenaltySpec> pens = { penalty::GL0{ 4, gs }, penalty::OGL0{ 4, ov }, penalty::L0{ 12 } };
        for (const auto& pu : pens) {
            auto res = rank_one_solve(X, pu, penalty::L0{ 10 }, opts);
            const auto& t = res.report.d_trace;
            for (std::size_t i = 1; i < t.size(); ++i) {
                EXPECT_GE(t[i], t[i - 1] - 1e-8) << describe(pu) << " rep " << rep << " step " << i;
            }
        }
        // Lagrangian penalties: the penalized objective never decreases.
        std::vector<PenaltySpec> lag = { penalty::GL1{ 1.0, gs }, penalty::L1{ 0.3 } };
        for (const auto& pu : lag) {
            auto res = rank_one_solve(X, pu, penalty::L1{ 0.05 }, opts);
            const auto& t = res.report.objective_trace;
            for (std::size_t i = 1; i < t.size(); ++i) {
                EXPECT_GE(t[i], t[i - 1] - 1e-8) << describe(pu) << " rep " << rep << " step " << i;
            }
        }
        auto ogl1 = rank_one_solve(X, penalty::OGL1{ 1.0, ov, {} }, penalty::None{}, opts);
        EXPECT_GE(ogl1.report.d_trace.back(), ogl1.report.d_trace.front() - 1e-8);
    }
}

TEST(RankOne, SupportsAreUnionsOfGroups) {
    std::mt19937_64 rng(4);
    auto X = noisy_rank_one(rng, 60, 20, 1.0);
    auto gs = blocks(60, 6);
    auto ov = sliding(60, 10, 5);

    auto gl0 = rank_one_solve(X, penalty::GL0{ 3, gs }, penalty::None{});
    EXPECT_EQ(gl0.factor.groups_u.size(), 3u);
    EXPECT_EQ(support(gl0.factor.u), union_of(*gs, gl0.factor.groups_u));

    auto ogl0 = rank_one_solve(X, penalty::OGL0{ 2, ov }, penalty::None{});
    EXPECT_EQ(ogl0.factor.groups_u.size(), 2u);
    EXPECT_EQ(support(ogl0.factor.u), union_of(*ov, ogl0.factor.groups_u));

    auto ogl1 = rank_one_solve(X, penalty::OGL1{ 0.5, ov, {} }, penalty::None{});
    EXPECT_EQ(support(ogl1.factor.u), union_of(*ov, ogl1.factor.groups_u));

    auto l0 = rank_one_solve(X, penalty::L0{ 9 }, penalty::L0{ 5 });
    auto su = support(l0.factor.u);
    EXPECT_EQ(std::count(su.begin(), su.end(), true), 9);
    auto sv = support(l0.factor.v);
    EXPECT_EQ(std::count(sv.begin(), sv.end(), true), 5);
}

TEST(RankOne, ScaleAndSignEquivariance) {
    std::mt19937_64 rng(9);
    auto X = noisy_rank_one(rng, 40, 15, 1.0);
    auto gs = blocks(40, 4);
    PenaltySpec pu = penalty::GL0{ 2, gs };
    auto base = rank_one_solve(X, pu, penalty::L0{ 6 });

    Eigen::MatrixXd scaled = 3.5 * X;
    auto s = rank_one_solve(scaled, pu, penalty::L0{ 6 });
    EXPECT_NEAR(s.factor.d, 3.5 * base.factor.d, 1e-9 * s.factor.d);
    EXPECT_TRUE(s.factor.u.isApprox(base.factor.u, 1e-9));

    Eigen::MatrixXd neg = -X;
    auto n = rank_one_solve(neg, pu, penalty::L0{ 6 });
    EXPECT_NEAR(n.factor.d, base.factor.d, 1e-9 * base.factor.d);
    Eigen::MatrixXd r0 = base.factor.d * base.factor.u * base.factor.v.transpose();
    Eigen::MatrixXd r1 = -n.factor.d * n.factor.u * n.factor.v.transpose();
    EXPECT_LT((r0 - r1).norm(), 1e-9 * r0.norm());
}

TEST(RankOne, DeterministicUnderFixedSeed) {
    std::mt19937_64 rng(10);
    auto X = noisy_rank_one(rng, 40, 15, 1.0);
    SolveOptions opts;
    opts.init = InitStrategy::RANDOM;
    opts.seed = 77;
    auto a = rank_one_solve(X, penalty::L1{ 0.3 }, penalty::L1{ 0.1 }, opts);
    auto b = rank_one_solve(X, penalty::L1{ 0.3 }, penalty::L1{ 0.1 }, opts);
    EXPECT_EQ(a.factor.u, b.factor.u);
    EXPECT_EQ(a.factor.v, b.factor.v);
    EXPECT_EQ(a.report.d_trace, b.report.d_trace);
}

TEST(RankOne, DegenerateHalfStepNamesPenalty) {
    Eigen::MatrixXd X = Eigen::MatrixXd::Ones(5, 4);
    try {
        rank_one_solve(X, penalty::L1{ 1e6 }, penalty::None{});
        FAIL() << "expected a degenerate solution";
    } catch (const DegenerateSolution& e) {
        std::string msg = e.what();
        EXPECT_NE(msg.find("l1"), std::string::npos);
        EXPECT_NE(msg.find("lambda=1e+06"), std::string::npos);
    }
}

TEST(RankOne, RejectsInvalidInput) {
    Eigen::MatrixXd X = Eigen::MatrixXd::Ones(5, 4);
    auto gs = blocks(5, 2);
    EXPECT_THROW(rank_one_solve(X, penalty::GL0{ 1, gs }, penalty::GL0{ 1, gs }), InvalidArgument);
    EXPECT_THROW(rank_one_solve(X, penalty::L0{ 6 }, penalty::None{}), InvalidArgument);
    EXPECT_THROW(rank_one_solve(X, penalty::GL1{ 0.1, nullptr }, penalty::None{}), InvalidArgument);
    EXPECT_THROW(rank_one_solve(X, penalty::GL1{ 0.1, sliding(5, 2, 1) }, penalty::None{}), InvalidArgument);
    X(0, 0) = std::nan("");
    EXPECT_THROW(rank_one_solve(X, penalty::None{}, penalty::None{}), InvalidArgument);
}

TEST(RankOne, GroupRecoveryOnSimulatedData) {
    // Ten replicates of the default GR design at p = 1000 and logSNR = -2.
    int exact = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        SimConfig cfg;
        cfg.seed = seed;
        auto inst = generate(cfg);
        auto res = rank_one_solve(inst.X, penalty::GL0{ 10, inst.groups }, penalty::None{});
        exact += res.factor.groups_u == cfg.actives();
    }
    EXPECT_GE(exact, 9);
}

TEST(Deflation, NoiselessRankOne) {
    std::mt19937_64 rng(5);
    auto u0 = unit_normal(rng, 20), v0 = unit_normal(rng, 8);
    Eigen::MatrixXd X = 4.0 * u0 * v0.transpose();
    auto dec = deflate_solve(X, penalty::None{}, penalty::None{}, 2);
    ASSERT_EQ(dec.factors.size(), 2u);
    EXPECT_NEAR(dec.factors[0].d, 4.0, 1e-8);
    EXPECT_LE(dec.factors[1].d, 1e-6 * dec.factors[0].d);
    EXPECT_LE(dec.residual_norm, 1e-6 * X.norm());
}

TEST(Deflation, FullRankExplainsEverything) {
    std::mt19937_64 rng(6);
    std::normal_distribution<double> normal;
    Eigen::MatrixXd X(12, 5);
    for (Eigen::Index i = 0; i < X.size(); ++i) {
        X.data()[i] = normal(rng);
    }
    SolveOptions opts;
    opts.tol = 1e-14;
    opts.max_iter = 5000;
    auto dec = deflate_solve(X, penalty::None{}, penalty::None{}, 5, opts);
    EXPECT_NEAR(dec.cumulative_variance_explained.back(), 1.0, 1e-6);
    for (std::size_t i = 1; i < dec.factors.size(); ++i) {
        EXPECT_LE(dec.factors[i].d, dec.factors[i - 1].d + 1e-8);
    }
    double sum = 0;
    for (double x : dec.variance_explained) {
        sum += x;
    }
    EXPECT_NEAR(sum, dec.cumulative_variance_explained.back(), 1e-12);
}

TEST(Deflation, RecoversTwoDisjointBlocks) {
    std::mt19937_64 rng(21);
    const std::size_t p = 100, n = 40;
    auto gs = blocks(p, 10);
    Eigen::VectorXd u1 = Eigen::VectorXd::Zero(p), u2 = Eigen::VectorXd::Zero(p);
    std::normal_distribution<double> normal;
    for (std::size_t i = 10; i < 30; ++i) {
        u1[i] = normal(rng);
    }
    for (std::size_t i = 60; i < 80; ++i) {
        u2[i] = normal(rng);
    }
    u1 /= u1.norm();
    u2 /= u2.norm();
    auto v1 = unit_normal(rng, n), v2 = unit_normal(rng, n);
    Eigen::MatrixXd X = 20 * u1 * v1.transpose() + 12 * u2 * v2.transpose();
    for (Eigen::Index i = 0; i < X.size(); ++i) {
        X.data()[i] += 0.1 * normal(rng);
    }

    auto dec = deflate_solve(X, penalty::GL0{ 2, gs }, penalty::None{}, 2);
    EXPECT_EQ(dec.factors[0].groups_u, (std::vector<std::size_t>{ 1, 2 }));
    EXPECT_EQ(dec.factors[1].groups_u, (std::vector<std::size_t>{ 6, 7 }));
    EXPECT_GT(dec.factors[0].d, dec.factors[1].d);
}

TEST(Deflation, ExhaustedResidualGivesDegenerateFactors) {
    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(3, 3);
    X(0, 0) = 2;
    auto dec = deflate_solve(X, penalty::None{}, penalty::None{}, 3);
    EXPECT_NEAR(dec.factors[0].d, 2.0, 1e-12);
    EXPECT_TRUE(dec.factors[1].degenerate);
    EXPECT_EQ(dec.factors[2].d, 0.0);
}

TEST(Deflation, DegenerateErrorNamesFactor) {
    std::mt19937_64 rng(2);
    auto X = noisy_rank_one(rng, 20, 10, 0.01);
    try {
        deflate_solve(X, penalty::L1{ 1e3 }, penalty::None{}, 2);
        FAIL();
    } catch (const DegenerateSolution& e) {
        EXPECT_EQ(std::string(e.what()).rfind("factor 1:", 0), 0u);
    }
}

#include <gtest/gtest.h>

#include "gsvd/groups.hpp"

using namespace gsvd;

TEST(GroupStructure, SingletonsCoverEveryIndex) {
    auto gs = make_singleton_groups(3);
    ASSERT_EQ(gs.size(), 3u);
    for (std::size_t l = 0; l < 3; ++l) {
        ASSERT_EQ(gs.group_size(l), 1u);
        EXPECT_EQ(gs.group(l)[0], l);
        EXPECT_DOUBLE_EQ(gs.weight(l), 1.0);
    }
    EXPECT_FALSE(gs.overlapping());
    EXPECT_TRUE(gs.covers_all());

    auto big = make_singleton_groups(1000);
    EXPECT_EQ(big.size(), 1000u);
    EXPECT_NO_THROW(big.require_partition("test"));
}

TEST(GroupStructure, SingletonsRejectZeroDimension) {
    EXPECT_THROW(make_singleton_groups(0), InvalidArgument);
}

TEST(GroupStructure, EdgeGroupsChain) {
    auto gs = make_edge_groups(4, { { 0, 1 }, { 1, 2 } });
    ASSERT_EQ(gs.size(), 2u);
    EXPECT_EQ(gs.to_lists(), (std::vector<std::vector<std::size_t> >{ { 0, 1 }, { 1, 2 } }));
    EXPECT_TRUE(gs.overlapping());
}

TEST(GroupStructure, EdgeGroupsDisjoint) {
    auto gs = make_edge_groups(4, { { 0, 1 }, { 2, 3 } });
    EXPECT_FALSE(gs.overlapping());
}

TEST(GroupStructure, EdgeGroupsUndirectedDedup) {
    auto gs = make_edge_groups(3, { { 0, 1 }, { 1, 0 } });
    ASSERT_EQ(gs.size(), 1u);
    EXPECT_EQ(gs.to_lists()[0], (std::vector<std::size_t>{ 0, 1 }));
}

TEST(GroupStructure, EdgeGroupsErrorsNameTheEdge) {
    try {
        make_edge_groups(4, { { 0, 1 }, { 2, 2 } });
        FAIL() << "self-loop accepted";
    } catch (const InvalidArgument& e) {
        EXPECT_NE(std::string(e.what()).find("(2, 2)"), std::string::npos);
    }
    try {
        make_edge_groups(4, { { 0, 7 } });
        FAIL() << "out-of-range edge accepted";
    } catch (const InvalidArgument& e) {
        EXPECT_NE(std::string(e.what()).find("(0, 7)"), std::string::npos);
    }
}

TEST(GroupStructure, ValidationIsTotal) {
    EXPECT_THROW(GroupStructure(0, {}), InvalidArgument);
    EXPECT_THROW(GroupStructure(3, { {} }), InvalidArgument);
    EXPECT_THROW(GroupStructure(3, { { 0, 3 } }), InvalidArgument);
    EXPECT_THROW(GroupStructure(3, { { 1, 1 } }), InvalidArgument);
    EXPECT_THROW(GroupStructure(3, { { 0 } }, { 1.0, 2.0 }), InvalidArgument);
    EXPECT_THROW(GroupStructure(3, { { 0 } }, { -1.0 }), InvalidArgument);
    EXPECT_THROW(GroupStructure(3, { { 0 } }, { std::nan("") }), InvalidArgument);
}

TEST(GroupStructure, SortsMembersButKeepsGroupOrder) {
    GroupStructure gs(5, { { 4, 2 }, { 1, 0 } });
    EXPECT_EQ(gs.to_lists(), (std::vector<std::vector<std::size_t> >{ { 2, 4 }, { 0, 1 } }));
}

TEST(GroupStructure, PartitionRequirement) {
    GroupStructure partial(4, { { 0, 1 }, { 2 } });
    EXPECT_FALSE(partial.overlapping());
    EXPECT_FALSE(partial.covers_all());
    EXPECT_THROW(partial.require_partition("gl1"), InvalidArgument);

    GroupStructure overlap(3, { { 0, 1 }, { 1, 2 } });
    EXPECT_TRUE(overlap.overlapping());
    EXPECT_THROW(overlap.require_partition("gl0"), InvalidArgument);
}

TEST(GroupStructure, CoverageCounts) {
    GroupStructure gs(4, { { 0, 1 }, { 1, 2 }, { 1 } });
    EXPECT_EQ(coverage_counts(gs), (std::vector<std::size_t>{ 1, 3, 1, 0 }));
    EXPECT_EQ(gs.total_members(), 5u);
}

TEST(GroupStructure, WeightSchemes) {
    GroupStructure gs(5, { { 0 }, { 1, 2, 3, 4 } });
    auto u = make_default_weights(gs, WeightScheme::UNIFORM);
    EXPECT_DOUBLE_EQ(u.weight(0), 1.0);
    EXPECT_DOUBLE_EQ(u.weight(1), 1.0);
    auto s = make_default_weights(gs, WeightScheme::SQRT_SIZE);
    EXPECT_DOUBLE_EQ(s.weight(1), 2.0);
    auto inv = make_default_weights(gs, WeightScheme::INV_SQRT_SIZE);
    EXPECT_DOUBLE_EQ(inv.weight(1), 0.5);
    EXPECT_EQ(inv.to_lists(), gs.to_lists());
}

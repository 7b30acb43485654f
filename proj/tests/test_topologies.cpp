#include <gtest/gtest.h>

#include <cmath>

#include "lowint/interference.hpp"
#include "lowint/topologies.hpp"
#include "oracles.hpp"

using namespace lowint;

TEST(HubGraph, SinglePointIsEmpty) {
  const auto g = build_hub_graph(gen_uniform(1, 2, 1));
  EXPECT_EQ(g.edge_count(), 0u);
  EXPECT_TRUE(is_connected(g));
}

TEST(HubGraph, FarApartPointsAreAllHubs) {
  CoordMatrix<double> c(2, 3);
  c << 0.0, 0.9, 0.1, 0.0, 0.1, 0.95;
  const PointSet<double> ps(c);
  TopologyConfig cfg;
  cfg.hub_rule = HubRule::metric_net;
  cfg.net_radius = 0.3;
  EXPECT_EQ(select_hubs(ps, cfg).hubs, (std::vector<Index>{0, 1, 2}));
  EXPECT_EQ(build_hub_graph(ps, cfg), build_mst(ps));
}

TEST(HubGraph, MetricNetIsPackingAndCovering) {
  const auto ps = gen_uniform(2000, 2, 6);
  TopologyConfig cfg;
  cfg.hub_rule = HubRule::metric_net;
  const double r = resolved_net_radius(cfg, ps.size());
  const auto sel = select_hubs(ps, cfg);
  for (std::size_t a = 0; a < sel.hubs.size(); ++a)
    for (std::size_t b = a + 1; b < sel.hubs.size(); ++b)
      EXPECT_GT(oracle::sq(ps, sel.hubs[a], sel.hubs[b]), r * r);
  for (Index i = 0; i < ps.size(); ++i)
    EXPECT_LE(oracle::sq(ps, i, sel.nearest_hub[static_cast<std::size_t>(i)]), r * r);
}

// Ball-net invariants: every coverage ball holds a hub, nearest_hub really is
// nearest, and the ball a non-hub draws to its hub encloses at most K points.
TEST(HubGraph, BallNetInvariants) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto ps = gen_uniform(900, 2, seed);
    const Index K = resolved_hub_ball_size({}, ps.size());
    EXPECT_EQ(K, 30);
    const auto sel = select_hubs(ps, {});
    for (Index i = 0; i < ps.size(); ++i) {
      const Index h = sel.nearest_hub[static_cast<std::size_t>(i)];
      const double r2 = oracle::sq(ps, i, h);
      for (Index other : sel.hubs) EXPECT_LE(r2, oracle::sq(ps, i, other));
      EXPECT_LE(static_cast<Index>(oracle::range_scan(ps, ps.point(i), r2).size()), K) << "point " << i;
    }
  }
}

TEST(HubGraph, SpanningTreeOnRandomInputs) {
  oracle::Gen gen(44);
  for (int round = 0; round < 40; ++round) {
    const auto ps = gen.points(1 + gen.below(400), 1 + gen.below(3));
    for (HubRule rule : {HubRule::ball_net, HubRule::metric_net}) {
      TopologyConfig cfg;
      cfg.hub_rule = rule;
      const auto g = build_hub_graph(ps, cfg);
      EXPECT_TRUE(is_connected(g));
      EXPECT_EQ(g.edge_count(), static_cast<std::size_t>(ps.size() - 1));
    }
  }
}

TEST(HubGraph, BeatsMstOnHalvingChain) {
  const auto ps = gen_halving_chain<long double>(4096, 0.5L, 0.5L, 1, ChainLayout::converging);
  const auto hub = build_hub_graph(ps);
  EXPECT_TRUE(is_connected(hub));
  const auto i_hub = interference(ps, hub);
  EXPECT_LT(i_hub, 4095);
  EXPECT_LE(i_hub, 512);
  RecordProperty("hub_over_sqrt_n", std::to_string(static_cast<double>(i_hub) / 64.0));
}

TEST(Config, Defaults) {
  EXPECT_DOUBLE_EQ(default_t(1 << 16), std::exp2(std::cbrt(16.0)));
  EXPECT_EQ(resolved_hub_ball_size({}, 10), 4);
  EXPECT_EQ(resolved_hub_ball_size({}, 16), 4);
  EXPECT_DOUBLE_EQ(resolved_net_radius({}, 100), 0.1);
  TopologyConfig bad;
  bad.t = 1.0;
  EXPECT_THROW(resolved_t(bad, 10), std::invalid_argument);
}

TEST(CellPartition, SinglePoint) {
  const auto part = build_cell_partition(gen_uniform(1, 2, 1));
  EXPECT_EQ(part.nonempty_cells(), 1u);
  EXPECT_EQ(part.representatives, (std::vector<Index>{0}));
}

TEST(CellPartition, QuadrantCentres) {
  CoordMatrix<double> c(2, 4);
  c << 0.25, 0.75, 0.25, 0.75, 0.25, 0.25, 0.75, 0.75;
  TopologyConfig cfg;
  cfg.cells_per_side = 2;
  const auto part = build_cell_partition(PointSet<double>(c), cfg);
  EXPECT_EQ(part.nonempty_cells(), 4u);
  EXPECT_EQ(part.max_occupancy(), 1);
  EXPECT_EQ(part.cell_ids, (std::vector<std::uint64_t>{0, 1, 2, 3}));
}

// 5x5 cells: every point's cell box contains it, members partition the set,
// and the representative is its cell's smallest index.
TEST(CellPartition, TwentyFiveCellDecomposition) {
  oracle::Gen gen(25);
  for (int round = 0; round < 30; ++round) {
    const auto ps = gen_uniform(1 + gen.below(500), 2, gen.next());
    TopologyConfig cfg;
    cfg.cells_per_side = 5;
    const auto part = build_cell_partition(ps, cfg);
    ASSERT_LE(part.nonempty_cells(), 25u);
    std::vector<int> seen(static_cast<std::size_t>(ps.size()), 0);
    for (std::size_t c = 0; c < part.nonempty_cells(); ++c) {
      const auto ids = part.cell_members(c);
      ASSERT_FALSE(ids.empty());
      EXPECT_EQ(part.representatives[c], *std::min_element(ids.begin(), ids.end()));
      const auto cx = static_cast<double>(part.cell_ids[c] % 5), cy = static_cast<double>(part.cell_ids[c] / 5);
      for (Index i : ids) {
        ++seen[static_cast<std::size_t>(i)];
        // x * 5 may round across a cell wall, hence the 1 ulp-scale slack.
        EXPECT_GE(ps(0, i), cx / 5 - 1e-15);
        EXPECT_LE(ps(0, i), (cx + 1) / 5 + 1e-15);
        EXPECT_GE(ps(1, i), cy / 5 - 1e-15);
        EXPECT_LE(ps(1, i), (cy + 1) / 5 + 1e-15);
      }
    }
    EXPECT_TRUE(std::all_of(seen.begin(), seen.end(), [](int s) { return s == 1; }));
  }
}

TEST(CellPartition, OccupancyAtSixtyFiveThousand) {
  const Index n = 1 << 16;
  const auto part = build_cell_partition(gen_uniform(n, 2, 1));
  const double bound = 8.0 * std::pow(16.0, 2.0 / 3.0);
  EXPECT_LE(static_cast<double>(part.max_occupancy()), bound);
  RecordProperty("max_occupancy", std::to_string(part.max_occupancy()));
}

TEST(BucketedGraph, Trivial) {
  EXPECT_EQ(build_bucketed_graph(gen_uniform(1, 2, 1)).edge_count(), 0u);
  const auto ps = gen_uniform(50, 2, 4);
  TopologyConfig one;
  one.cells_per_side = 1;
  EXPECT_EQ(build_bucketed_graph(ps, one), build_hub_graph(ps));
}

TEST(BucketedGraph, ConnectedOnRandomInputs) {
  oracle::Gen gen(8);
  for (int round = 0; round < 30; ++round) {
    const auto ps = gen.points(1 + gen.below(2000), 1 + gen.below(3));
    for (HubRule rule : {HubRule::ball_net, HubRule::metric_net}) {
      TopologyConfig cfg;
      cfg.hub_rule = rule;
      EXPECT_TRUE(is_connected(build_bucketed_graph(ps, cfg))) << "round " << round;
    }
  }
}

#include <gtest/gtest.h>

#include "lowint/interference.hpp"
#include "lowint/topologies.hpp"
#include "oracles.hpp"

using namespace lowint;

namespace {

PointSet<double> unit_line(Index n) {
  CoordMatrix<double> c(1, n);
  for (Index i = 0; i < n; ++i) c(0, i) = static_cast<double>(i);
  return PointSet<double>(c);
}

std::vector<Edge> path_edges(Index n) {
  std::vector<Edge> e;
  for (Index i = 0; i + 1 < n; ++i) e.push_back({i, i + 1});
  return e;
}

}  // namespace

TEST(BallSet, RadiiAreLongestIncidentEdge) {
  CoordMatrix<double> c(1, 3);
  c << 0, 1, 3;
  const PointSet<double> ps(c);
  const auto bs = ball_set(ps, GeometricGraph(3, {{0, 1}, {1, 2}}));
  EXPECT_EQ(bs.radius(0), 1.0);
  EXPECT_EQ(bs.radius(1), 2.0);
  EXPECT_EQ(bs.radius(2), 2.0);

  const auto two = ball_set(unit_line(2), GeometricGraph(2, {{0, 1}}));
  EXPECT_EQ(two.radius(0), 1.0);
  EXPECT_EQ(two.radius(1), 1.0);
}

TEST(BallSet, MstRadiiMatchPerVertexScan) {
  const auto ps = gen_uniform(100, 2, 3);
  const auto mst = build_mst(ps);
  const auto bs = ball_set(ps, mst);
  const auto adj = mst.adjacency();
  for (Index v = 0; v < 100; ++v) {
    double r2 = 0;
    for (Index u : adj[static_cast<std::size_t>(v)]) r2 = std::max(r2, oracle::sq(ps, u, v));
    EXPECT_EQ(bs.sq_radius[static_cast<std::size_t>(v)], r2);
  }
}

TEST(InterferenceAt, SmallCases) {
  const auto two = unit_line(2);
  const auto bs2 = ball_set(two, GeometricGraph(2, {{0, 1}}));
  EXPECT_EQ(interference_at(two, bs2, two.point(0)), 2);
  EXPECT_EQ(interference_at(two, bs2, two.point(1)), 2);
  EXPECT_EQ(interference_at(two, bs2, Eigen::Matrix<double, 1, 1>(50.0)), 0);

  const auto three = unit_line(3);
  const auto bs3 = ball_set(three, GeometricGraph(3, path_edges(3)));
  EXPECT_EQ(interference_at(three, bs3, three.point(1)), 3);
  EXPECT_EQ(interference_at(three, bs3, three.point(0)), 2);
}

TEST(InterferenceReport, EmptyGraphIsAllZero) {
  const auto ps = gen_uniform(20, 2, 1);
  const auto r = interference_report(ps, GeometricGraph(20));
  EXPECT_EQ(r.max_value, 0);
  EXPECT_TRUE(std::all_of(r.per_vertex.begin(), r.per_vertex.end(), [](auto v) { return v == 0; }));
  EXPECT_EQ(interference_report_accelerated(ps, GeometricGraph(20)), r);
}

// Twelve unit-spaced vertices on a line: the path plus two chords {0,4} and
// {7,11}. Labels were counted by hand ball by ball.
TEST(InterferenceReport, HandLabelledTwelveVertexGraph) {
  auto edges = path_edges(12);
  edges.push_back({0, 4});
  edges.push_back({7, 11});
  const auto ps = unit_line(12);
  const GeometricGraph g(12, edges);
  const std::vector<std::int64_t> labels{3, 4, 5, 5, 5, 4, 4, 5, 5, 5, 4, 3};
  const auto r = interference_report(ps, g);
  EXPECT_EQ(r.per_vertex, labels);
  EXPECT_EQ(r.max_value, 5);
  EXPECT_EQ(r.argmax, 2);
  EXPECT_EQ(oracle::interference(ps, edges), labels);
  EXPECT_EQ(interference_report_accelerated(ps, g), r);
}

TEST(InterferenceReport, HalvingChainTenPeaksAtLastVertex) {
  const auto ps = gen_halving_chain<double>(10);
  const auto r = interference_report(ps, build_mst(ps));
  EXPECT_EQ(r.max_value, 9);
  EXPECT_EQ(r.per_vertex.back(), 9);
  EXPECT_EQ(oracle::max_interference(ps, build_mst(ps)), 9);
}

TEST(InterferenceReport, ZenoEightAtLeastSeven) {
  ZenoConfig<double> cfg{8, 0.25 / 6561.0, Eigen::Vector2d(0.5, 0.5), {}};
  const auto ps = gen_zeno(cfg, 2);
  EXPECT_GE(interference(ps, build_mst(ps)), 7);
}

TEST(InterferenceReport, AcceleratedMatchesOracleOnRandomGraphs) {
  oracle::Gen gen(2024);
  for (int round = 0; round < 60; ++round) {
    const Index n = 2 + gen.below(200);
    const auto ps = gen.points(n, 1 + gen.below(3));
    std::vector<Edge> edges;
    const Index m = gen.below(2 * n);
    for (Index e = 0; e < m; ++e) {
      const Index a = gen.below(n), b = gen.below(n);
      if (a != b) edges.push_back({std::min(a, b), std::max(a, b)});
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    const GeometricGraph g(n, edges);
    const auto want = oracle::interference(ps, edges);
    ASSERT_EQ(interference_report_accelerated(ps, g).per_vertex, want) << "round " << round;
    ASSERT_EQ(interference_report(ps, g).per_vertex, want);
  }
}

TEST(InterferenceReport, LargeMstSpotCheck) {
  const auto ps = gen_uniform(1 << 16, 2, 5);
  const auto mst = build_mst(ps);
  const auto r = interference_report_accelerated(ps, mst);
  const auto bs = ball_set(ps, mst);
  oracle::Gen gen(1);
  for (int s = 0; s < 100; ++s) {
    const Index v = gen.below(ps.size());
    std::int64_t count = 0;
    for (Index u = 0; u < ps.size(); ++u)
      if (bs.is_active(u) && oracle::sq(ps, u, v) <= bs.sq_radius[static_cast<std::size_t>(u)]) ++count;
    EXPECT_EQ(r.per_vertex[static_cast<std::size_t>(v)], count);
  }
}

TEST(LogDBound, TwoPoints) {
  const auto r = log_d_bound_check(unit_line(2));
  EXPECT_EQ(r.mst_interference, 2);
  EXPECT_EQ(r.distance_ratio, 1.0);
  EXPECT_GE(r.bound, 2.0L);
  EXPECT_TRUE(r.ok);
}

TEST(LogDBound, HalvingChainTwenty) {
  const auto r = log_d_bound_check(gen_halving_chain<double>(20));
  EXPECT_EQ(r.mst_interference, 19);
  EXPECT_TRUE(r.ok);
}

TEST(LogDBound, UniformSixteenThousand) {
  const auto r = log_d_bound_check(gen_uniform(1 << 14, 2, 1));
  EXPECT_TRUE(r.ok);
  EXPECT_LT(static_cast<long double>(r.mst_interference), r.bound / 100);
}

// Three points: the middle vertex sits on the boundary of both end balls.
// From four points on, only the accumulation end is covered by every ball
// but the first.
TEST(InterferenceReport, HalvingChainValuesFromOracle) {
  const auto three = gen_halving_chain<long double>(3, 0.5L, 0.5L, 1, ChainLayout::converging);
  EXPECT_EQ(oracle::max_interference(three, build_mst(three)), 3);
  EXPECT_EQ(interference(three, build_mst(three)), 3);
  for (Index n = 4; n <= 64; ++n) {
    const auto ps = gen_halving_chain<long double>(n, 0.5L, 0.5L, 1, ChainLayout::converging);
    const auto mst = build_mst(ps);
    EXPECT_EQ(oracle::max_interference(ps, mst), n - 1);
    EXPECT_EQ(interference(ps, mst), n - 1) << "n=" << n;
  }
}

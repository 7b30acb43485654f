#include <gtest/gtest.h>

#include <cmath>

#include "lowint/geometry.hpp"
#include "lowint/graphs.hpp"
#include "lowint/interference.hpp"
#include "lowint/rng.hpp"

using namespace lowint;

TEST(PointSet, RejectsEmptyAndNonFinite) {
  EXPECT_THROW(PointSet<double>(CoordMatrix<double>(2, 0)), std::invalid_argument);
  EXPECT_THROW(PointSet<double>(CoordMatrix<double>(0, 3)), std::invalid_argument);
  CoordMatrix<double> c = CoordMatrix<double>::Zero(2, 2);
  c(1, 1) = std::nan("");
  EXPECT_THROW(PointSet<double>{c}, std::invalid_argument);
}

TEST(PointSet, SubsetKeepsOrder) {
  const auto ps = gen_uniform(10, 3, 5);
  const auto sub = ps.subset({7, 2});
  ASSERT_EQ(sub.size(), 2);
  EXPECT_EQ(sub.point(0), ps.point(7));
  EXPECT_EQ(sub.point(1), ps.point(2));
}

TEST(SquaredDistance, IsSymmetricBitForBit) {
  const auto ps = gen_uniform(50, 3, 11);
  for (Index i = 0; i < 50; ++i)
    for (Index j = 0; j < 50; ++j) EXPECT_EQ(squared_distance(ps, i, j), squared_distance(ps, j, i));
}

TEST(Rng, DerivedSeedsDiffer) {
  EXPECT_NE(derive_seed(1, 1024, 0), derive_seed(1, 1024, 1));
  EXPECT_NE(derive_seed(1, 1024, 0), derive_seed(1, 2048, 0));
  EXPECT_EQ(derive_seed(9, 16, 3), derive_seed(9, 16, 3));
}

TEST(GenUniform, SinglePointInUnitSquare) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto ps = gen_uniform(1, 2, s);
    EXPECT_GE(ps(0, 0), 0.0);
    EXPECT_LT(ps(0, 0), 1.0);
    EXPECT_GE(ps(1, 0), 0.0);
    EXPECT_LT(ps(1, 0), 1.0);
  }
}

TEST(GenUniform, SameSeedSamePoints) {
  EXPECT_EQ(gen_uniform(1000, 2, 42), gen_uniform(1000, 2, 42));
  EXPECT_FALSE(gen_uniform(1000, 2, 42) == gen_uniform(1000, 2, 43));
}

// Cell counts of a 10x10 grid: mean 10 exactly, and chi-square with 99
// degrees of freedom below its 0.999 quantile (148.2).
TEST(GenUniform, GridCountsPassChiSquare) {
  const auto ps = gen_uniform(1000, 2, 42);
  std::array<int, 100> counts{};
  for (Index i = 0; i < ps.size(); ++i) {
    const int cx = static_cast<int>(ps(0, i) * 10), cy = static_cast<int>(ps(1, i) * 10);
    ++counts[static_cast<std::size_t>(cy * 10 + cx)];
  }
  double chi2 = 0, total = 0;
  for (int c : counts) {
    total += c;
    chi2 += (c - 10.0) * (c - 10.0) / 10.0;
  }
  EXPECT_DOUBLE_EQ(total / 100.0, 10.0);
  EXPECT_LT(chi2, 148.2);
}

TEST(HalvingChain, FirstThreePoints) {
  const auto ps = gen_halving_chain<double>(3);
  EXPECT_EQ(ps(0, 0), 0.0);
  EXPECT_EQ(ps(0, 1), 0.5);
  EXPECT_EQ(ps(0, 2), 0.75);
}

TEST(HalvingChain, TwoPointsAtDistanceG0) {
  const auto ps = gen_halving_chain<double>(2, 0.5, 0.3);
  EXPECT_EQ(std::sqrt(squared_distance(ps, 0, 1)), 0.3);
}

TEST(HalvingChain, ConvergingLayoutHasExactGaps) {
  const auto ps = gen_halving_chain<double>(40, 0.5, 0.5, 1, ChainLayout::converging);
  for (Index i = 1; i + 1 < ps.size(); ++i)
    EXPECT_EQ(ps(0, i - 1) - ps(0, i), 2 * (ps(0, i) - ps(0, i + 1)));
}

TEST(HalvingChain, RejectsBadRatioAndUnrepresentableLength) {
  EXPECT_THROW(gen_halving_chain<double>(5, 0.6), std::invalid_argument);
  EXPECT_THROW(gen_halving_chain<double>(5, 0.0), std::invalid_argument);
  EXPECT_THROW(gen_halving_chain<double>(1), std::invalid_argument);
  EXPECT_THROW(gen_halving_chain<double>(60), std::domain_error);
  EXPECT_THROW(gen_halving_chain<double>(4096, 0.5, 0.5, 1, ChainLayout::converging), std::domain_error);
  EXPECT_NO_THROW(gen_halving_chain<long double>(4096, 0.5L, 0.5L, 1, ChainLayout::converging));
}

TEST(HalvingChain, EmbedsInHigherDimension) {
  const auto ps = gen_halving_chain<double>(6, 0.5, 0.5, 3);
  EXPECT_EQ(ps.dim(), 3);
  EXPECT_TRUE(ps.coords().bottomRows(2).isZero());
}

TEST(Zeno, TwoBallsAtScaledOffset) {
  ZenoConfig<double> cfg;
  cfg.k = 2;
  cfg.u = 0.01;
  cfg.center = Eigen::Vector2d(0.5, 0.5);
  const auto ps = gen_zeno(cfg, 2);
  EXPECT_EQ(ps.point(0), Eigen::Vector2d(0.5, 0.5));
  EXPECT_NEAR(ps(0, 1), 0.53, 1e-15);
  EXPECT_EQ(ps(1, 1), 0.5);
}

TEST(Zeno, NearestNeighbourIsPredecessor) {
  ZenoConfig<double> cfg{5, 0.25 / 243.0, Eigen::Vector2d(0.5, 0.5), {}};
  for (std::optional<std::uint64_t> seed : {std::optional<std::uint64_t>{}, std::optional<std::uint64_t>{3}}) {
    const auto ps = gen_zeno(cfg, 2, seed);
    for (Index i = 1; i < 5; ++i) {
      Index best = -1;
      for (Index j = 0; j < 5; ++j)
        if (j != i && (best < 0 || squared_distance(ps, i, j) < squared_distance(ps, i, best))) best = j;
      EXPECT_EQ(best, i - 1) << "point " << i;
    }
  }
}

TEST(Zeno, SampledPointsStayInTheirBalls) {
  ZenoConfig<double> cfg{6, 0.25 / 729.0, Eigen::Vector3d(0.5, 0.5, 0.5), {}};
  const auto ps = gen_zeno(cfg, 3, std::uint64_t{17});
  for (Index i = 0; i < 6; ++i) EXPECT_LE(squared_distance(ps.point(i), zeno_ball_center(cfg, 3, i)), cfg.u * cfg.u);
}

TEST(Zeno, OuterBallMustFitUnlessAllowed) {
  ZenoConfig<double> cfg{4, 0.01, Eigen::Vector2d(0.01, 0.5), {}};
  EXPECT_THROW(gen_zeno(cfg, 2), std::invalid_argument);
  EXPECT_NO_THROW(gen_zeno(cfg, 2, std::nullopt, false));
}

TEST(Zeno, AmbientScaleGivesOuterBallArea) {
  const double u = zeno_scale_for_ambient<double>(1 << 16, 7);
  const double r = u * std::pow(3.0, 7);
  EXPECT_NEAR(std::numbers::pi * r * r, 1.0 / 65536.0, 1e-18);
}

TEST(BoundingBox, CoversAllPoints) {
  const auto ps = gen_uniform(200, 3, 8);
  const auto [lo, hi] = bounding_box(ps);
  for (Index i = 0; i < ps.size(); ++i) {
    EXPECT_TRUE((ps.point(i).array() >= lo.array()).all());
    EXPECT_TRUE((ps.point(i).array() <= hi.array()).all());
  }
}

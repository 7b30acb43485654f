#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "lowint/experiments.hpp"
#include "lowint/interference.hpp"
#include "lowint/rng.hpp"
#include "oracles.hpp"

using namespace lowint;
using namespace lowint::experiments;

namespace {

ExperimentResult synthetic(const std::vector<Index>& sizes, int trials, auto value) {
  ExperimentResult res;
  res.spec.sizes = sizes;
  for (Index n : sizes)
    for (int t = 0; t < trials; ++t) {
      ExperimentRow r;
      r.n = n;
      r.trial = t;
      r.interference = value(n, t);
      res.rows.push_back(r);
    }
  return res;
}

std::string csv_of(const ExperimentResult& res) {
  std::ostringstream s;
  write_csv(s, res);
  return s.str();
}

}  // namespace

TEST(RunScaling, SingleTinyRow) {
  ExperimentSpec spec;
  spec.sizes = {16};
  const auto res = run_scaling(spec);
  ASSERT_EQ(res.rows.size(), 1u);
  ASSERT_TRUE(res.rows[0].interference.has_value());
  EXPECT_GE(*res.rows[0].interference, 1);
  EXPECT_EQ(res.rows[0].edges, 15u);
  EXPECT_TRUE(res.rows[0].connected);
}

TEST(RunScaling, RowsReproduceIndependently) {
  ExperimentSpec spec;
  spec.sizes = {100, 300};
  spec.trials = 2;
  spec.topologies = {Topology::mst, Topology::hub, Topology::bucketed, Topology::nn};
  const auto res = run_scaling(spec);
  ASSERT_EQ(res.rows.size(), 16u);
  for (const auto& r : res.rows) {
    ASSERT_TRUE(r.error.empty()) << r.error;
    EXPECT_EQ(r.seed, derive_seed(spec.master_seed, static_cast<std::uint64_t>(r.n), static_cast<std::uint64_t>(r.trial)));
    const auto ps = gen_uniform(r.n, 2, r.seed);
    GeometricGraph g(r.n);
    switch (r.topology) {
      case Topology::mst: g = build_mst(ps); break;
      case Topology::hub: g = build_hub_graph(ps); break;
      case Topology::bucketed: g = build_bucketed_graph(ps); break;
      case Topology::nn: g = build_nn_graph(ps); break;
    }
    EXPECT_EQ(*r.interference, oracle::max_interference(ps, g));
  }
}

TEST(RunScaling, SameSpecSameTable) {
  auto spec = preset("smoke");
  spec.sizes = {256, 512};
  const auto a = run_scaling(spec);
  spec.threads = 3;
  const auto b = run_scaling(spec);
  EXPECT_EQ(csv_of(a), csv_of(b));
}

TEST(RunScaling, ValidationRejectsBadSpecs) {
  ExperimentSpec spec;
  EXPECT_THROW(spec.validate(), std::invalid_argument);
  spec.sizes = {10, 10};
  EXPECT_THROW(spec.validate(), std::invalid_argument);
  spec.sizes = {10};
  spec.trials = 0;
  EXPECT_THROW(spec.validate(), std::invalid_argument);
  EXPECT_THROW(preset("nope"), std::invalid_argument);
  EXPECT_THROW(parse_topology("tree"), std::invalid_argument);
}

TEST(WriteCsv, HeaderAndEmptyTiming) {
  ExperimentSpec spec;
  spec.sizes = {8};
  const auto csv = csv_of(run_scaling(spec));
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "n,d,trial,seed,topology,interference,wall_ms,D,max_cell,edges");
  EXPECT_NE(csv.find(",mst,"), std::string::npos);
  const auto row = csv.substr(csv.find('\n') + 1);
  EXPECT_NE(row.find(",,"), std::string::npos);  // wall_ms left empty
}

TEST(Summarize, SingleRowAndMedianOfTwo) {
  const auto one = summarize(synthetic({64}, 1, [](Index, int) { return 6; }));
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0].min, 6);
  EXPECT_EQ(one[0].median, 6);
  EXPECT_EQ(one[0].mean, 6);
  EXPECT_EQ(one[0].max, 6);
  EXPECT_EQ(one[0].stddev, 0);

  const auto two = summarize(synthetic({64}, 2, [](Index, int t) { return t == 0 ? 3 : 5; }));
  EXPECT_EQ(two[0].median, 4);
  EXPECT_DOUBLE_EQ(two[0].stddev, std::sqrt(2.0));
}

TEST(FitPowerOfLog, PlantedSquareRoot) {
  const std::vector<Index> sizes{1 << 10, 1 << 12, 1 << 14, 1 << 16, 1 << 18};
  const auto res = synthetic(sizes, 5, [](Index n, int) {
    return static_cast<std::int64_t>(std::lround(3 * std::sqrt(std::log2(static_cast<double>(n)))));
  });
  const auto fit = fit_power_of_log(res, Topology::mst);
  EXPECT_GE(fit.exponent, 0.35);
  EXPECT_LE(fit.exponent, 0.65);
  EXPECT_EQ(fit.sizes, 5u);
}

TEST(FitPowerOfLog, ConstantHasZeroExponent) {
  const auto res = synthetic({1 << 8, 1 << 10, 1 << 12, 1 << 14}, 3, [](Index, int) { return 4; });
  const auto fit = fit_power_of_log(res, Topology::mst);
  EXPECT_GE(fit.exponent, -0.1);
  EXPECT_LE(fit.exponent, 0.1);
}

TEST(FitPowerOfLog, NeedsFourSizes) {
  EXPECT_THROW(fit_power_of_log(synthetic({16, 32, 64}, 1, [](Index, int) { return 2; }), Topology::mst),
               std::invalid_argument);
}

TEST(Adversarial, ZenoThreeAndChainSixtyFour) {
  const auto z = run_adversarial(AdversarialKind::zeno, 3);
  EXPECT_GE(z[0].interference, 2);
  const auto c = run_adversarial(AdversarialKind::chain, 64);
  EXPECT_EQ(c[0].interference, 63);
  EXPECT_LT(c[1].interference, 63);
}

TEST(Adversarial, EmbeddedZenoIsAloneInItsBall) {
  AdversarialOptions opts;
  opts.embed_n = 1 << 12;
  const auto ps = zeno_instance(6, opts);
  const Index k0 = ps.size() - 6;
  const double u = zeno_scale_for_ambient<double>(1 << 12, 6);
  const double outer = u * std::pow(3.0, 6);
  Eigen::Vector2d center(0.5, 0.5);
  for (Index i = 0; i < k0; ++i) EXPECT_GT(squared_distance(ps.point(i), center), outer * outer);
  EXPECT_GE(interference(ps, build_mst(ps)), 5);
}

TEST(SummaryJson, HasFitsForFourSizes) {
  auto spec = preset("smoke");
  spec.trials = 1;
  spec.topologies = {Topology::mst};
  const auto j = summary_json(run_scaling(spec));
  EXPECT_TRUE(j["fits"].contains("mst"));
  EXPECT_EQ(j["summary"].size(), 4u);
  EXPECT_TRUE(j["failures"].empty());
}

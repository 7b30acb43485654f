#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "lowint/geometry.hpp"
#include "lowint/topologies.hpp"

namespace lowint::experiments {

enum class Topology { mst, hub, bucketed, nn };

std::string_view to_string(Topology t);
Topology parse_topology(std::string_view name);

struct ExperimentSpec {
  std::vector<Index> sizes;
  Index d = 2;
  int trials = 1;
  std::uint64_t master_seed = 1;
  std::vector<Topology> topologies{Topology::mst};
  TopologyConfig overrides;
  unsigned threads = 1;

  void validate() const;
};

/// Named experiment bundles. "paper-thm1" is the scaling campaign the
/// acceptance suite checks; "smoke" is a seconds-long version of it.
ExperimentSpec preset(std::string_view name);

struct ExperimentRow {
  Index n = 0;
  Index d = 0;
  int trial = 0;
  std::uint64_t seed = 0;
  Topology topology = Topology::mst;
  std::optional<std::int64_t> interference;  // empty if the row failed
  double wall_ms = 0.0;
  double distance_ratio = 0.0;  // NaN when undefined (coincident points)
  Index max_cell = 0;
  std::size_t edges = 0;
  bool connected = false;
  std::string error;
};

struct ExperimentResult {
  ExperimentSpec spec;
  std::vector<ExperimentRow> rows;  // ordered by (size, trial, topology as listed in spec)
};

/// Uniform points for every (size, trial) with seed derive_seed(master, n,
/// trial), every requested topology built and measured. The table does not
/// depend on spec.threads. A failing row records its error and the run
/// continues.
ExperimentResult run_scaling(const ExperimentSpec& spec);

/// CSV with header n,d,trial,seed,topology,interference,wall_ms,D,max_cell,edges.
/// wall_ms is left empty unless include_timing, so that reruns produce
/// byte-identical files.
void write_csv(std::ostream& out, const ExperimentResult& res, bool include_timing = false);

struct SummaryRow {
  Index n = 0;
  Topology topology = Topology::mst;
  std::size_t count = 0;
  double min = 0, median = 0, mean = 0, max = 0, stddev = 0;  // sample stddev, 0 for one row
};

/// Statistics of I per (topology, n), sorted by topology then n.
std::vector<SummaryRow> summarize(const ExperimentResult& res);

struct PowerFit {
  double exponent = 0;   // beta in median I ~ a (log2 n)^beta
  double log_coeff = 0;  // log a
  double r2 = 0;
  std::size_t sizes = 0;
};

/// Least-squares line through (log log2 n, log median I), one point per size.
/// Needs at least four distinct sizes.
PowerFit fit_power_of_log(const ExperimentResult& res, Topology topology);

nlohmann::json summary_json(const ExperimentResult& res);

// --- adversarial inputs ------------------------------------------------------

enum class AdversarialKind { zeno, chain };

struct AdversarialOptions {
  Index d = 2;                      // zeno only; chains are 1-D
  std::optional<Index> embed_n;     // zeno: embed among this many uniform points
  std::uint64_t seed = 1;           // for the embedding sample
};

struct AdversarialRow {
  AdversarialKind kind = AdversarialKind::zeno;
  Index param = 0;  // k for zeno, n for chain
  Index n = 0;      // points in the instance
  Topology topology = Topology::mst;
  std::int64_t interference = 0;
  std::int64_t mst_lower_bound = 0;      // k-1 or n-1, certified for the MST
  double graph_lower_bound = 0;          // sqrt(k-1): lower bound for every connected graph (zeno)
};

/// Builds the adversarial instance, measures mst and hub, and throws
/// std::logic_error if I(MST) is below its certified lower bound.
std::vector<AdversarialRow> run_adversarial(AdversarialKind kind, Index param, const AdversarialOptions& opts = {});

/// The instance run_adversarial measures. Chains are realised in long
/// double, converging layout, so thousands of halvings stay representable.
PointSet<double> zeno_instance(Index k, const AdversarialOptions& opts);
PointSet<long double> chain_instance(Index n);

}  // namespace lowint::experiments

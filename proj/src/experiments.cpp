#include "lowint/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <map>
#include <stdexcept>
#include <thread>

#include <Eigen/Dense>

#include "lowint/graphs.hpp"
#include "lowint/interference.hpp"
#include "lowint/rng.hpp"

namespace lowint::experiments {

std::string_view to_string(Topology t) {
  switch (t) {
    case Topology::mst: return "mst";
    case Topology::hub: return "hub";
    case Topology::bucketed: return "bucketed";
    case Topology::nn: return "nn";
  }
  return "?";
}

Topology parse_topology(std::string_view name) {
  for (auto t : {Topology::mst, Topology::hub, Topology::bucketed, Topology::nn})
    if (to_string(t) == name) return t;
  throw std::invalid_argument("unknown topology '" + std::string(name) + "'");
}

void ExperimentSpec::validate() const {
  if (sizes.empty()) throw std::invalid_argument("experiment: no sizes given");
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (sizes[i] < 1) throw std::invalid_argument("experiment: sizes must be >= 1");
    if (i > 0 && sizes[i] <= sizes[i - 1]) throw std::invalid_argument("experiment: sizes must be strictly increasing");
  }
  if (d < 1) throw std::invalid_argument("experiment: d must be >= 1");
  if (trials < 1) throw std::invalid_argument("experiment: trials must be >= 1");
  if (topologies.empty()) throw std::invalid_argument("experiment: no topologies given");
  if (threads < 1) throw std::invalid_argument("experiment: threads must be >= 1");
}

ExperimentSpec preset(std::string_view name) {
  ExperimentSpec s;
  if (name == "paper-thm1") {
    s.sizes = {1 << 10, 1 << 12, 1 << 14, 1 << 16, 1 << 18};
    s.d = 2;
    s.trials = 30;
    s.master_seed = 20120205;
    s.topologies = {Topology::mst, Topology::bucketed};
  } else if (name == "smoke") {
    s.sizes = {1 << 8, 1 << 9, 1 << 10, 1 << 11};
    s.d = 2;
    s.trials = 3;
    s.master_seed = 7;
    s.topologies = {Topology::mst, Topology::hub, Topology::bucketed, Topology::nn};
  } else {
    throw std::invalid_argument("unknown preset '" + std::string(name) + "'");
  }
  return s;
}

namespace {

GeometricGraph build_topology(const PointSet<double>& ps, Topology t, const TopologyConfig& cfg) {
  switch (t) {
    case Topology::mst: return build_mst(ps);
    case Topology::hub: return build_hub_graph(ps, cfg);
    case Topology::bucketed: return build_bucketed_graph(ps, cfg);
    case Topology::nn: return ps.size() < 2 ? GeometricGraph(ps.size()) : build_nn_graph(ps);
  }
  throw std::logic_error("unhandled topology");
}

std::vector<ExperimentRow> run_trial(const ExperimentSpec& spec, Index n, int trial) {
  const std::uint64_t seed = derive_seed(spec.master_seed, static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(trial));
  ExperimentRow base;
  base.n = n;
  base.d = spec.d;
  base.trial = trial;
  base.seed = seed;

  std::vector<ExperimentRow> rows;
  std::optional<PointSet<double>> ps;
  try {
    ps.emplace(gen_uniform(n, spec.d, seed));
    base.distance_ratio = std::numeric_limits<double>::quiet_NaN();
    if (n >= 2) {
      try {
        base.distance_ratio = distance_ratio(*ps);
      } catch (const std::domain_error&) {
      }
    }
    base.max_cell = build_cell_partition(*ps, spec.overrides).max_occupancy();
  } catch (const std::exception& e) {
    for (auto t : spec.topologies) {
      ExperimentRow r = base;
      r.topology = t;
      r.error = e.what();
      rows.push_back(std::move(r));
    }
    return rows;
  }

  for (auto t : spec.topologies) {
    ExperimentRow r = base;
    r.topology = t;
    try {
      const auto start = std::chrono::steady_clock::now();
      const auto g = build_topology(*ps, t, spec.overrides);
      r.edges = g.edge_count();
      r.connected = is_connected(g);
      if (t != Topology::nn && !r.connected) throw std::runtime_error(std::string(to_string(t)) + " graph is not connected");
      const auto value = interference(*ps, g);
      r.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
      if (n >= 2 && (value < 1 || value > n)) throw std::runtime_error("interference outside [1, n]");
      r.interference = value;
    } catch (const std::exception& e) {
      r.error = e.what();
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

std::string format_double(double v) {
  if (std::isnan(v)) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

ExperimentResult run_scaling(const ExperimentSpec& spec) {
  spec.validate();
  const std::size_t tasks = spec.sizes.size() * static_cast<std::size_t>(spec.trials);
  std::vector<std::vector<ExperimentRow>> slots(tasks);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t task; (task = next.fetch_add(1)) < tasks;) {
      const Index n = spec.sizes[task / static_cast<std::size_t>(spec.trials)];
      const int trial = static_cast<int>(task % static_cast<std::size_t>(spec.trials));
      slots[task] = run_trial(spec, n, trial);
    }
  };
  const unsigned workers = std::min<unsigned>(spec.threads, static_cast<unsigned>(tasks));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  }

  ExperimentResult res{spec, {}};
  for (auto& s : slots)
    for (auto& r : s) res.rows.push_back(std::move(r));
  return res;
}

void write_csv(std::ostream& out, const ExperimentResult& res, bool include_timing) {
  out << "n,d,trial,seed,topology,interference,wall_ms,D,max_cell,edges\n";
  for (const auto& r : res.rows) {
    out << r.n << ',' << r.d << ',' << r.trial << ',' << r.seed << ',' << to_string(r.topology) << ',';
    if (r.interference) out << *r.interference;
    out << ',';
    if (include_timing) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.3f", r.wall_ms);
      out << buf;
    }
    out << ',' << format_double(r.distance_ratio) << ',' << r.max_cell << ',' << r.edges << '\n';
  }
}

std::vector<SummaryRow> summarize(const ExperimentResult& res) {
  std::map<std::pair<Topology, Index>, std::vector<double>> groups;
  for (const auto& r : res.rows)
    if (r.interference) groups[{r.topology, r.n}].push_back(static_cast<double>(*r.interference));
  if (groups.empty()) throw std::invalid_argument("summarize: no successful rows");

  std::vector<SummaryRow> out;
  for (const auto& [key, vals] : groups) {
    SummaryRow s;
    s.topology = key.first;
    s.n = key.second;
    s.count = vals.size();
    s.min = *std::min_element(vals.begin(), vals.end());
    s.max = *std::max_element(vals.begin(), vals.end());
    double sum = 0;
    for (double v : vals) sum += v;
    s.mean = sum / static_cast<double>(vals.size());
    double ss = 0;
    for (double v : vals) ss += (v - s.mean) * (v - s.mean);
    s.stddev = vals.size() > 1 ? std::sqrt(ss / static_cast<double>(vals.size() - 1)) : 0.0;
    s.median = median_of(vals);
    out.push_back(s);
  }
  return out;
}

PowerFit fit_power_of_log(const ExperimentResult& res, Topology topology) {
  std::map<Index, std::vector<double>> by_size;
  for (const auto& r : res.rows)
    if (r.topology == topology && r.interference && r.n >= 2)
      by_size[r.n].push_back(static_cast<double>(*r.interference));
  if (by_size.size() < 4) throw std::invalid_argument("fit_power_of_log: need at least four distinct sizes");

  const auto m = static_cast<Index>(by_size.size());
  Eigen::MatrixXd design(m, 2);
  Eigen::VectorXd y(m);
  Index row = 0;
  for (const auto& [n, vals] : by_size) {
    const double med = median_of(vals);
    if (!(med > 0)) throw std::invalid_argument("fit_power_of_log: median interference must be positive");
    design(row, 0) = 1.0;
    design(row, 1) = std::log(std::log2(static_cast<double>(n)));
    y(row) = std::log(med);
    ++row;
  }
  const Eigen::Vector2d beta = design.colPivHouseholderQr().solve(y);
  const Eigen::VectorXd resid = y - design * beta;
  const double ss_res = resid.squaredNorm();
  const double ss_tot = (y.array() - y.mean()).square().sum();

  PowerFit fit;
  fit.log_coeff = beta(0);
  fit.exponent = beta(1);
  fit.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  fit.sizes = by_size.size();
  return fit;
}

nlohmann::json summary_json(const ExperimentResult& res) {
  nlohmann::json j;
  const auto& s = res.spec;
  j["spec"] = {{"sizes", s.sizes}, {"d", s.d}, {"trials", s.trials}, {"master_seed", s.master_seed}};
  for (auto t : s.topologies) j["spec"]["topologies"].push_back(to_string(t));

  j["summary"] = nlohmann::json::array();
  bool any_ok = std::any_of(res.rows.begin(), res.rows.end(), [](const auto& r) { return r.interference.has_value(); });
  if (any_ok)
    for (const auto& r : summarize(res))
      j["summary"].push_back({{"n", r.n}, {"topology", to_string(r.topology)}, {"count", r.count}, {"min", r.min},
                              {"median", r.median}, {"mean", r.mean}, {"max", r.max}, {"stddev", r.stddev}});

  j["fits"] = nlohmann::json::object();
  for (auto t : s.topologies) {
    try {
      const auto f = fit_power_of_log(res, t);
      j["fits"][std::string(to_string(t))] = {{"exponent", f.exponent}, {"r2", f.r2}, {"sizes", f.sizes}};
    } catch (const std::invalid_argument&) {
    }
  }

  j["failures"] = nlohmann::json::array();
  for (const auto& r : res.rows)
    if (!r.error.empty())
      j["failures"].push_back({{"n", r.n}, {"trial", r.trial}, {"topology", to_string(r.topology)}, {"error", r.error}});
  return j;
}

// --- adversarial -------------------------------------------------------------

PointSet<double> zeno_instance(Index k, const AdversarialOptions& opts) {
  ZenoConfig<double> cfg;
  cfg.k = k;
  cfg.center = Point<double>::Constant(opts.d, 0.5);
  if (!opts.embed_n) {
    cfg.u = 0.25 / std::pow(3.0, static_cast<double>(k));
    return gen_zeno(cfg, opts.d);
  }
  const Index n = *opts.embed_n;
  cfg.u = zeno_scale_for_ambient<double>(n, k);
  const auto config = gen_zeno(cfg, opts.d);
  const auto ambient = gen_uniform(n, opts.d, opts.seed);
  const double r2 = cfg.outer_radius() * cfg.outer_radius();

  // The configuration must be alone inside its outer ball.
  std::vector<Index> outside;
  for (Index i = 0; i < ambient.size(); ++i)
    if (squared_distance(ambient.point(i), cfg.center) > r2) outside.push_back(i);
  CoordMatrix<double> c(opts.d, static_cast<Index>(outside.size()) + k);
  for (std::size_t i = 0; i < outside.size(); ++i) c.col(static_cast<Index>(i)) = ambient.point(outside[i]);
  c.rightCols(k) = config.coords();
  return PointSet<double>(std::move(c));
}

PointSet<long double> chain_instance(Index n) {
  return gen_halving_chain<long double>(n, 0.5L, 0.5L, 1, ChainLayout::converging);
}

namespace {

template <typename Scalar>
std::vector<AdversarialRow> measure_adversarial(const PointSet<Scalar>& ps, AdversarialKind kind, Index param,
                                                std::int64_t mst_bound, double graph_bound) {
  std::vector<AdversarialRow> rows;
  for (auto t : {Topology::mst, Topology::hub}) {
    const auto g = t == Topology::mst ? build_mst(ps) : build_hub_graph(ps);
    if (!is_connected(g)) throw std::logic_error(std::string(to_string(t)) + " graph is not connected");
    AdversarialRow r;
    r.kind = kind;
    r.param = param;
    r.n = ps.size();
    r.topology = t;
    r.interference = interference(ps, g);
    r.mst_lower_bound = mst_bound;
    r.graph_lower_bound = graph_bound;
    rows.push_back(r);
  }
  if (rows.front().interference < mst_bound)
    throw std::logic_error("adversarial: I(MST) = " + std::to_string(rows.front().interference) +
                           " is below the certified bound " + std::to_string(mst_bound));
  return rows;
}

}  // namespace

std::vector<AdversarialRow> run_adversarial(AdversarialKind kind, Index param, const AdversarialOptions& opts) {
  if (kind == AdversarialKind::zeno) {
    if (param < 2) throw std::invalid_argument("adversarial zeno: k must be >= 2");
    return measure_adversarial(zeno_instance(param, opts), kind, param, param - 1,
                               std::sqrt(static_cast<double>(param - 1)));
  }
  if (param < 2) throw std::invalid_argument("adversarial chain: n must be >= 2");
  return measure_adversarial(chain_instance(param), kind, param, param - 1, 0.0);
}

}  // namespace lowint::experiments

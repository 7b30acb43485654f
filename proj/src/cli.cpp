#include "lowint/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"

#include "lowint/experiments.hpp"
#include "lowint/geometry.hpp"
#include "lowint/graphs.hpp"
#include "lowint/interference.hpp"
#include "lowint/io.hpp"
#include "lowint/topologies.hpp"

namespace lowint::cli {
namespace {

namespace ex = lowint::experiments;

// Bad flag values: reported with exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Failed checks or assertions on valid input: exit code 1.
class DomainFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ScalarOpt {
  std::string scalar = "double";
  bool extended() const { return scalar == "extended"; }
};

void add_scalar_flag(CLI::App* app, ScalarOpt& opt) {
  app->add_option("--scalar", opt.scalar, "coordinate type: double (64-bit) or extended (long double)")
      ->check(CLI::IsMember({"double", "extended"}))
      ->capture_default_str();
}

struct TopologyFlags {
  std::optional<double> t;
  std::optional<double> net_radius;
  std::optional<Index> hub_ball_size;
  std::optional<Index> cells_per_side;
  std::string hub_rule = "ball";

  TopologyConfig config() const {
    TopologyConfig c;
    c.t = t;
    c.net_radius = net_radius;
    c.hub_ball_size = hub_ball_size;
    c.cells_per_side = cells_per_side;
    c.hub_rule = hub_rule == "metric" ? HubRule::metric_net : HubRule::ball_net;
    if (net_radius && hub_rule != "metric") c.hub_rule = HubRule::metric_net;
    // Resolving with a dummy size runs every range check.
    try {
      (void)resolved_t(c, 2);
      (void)resolved_net_radius(c, 2);
      (void)resolved_hub_ball_size(c, 2);
      if (c.cells_per_side && *c.cells_per_side < 1) throw std::invalid_argument("--cells-per-side must be >= 1");
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    return c;
  }
};

void add_topology_flags(CLI::App* app, TopologyFlags& f) {
  app->add_option("--t", f.t, "cell density t > 1 (default 2^((log2 n)^(1/3)))");
  app->add_option("--net-radius", f.net_radius, "metric hub-net radius (default n^(-1/2)); implies --hub-rule metric");
  app->add_option("--hub-rule", f.hub_rule, "hub selection: ball (count-based net) or metric (greedy r-net)")
      ->check(CLI::IsMember({"ball", "metric"}))
      ->capture_default_str();
  app->add_option("--hub-ball-size", f.hub_ball_size, "ball-net coverage size K (default ceil(sqrt n))");
  app->add_option("--cells-per-side", f.cells_per_side, "override the bucketed cell grid resolution m");
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io::FormatError("cannot open '" + path + "' for reading");
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io::FormatError("cannot open '" + path + "' for writing");
  return out;
}

template <typename Scalar>
PointSet<Scalar> load_points(const std::string& path) {
  auto in = open_in(path);
  return io::read_points<Scalar>(in);
}

GeometricGraph load_graph(const std::string& path) {
  auto in = open_in(path);
  return io::read_graph(in);
}

template <typename Scalar>
void save_points(const std::string& path, const PointSet<Scalar>& ps, std::ostream& out) {
  auto f = open_out(path);
  io::write_points(f, ps);
  out << "n=" << ps.size() << " d=" << ps.dim() << '\n';
}

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError(std::string("invalid ") + what + " '" + text + "'");
    }
  }
  return out;
}

// --- gen ---------------------------------------------------------------------

struct GenFlags {
  ScalarOpt scalar;
  std::string out_path;
  Index n = 0;
  Index d = 0;
  std::uint64_t seed = 1;
  double ratio = 0.5;
  double g0 = 0.5;
  std::string layout = "auto";
  Index k = 0;
  std::optional<double> u;
  std::optional<Index> ambient_n;
  std::string center;
  std::optional<std::uint64_t> sample_seed;
};

template <typename Scalar>
void gen_uniform_cmd(const GenFlags& f, std::ostream& out) {
  try {
    save_points(f.out_path, gen_uniform<Scalar>(f.n, f.d == 0 ? 2 : f.d, f.seed), out);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

template <typename Scalar>
void gen_chain_cmd(const GenFlags& f, std::ostream& out) {
  const Index d = f.d == 0 ? 1 : f.d;
  std::optional<PointSet<Scalar>> ps;
  try {
    auto make = [&](ChainLayout layout) {
      return gen_halving_chain<Scalar>(f.n, static_cast<Scalar>(f.ratio), static_cast<Scalar>(f.g0), d, layout);
    };
    if (f.layout == "ascending") {
      ps.emplace(make(ChainLayout::ascending));
    } else if (f.layout == "converging") {
      ps.emplace(make(ChainLayout::converging));
    } else {
      try {
        ps.emplace(make(ChainLayout::ascending));
      } catch (const std::domain_error&) {
        ps.emplace(make(ChainLayout::converging));
      }
    }
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  } catch (const std::domain_error& e) {
    throw UsageError(std::string(e.what()) + (f.scalar.extended() ? "" : " (try --scalar extended)"));
  }
  save_points(f.out_path, *ps, out);
}

template <typename Scalar>
void gen_zeno_cmd(const GenFlags& f, std::ostream& out) {
  const Index d = f.d == 0 ? 2 : f.d;
  ZenoConfig<Scalar> cfg;
  cfg.k = f.k;
  if (f.center.empty()) {
    cfg.center = Point<Scalar>::Constant(d, Scalar(0.5));
  } else {
    const auto c = parse_list(f.center, "--center");
    if (static_cast<Index>(c.size()) != d) throw UsageError("--center must have d coordinates");
    cfg.center = Eigen::Map<const Eigen::VectorXd>(c.data(), d).template cast<Scalar>();
  }
  if (f.u)
    cfg.u = static_cast<Scalar>(*f.u);
  else if (f.ambient_n)
    cfg.u = zeno_scale_for_ambient<Scalar>(*f.ambient_n, f.k);
  else
    cfg.u = Scalar(0.25) / std::pow(Scalar(3), static_cast<Scalar>(f.k));
  try {
    save_points(f.out_path, gen_zeno(cfg, d, f.sample_seed), out);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

// --- build / measure / check -------------------------------------------------

struct BuildFlags {
  ScalarOpt scalar;
  std::string topology;
  std::string in_path, out_path;
  TopologyFlags topo;
  std::optional<double> max_edge_length;
};

template <typename Scalar>
void build_cmd(const BuildFlags& f, std::ostream& out) {
  const auto topology = ex::parse_topology(f.topology);
  const auto cfg = f.topo.config();
  if (f.max_edge_length && !(*f.max_edge_length > 0)) throw UsageError("--max-edge-length must be > 0");

  const auto ps = load_points<Scalar>(f.in_path);
  GeometricGraph g(ps.size());
  switch (topology) {
    case ex::Topology::mst: g = build_mst(ps); break;
    case ex::Topology::hub: g = build_hub_graph(ps, cfg); break;
    case ex::Topology::bucketed: g = build_bucketed_graph(ps, cfg); break;
    case ex::Topology::nn:
      if (ps.size() < 2) throw DomainFailure("nn graph needs at least two points");
      g = build_nn_graph(ps);
      break;
  }
  auto file = open_out(f.out_path);
  io::write_graph(file, g);
  out << "edges=" << g.edge_count() << " connected=" << (is_connected(g) ? "true" : "false") << '\n';

  if (f.max_edge_length) {
    for (const auto& e : g.edges())
      if (static_cast<double>(edge_length(ps, e)) > *f.max_edge_length)
        throw DomainFailure("edge " + std::to_string(e.u) + "-" + std::to_string(e.v) +
                            " exceeds --max-edge-length");
  }
}

struct MeasureFlags {
  ScalarOpt scalar;
  std::string points_path, graph_path, out_path;
  std::string format = "json";
};

template <typename Scalar>
void measure_cmd(const MeasureFlags& f, std::ostream& out) {
  const auto ps = load_points<Scalar>(f.points_path);
  const auto g = load_graph(f.graph_path);
  if (g.vertex_count() != ps.size()) throw io::FormatError("graph and point set sizes differ");
  const auto report = interference_report_accelerated(ps, g);
  std::ostringstream text;
  if (f.format == "csv")
    io::write_report_csv(text, report);
  else
    text << io::report_to_json(report).dump() << '\n';
  if (f.out_path.empty()) {
    out << text.str();
  } else {
    auto file = open_out(f.out_path);
    file << text.str();
    out << "max=" << report.max_value << " argmax=" << report.argmax << '\n';
  }
}

struct CheckFlags {
  ScalarOpt scalar;
  std::string points_path, graph_path;
  std::vector<std::string> checks;
};

template <typename Scalar>
void check_cmd(const CheckFlags& f, std::ostream& out) {
  std::vector<std::string> checks = f.checks;
  if (checks.empty()) checks = {"diameter-ball", "logd-bound", "connectivity"};
  const auto ps = load_points<Scalar>(f.points_path);
  const auto g = load_graph(f.graph_path);
  if (g.vertex_count() != ps.size()) throw io::FormatError("graph and point set sizes differ");

  bool all_ok = true;
  for (const auto& c : checks) {
    if (c == "diameter-ball") {
      const auto v = diameter_ball_property(ps, g);
      all_ok = all_ok && !v;
      if (v)
        out << "diameter-ball: FAIL edge " << v->edge.u << "-" << v->edge.v << " encloses vertex " << v->vertex << '\n';
      else
        out << "diameter-ball: PASS\n";
    } else if (c == "logd-bound") {
      try {
        const auto r = log_d_bound_check(ps);
        all_ok = all_ok && r.ok;
        out << "logd-bound: " << (r.ok ? "PASS" : "FAIL") << " I_mst=" << r.mst_interference
            << " D=" << io::detail::format_scalar(r.distance_ratio) << " bound=" << static_cast<double>(r.bound) << '\n';
      } catch (const std::exception& e) {
        all_ok = false;
        out << "logd-bound: FAIL " << e.what() << '\n';
      }
    } else {
      const bool ok = is_connected(g);
      all_ok = all_ok && ok;
      out << "connectivity: " << (ok ? "PASS" : "FAIL") << '\n';
    }
  }
  if (!all_ok) throw DomainFailure("one or more checks failed");
}

// --- adversarial / experiment -----------------------------------------------

struct AdversarialFlags {
  std::string kind;
  Index k = 0;
  Index n = 0;
  Index d = 2;
  std::optional<Index> embed_n;
  std::uint64_t seed = 1;
};

void adversarial_cmd(const AdversarialFlags& f, std::ostream& out) {
  ex::AdversarialOptions opts;
  opts.d = f.d;
  opts.embed_n = f.embed_n;
  opts.seed = f.seed;
  const bool zeno = f.kind == "zeno";
  const Index param = zeno ? f.k : f.n;
  if (param < 2) throw UsageError(zeno ? "-k must be >= 2" : "-n must be >= 2");
  std::vector<ex::AdversarialRow> rows;
  try {
    rows = ex::run_adversarial(zeno ? ex::AdversarialKind::zeno : ex::AdversarialKind::chain, param, opts);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  } catch (const std::logic_error& e) {
    throw DomainFailure(e.what());
  }
  out << "kind,param,n,topology,interference,mst_lower_bound,graph_lower_bound\n";
  for (const auto& r : rows)
    out << f.kind << ',' << r.param << ',' << r.n << ',' << ex::to_string(r.topology) << ',' << r.interference << ','
        << r.mst_lower_bound << ',' << r.graph_lower_bound << '\n';
}

struct ExperimentFlags {
  std::string preset_name;
  std::string sizes, topologies;
  std::optional<int> trials;
  std::optional<Index> d;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::string csv_path, json_path;
  bool timing = false;
  TopologyFlags topo;
};

unsigned default_threads() {
  if (const char* env = std::getenv("LOWINT_THREADS")) {
    try {
      const int v = std::stoi(env);
      if (v >= 1) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
  }
  return 1;
}

void experiment_cmd(const ExperimentFlags& f, std::ostream& out) {
  ex::ExperimentSpec spec;
  try {
    if (!f.preset_name.empty()) spec = ex::preset(f.preset_name);
    if (!f.sizes.empty()) {
      spec.sizes.clear();
      for (double v : parse_list(f.sizes, "--sizes")) spec.sizes.push_back(static_cast<Index>(v));
    }
    if (!f.topologies.empty()) {
      spec.topologies.clear();
      std::stringstream ss(f.topologies);
      for (std::string t; std::getline(ss, t, ',');) spec.topologies.push_back(ex::parse_topology(t));
    }
    if (f.trials) spec.trials = *f.trials;
    if (f.d) spec.d = *f.d;
    if (f.seed) spec.master_seed = *f.seed;
    spec.threads = f.threads.value_or(default_threads());
    spec.overrides = f.topo.config();
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  const auto res = ex::run_scaling(spec);
  if (!f.csv_path.empty()) {
    auto file = open_out(f.csv_path);
    ex::write_csv(file, res, f.timing);
  }
  const auto summary = ex::summary_json(res);
  if (!f.json_path.empty()) {
    auto file = open_out(f.json_path);
    file << summary.dump(2) << '\n';
  }

  out << "topology,n,count,min,median,mean,max,stddev\n";
  for (const auto& s : summary["summary"])
    out << s["topology"].get<std::string>() << ',' << s["n"] << ',' << s["count"] << ',' << s["min"] << ','
        << s["median"] << ',' << s["mean"] << ',' << s["max"] << ',' << s["stddev"] << '\n';
  for (const auto& [name, fit] : summary["fits"].items())
    out << "fit " << name << ": exponent=" << fit["exponent"] << " r2=" << fit["r2"] << '\n';
  if (!summary["failures"].empty()) {
    out << summary["failures"].size() << " rows failed\n";
    throw DomainFailure("experiment had failing rows");
  }
}

template <typename F>
void with_scalar(const ScalarOpt& s, F&& f) {
  if (s.extended())
    f.template operator()<long double>();
  else
    f.template operator()<double>();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Receiver-centric interference of geometric graphs", "lowint"};
  app.require_subcommand(1);

  GenFlags gen;
  auto* gen_cmd = app.add_subcommand("gen", "generate a point set");
  gen_cmd->require_subcommand(1);
  auto* gen_u = gen_cmd->add_subcommand("uniform", "i.i.d. uniform points in [0,1)^d");
  gen_u->add_option("-n", gen.n, "number of points")->required();
  gen_u->add_option("-d", gen.d, "dimension (default 2)");
  gen_u->add_option("--seed", gen.seed, "64-bit seed")->capture_default_str();
  auto* gen_c = gen_cmd->add_subcommand("chain", "collinear chain with halving gaps");
  gen_c->add_option("-n", gen.n, "number of points")->required();
  gen_c->add_option("-d", gen.d, "embedding dimension (default 1)");
  gen_c->add_option("--ratio", gen.ratio, "gap ratio in (0, 1/2]")->capture_default_str();
  gen_c->add_option("--g0", gen.g0, "first gap")->capture_default_str();
  gen_c->add_option("--layout", gen.layout, "auto, ascending (x_1 = 0) or converging (limit point at 0)")
      ->check(CLI::IsMember({"auto", "ascending", "converging"}))
      ->capture_default_str();
  auto* gen_z = gen_cmd->add_subcommand("zeno", "Zeno configuration of size k");
  gen_z->add_option("-k", gen.k, "configuration size")->required();
  gen_z->add_option("-d", gen.d, "dimension (default 2)");
  gen_z->add_option("-u", gen.u, "small-ball radius (default 0.25/3^k)");
  gen_z->add_option("--ambient-n", gen.ambient_n, "set u = 1/(sqrt(pi n) 3^k) for this n");
  gen_z->add_option("--center", gen.center, "comma-separated centre (default 0.5,...)");
  gen_z->add_option("--sample-seed", gen.sample_seed, "sample one point per ball instead of using centres");
  for (auto* sub : {gen_u, gen_c, gen_z}) {
    sub->add_option("-o,--out", gen.out_path, "output point file")->required();
    add_scalar_flag(sub, gen.scalar);
  }

  BuildFlags build;
  auto* build_cmd_app = app.add_subcommand("build", "build a topology over a point set");
  build_cmd_app->add_option("topology", build.topology, "mst, hub, bucketed or nn")
      ->required()
      ->check(CLI::IsMember({"mst", "hub", "bucketed", "nn"}));
  build_cmd_app->add_option("-i,--in", build.in_path, "input point file")->required();
  build_cmd_app->add_option("-o,--out", build.out_path, "output graph file")->required();
  build_cmd_app->add_option("--max-edge-length", build.max_edge_length, "fail if any edge is longer");
  add_topology_flags(build_cmd_app, build.topo);
  add_scalar_flag(build_cmd_app, build.scalar);

  MeasureFlags measure;
  auto* measure_app = app.add_subcommand("measure", "interference report of a graph");
  measure_app->add_option("-p,--points", measure.points_path, "point file")->required();
  measure_app->add_option("-g,--graph", measure.graph_path, "graph file")->required();
  measure_app->add_option("--format", measure.format, "json or csv")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();
  measure_app->add_option("-o,--out", measure.out_path, "write the report here instead of stdout");
  add_scalar_flag(measure_app, measure.scalar);

  CheckFlags check;
  auto* check_app = app.add_subcommand("check", "structural checks on a graph");
  check_app->add_option("-p,--points", check.points_path, "point file")->required();
  check_app->add_option("-g,--graph", check.graph_path, "graph file")->required();
  check_app->add_option("--check", check.checks, "diameter-ball, logd-bound, connectivity (default: all)")
      ->check(CLI::IsMember({"diameter-ball", "logd-bound", "connectivity"}));
  add_scalar_flag(check_app, check.scalar);

  AdversarialFlags adv;
  auto* adv_app = app.add_subcommand("adversarial", "measure an adversarial family against its lower bound");
  adv_app->add_option("kind", adv.kind, "zeno or chain")->required()->check(CLI::IsMember({"zeno", "chain"}));
  adv_app->add_option("-k", adv.k, "zeno size");
  adv_app->add_option("-n", adv.n, "chain length");
  adv_app->add_option("-d", adv.d, "zeno dimension")->capture_default_str();
  adv_app->add_option("--embed-n", adv.embed_n, "embed the zeno configuration among n uniform points");
  adv_app->add_option("--seed", adv.seed, "seed of the embedding sample")->capture_default_str();

  ExperimentFlags exp;
  auto* exp_app = app.add_subcommand("experiment", "Monte-Carlo scaling experiment");
  exp_app->add_option("--preset", exp.preset_name, "paper-thm1 or smoke")
      ->check(CLI::IsMember({"paper-thm1", "smoke"}));
  exp_app->add_option("--sizes", exp.sizes, "comma-separated, strictly increasing sizes");
  exp_app->add_option("--topologies", exp.topologies, "comma-separated subset of mst,hub,bucketed,nn");
  exp_app->add_option("--trials", exp.trials, "trials per size");
  exp_app->add_option("-d", exp.d, "dimension");
  exp_app->add_option("--seed", exp.seed, "master seed");
  exp_app->add_option("--threads", exp.threads, "worker threads (default $LOWINT_THREADS or 1)");
  exp_app->add_option("--csv", exp.csv_path, "per-row CSV output");
  exp_app->add_option("--json", exp.json_path, "JSON summary output");
  exp_app->add_flag("--timing", exp.timing, "fill the wall_ms column (makes the CSV run-dependent)");
  add_topology_flags(exp_app, exp.topo);

  std::vector<std::string> argv_rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(argv_rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsageError;
  }

  try {
    if (gen_u->parsed()) {
      with_scalar(gen.scalar, [&]<typename S>() { gen_uniform_cmd<S>(gen, out); });
    } else if (gen_c->parsed()) {
      with_scalar(gen.scalar, [&]<typename S>() { gen_chain_cmd<S>(gen, out); });
    } else if (gen_z->parsed()) {
      with_scalar(gen.scalar, [&]<typename S>() { gen_zeno_cmd<S>(gen, out); });
    } else if (build_cmd_app->parsed()) {
      with_scalar(build.scalar, [&]<typename S>() { build_cmd<S>(build, out); });
    } else if (measure_app->parsed()) {
      with_scalar(measure.scalar, [&]<typename S>() { measure_cmd<S>(measure, out); });
    } else if (check_app->parsed()) {
      with_scalar(check.scalar, [&]<typename S>() { check_cmd<S>(check, out); });
    } else if (adv_app->parsed()) {
      adversarial_cmd(adv, out);
    } else if (exp_app->parsed()) {
      experiment_cmd(exp, out);
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kDomainError;
  }
  return kOk;
}

}  // namespace lowint::cli

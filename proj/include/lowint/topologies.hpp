#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "lowint/geometry.hpp"
#include "lowint/graphs.hpp"
#include "lowint/grid_index.hpp"
#include "lowint/rng.hpp"

namespace lowint {

/// How hubs are chosen.
///
/// ball_net: each point's coverage ball is the smallest closed ball around
/// it holding its K nearest points (itself included), K = ceil(sqrt n) by
/// default. Points are taken in increasing order of coverage radius; a
/// point becomes a hub iff no hub chosen so far lies in its coverage ball.
/// Afterwards every coverage ball contains a hub. So a non-hub's ball,
/// which only reaches its nearest hub, encloses at most K points.
///
/// metric_net: greedy r-net in index order. A point becomes a hub iff it is
/// farther than net_radius from every hub chosen so far.
enum class HubRule { ball_net, metric_net };

struct TopologyConfig {
  std::optional<double> t;                 // cell density, default 2^((log2 n)^(1/3))
  std::optional<double> net_radius;        // metric_net radius, default n^(-1/2)
  std::optional<Index> hub_ball_size;      // ball_net K, default ceil(sqrt n)
  std::optional<Index> cells_per_side;     // overrides ceil((n t)^(1/d))
  HubRule hub_rule = HubRule::ball_net;
};

inline double default_t(Index n) {
  return std::exp2(std::cbrt(std::log2(static_cast<double>(std::max<Index>(n, 1)))));
}

inline double resolved_t(const TopologyConfig& cfg, Index n) {
  if (cfg.t) {
    if (!(*cfg.t > 1.0) || !std::isfinite(*cfg.t)) throw std::invalid_argument("TopologyConfig: t must be > 1");
    return *cfg.t;
  }
  return default_t(n);
}

inline double resolved_net_radius(const TopologyConfig& cfg, Index n) {
  if (cfg.net_radius) {
    if (!(*cfg.net_radius > 0.0) || !std::isfinite(*cfg.net_radius))
      throw std::invalid_argument("TopologyConfig: net_radius must be > 0");
    return *cfg.net_radius;
  }
  return 1.0 / std::sqrt(static_cast<double>(n));
}

inline Index resolved_hub_ball_size(const TopologyConfig& cfg, Index n) {
  if (cfg.hub_ball_size) {
    if (*cfg.hub_ball_size < 1) throw std::invalid_argument("TopologyConfig: hub_ball_size must be >= 1");
    return std::min(*cfg.hub_ball_size, n);
  }
  auto k = static_cast<Index>(std::ceil(std::sqrt(static_cast<double>(n))));
  while (k * k < n) ++k;
  while (k > 1 && (k - 1) * (k - 1) >= n) --k;
  return std::clamp<Index>(k, 1, n);
}

struct HubSelection {
  std::vector<Index> hubs;         // increasing
  std::vector<Index> nearest_hub;  // per point; a hub maps to itself
};

namespace detail {

// Hash grid for incremental "is anything within r" queries. Cells are
// hashed, so colliding cells share a list; that only adds candidates.
template <typename Scalar>
class HubHash {
 public:
  HubHash(Index dim, Scalar side) : dim_(dim), side_(side) {}

  template <typename Derived>
  void insert(const Eigen::MatrixBase<Derived>& p, Index id) {
    std::vector<std::int64_t> c(static_cast<std::size_t>(dim_));
    for (Index k = 0; k < dim_; ++k) c[static_cast<std::size_t>(k)] = static_cast<std::int64_t>(std::floor(p(k) / side_));
    table_[hash(c)].push_back(id);
  }

  // True iff some inserted point is within squared distance sq_r of p.
  // Only the 3^d surrounding cells are searched, so sqrt(sq_r) must not
  // exceed the cell side.
  template <typename Derived>
  bool any_within(const PointSet<Scalar>& ps, const Eigen::MatrixBase<Derived>& p, Scalar sq_r) const {
    std::vector<std::int64_t> base(static_cast<std::size_t>(dim_)), c;
    for (Index k = 0; k < dim_; ++k) base[static_cast<std::size_t>(k)] = static_cast<std::int64_t>(std::floor(p(k) / side_));
    std::vector<int> off(static_cast<std::size_t>(dim_), -1);
    while (true) {
      c = base;
      for (std::size_t k = 0; k < c.size(); ++k) c[k] += off[k];
      const auto it = table_.find(hash(c));
      if (it != table_.end())
        for (Index id : it->second)
          if (squared_distance(ps.point(id), p) <= sq_r) return true;
      std::size_t k = 0;
      for (; k < off.size(); ++k) {
        if (++off[k] <= 1) break;
        off[k] = -1;
      }
      if (k == off.size()) return false;
    }
  }

 private:
  static std::uint64_t hash(const std::vector<std::int64_t>& c) {
    std::uint64_t h = 0x243f6a8885a308d3ULL;
    for (auto v : c) h = mix64(h ^ static_cast<std::uint64_t>(v));
    return h;
  }

  Index dim_;
  Scalar side_;
  std::unordered_map<std::uint64_t, std::vector<Index>> table_;
};

template <typename Scalar>
std::vector<Index> ball_net_hubs(const PointSet<Scalar>& ps, Index ball_size) {
  const Index n = ps.size();
  std::vector<Scalar> cover(static_cast<std::size_t>(n), Scalar(0));
  if (ball_size >= 2) {
    const GridIndex<Scalar> grid(ps, default_cell_side(ps, std::max(2.0, static_cast<double>(ball_size) / 2)));
    for (Index i = 0; i < n; ++i)
      cover[static_cast<std::size_t>(i)] = grid.k_nearest(ps, ps.point(i), ball_size - 1, i).back().sq_dist;
  }
  std::vector<Index> order(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::sort(order.begin(), order.end(), [&](Index a, Index b) {
    const Scalar ca = cover[static_cast<std::size_t>(a)], cb = cover[static_cast<std::size_t>(b)];
    return ca < cb || (ca == cb && a < b);
  });
  std::vector<Index> hubs;
  for (Index x : order) {
    const Scalar r2 = cover[static_cast<std::size_t>(x)];
    const bool covered = std::any_of(hubs.begin(), hubs.end(),
                                     [&](Index h) { return squared_distance(ps, x, h) <= r2; });
    if (!covered) hubs.push_back(x);
  }
  std::sort(hubs.begin(), hubs.end());
  return hubs;
}

template <typename Scalar>
std::vector<Index> metric_net_hubs(const PointSet<Scalar>& ps, Scalar radius) {
  HubHash<Scalar> table(ps.dim(), radius * Scalar(1.000001));
  const Scalar r2 = radius * radius;
  std::vector<Index> hubs;
  for (Index i = 0; i < ps.size(); ++i) {
    // "farther than radius from every hub" is the negation of "some hub
    // within the closed ball".
    if (!table.any_within(ps, ps.point(i), r2)) {
      hubs.push_back(i);
      table.insert(ps.point(i), i);
    }
  }
  return hubs;
}

}  // namespace detail

template <typename Scalar>
HubSelection select_hubs(const PointSet<Scalar>& ps, const TopologyConfig& cfg) {
  const Index n = ps.size();
  HubSelection sel;
  if (cfg.hub_rule == HubRule::ball_net)
    sel.hubs = detail::ball_net_hubs(ps, resolved_hub_ball_size(cfg, n));
  else
    sel.hubs = detail::metric_net_hubs(ps, static_cast<Scalar>(resolved_net_radius(cfg, n)));

  const auto hub_points = ps.subset(sel.hubs);
  const GridIndex<Scalar> grid(hub_points, default_cell_side(hub_points, 2.0));
  sel.nearest_hub.resize(static_cast<std::size_t>(n));
  std::vector<char> is_hub(static_cast<std::size_t>(n), 0);
  for (Index h : sel.hubs) is_hub[static_cast<std::size_t>(h)] = 1;
  for (Index i = 0; i < n; ++i) {
    if (is_hub[static_cast<std::size_t>(i)]) {
      sel.nearest_hub[static_cast<std::size_t>(i)] = i;
      continue;
    }
    const auto nn = grid.k_nearest(hub_points, ps.point(i), 1);
    sel.nearest_hub[static_cast<std::size_t>(i)] = sel.hubs[static_cast<std::size_t>(nn[0].id)];
  }
  return sel;
}

/// Hub graph: hubs joined by their own MST, every other point joined to its
/// nearest hub (ties to the smaller index). Always connected.
template <typename Scalar>
GeometricGraph build_hub_graph(const PointSet<Scalar>& ps, const TopologyConfig& cfg = {}) {
  const Index n = ps.size();
  if (n == 1) return GeometricGraph(1);
  const auto sel = select_hubs(ps, cfg);
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(n - 1));
  const auto hub_tree = build_mst(ps.subset(sel.hubs));
  for (const auto& e : hub_tree.edges())
    edges.push_back({sel.hubs[static_cast<std::size_t>(e.u)], sel.hubs[static_cast<std::size_t>(e.v)]});
  for (Index i = 0; i < n; ++i) {
    const Index h = sel.nearest_hub[static_cast<std::size_t>(i)];
    if (h != i) edges.push_back({std::min(i, h), std::max(i, h)});
  }
  return GeometricGraph(n, std::move(edges));
}

/// Partition of [0,1]^d into m^d congruent cells. Cells are numbered
/// c_0 + m c_1 + m^2 c_2 + ...
struct CellPartition {
  Index cells_per_side = 1;
  std::vector<std::uint64_t> assignment;     // cell id of every point
  std::vector<std::uint64_t> cell_ids;       // non-empty cells, increasing
  std::vector<std::size_t> start;            // members of cell_ids[c] are members[start[c]..start[c+1])
  std::vector<Index> members;                // increasing within each cell
  std::vector<Index> representatives;        // smallest index per non-empty cell, in cell order

  double cell_side() const { return 1.0 / static_cast<double>(cells_per_side); }
  std::size_t nonempty_cells() const { return cell_ids.size(); }

  std::vector<Index> cell_members(std::size_t c) const {
    return {members.begin() + static_cast<std::ptrdiff_t>(start[c]),
            members.begin() + static_cast<std::ptrdiff_t>(start[c + 1])};
  }

  Index max_occupancy() const {
    std::size_t best = 0;
    for (std::size_t c = 0; c + 1 < start.size(); ++c) best = std::max(best, start[c + 1] - start[c]);
    return static_cast<Index>(best);
  }
};

inline Index cells_per_side_for(Index n, Index d, double t) {
  const double cells = static_cast<double>(n) * t;
  double side;
  if (d == 1)
    side = cells;
  else if (d == 2)
    side = std::sqrt(cells);
  else if (d == 3)
    side = std::cbrt(cells);
  else
    side = std::pow(cells, 1.0 / static_cast<double>(d));
  return std::max<Index>(1, static_cast<Index>(std::ceil(side)));
}

template <typename Scalar>
CellPartition build_cell_partition(const PointSet<Scalar>& ps, const TopologyConfig& cfg = {}) {
  const Index n = ps.size(), d = ps.dim();
  CellPartition part;
  if (cfg.cells_per_side) {
    if (*cfg.cells_per_side < 1) throw std::invalid_argument("TopologyConfig: cells_per_side must be >= 1");
    part.cells_per_side = *cfg.cells_per_side;
  } else {
    part.cells_per_side = cells_per_side_for(n, d, resolved_t(cfg, n));
  }
  const auto m = static_cast<std::uint64_t>(part.cells_per_side);
  std::uint64_t total = 1;
  for (Index k = 0; k < d; ++k) {
    total = detail::saturating_mul(total, m);
    if (total == std::numeric_limits<std::uint64_t>::max())
      throw std::invalid_argument("build_cell_partition: too many cells for a 64-bit cell id");
  }

  part.assignment.resize(static_cast<std::size_t>(n));
  const Scalar ms = static_cast<Scalar>(part.cells_per_side);
  for (Index i = 0; i < n; ++i) {
    std::uint64_t id = 0, stride = 1;
    for (Index k = 0; k < d; ++k) {
      // Points on the far boundary (or nudged outside by rounding) go to the
      // nearest boundary cell.
      const Scalar f = std::floor(ps(k, i) * ms);
      const auto c = static_cast<std::uint64_t>(std::clamp(f, Scalar(0), ms - Scalar(1)));
      id += c * stride;
      stride *= m;
    }
    part.assignment[static_cast<std::size_t>(i)] = id;
  }

  std::vector<std::pair<std::uint64_t, Index>> keyed(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) keyed[static_cast<std::size_t>(i)] = {part.assignment[static_cast<std::size_t>(i)], i};
  std::sort(keyed.begin(), keyed.end());
  for (std::size_t p = 0; p < keyed.size(); ++p) {
    if (p == 0 || keyed[p].first != keyed[p - 1].first) {
      part.cell_ids.push_back(keyed[p].first);
      part.start.push_back(part.members.size());
      part.representatives.push_back(keyed[p].second);
    }
    part.members.push_back(keyed[p].second);
  }
  part.start.push_back(part.members.size());
  return part;
}

/// Bucketed construction: a hub graph inside every non-empty cell, plus an
/// MST over one representative per cell. Per-cell hub parameters scale with
/// the occupancy N: K = ceil(sqrt N) for ball nets, or radius
/// N^(-1/2) * cell side for metric nets.
template <typename Scalar>
GeometricGraph build_bucketed_graph(const PointSet<Scalar>& ps, const TopologyConfig& cfg = {}) {
  const Index n = ps.size();
  if (n == 1) return GeometricGraph(1);
  const auto part = build_cell_partition(ps, cfg);
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(n));

  for (std::size_t c = 0; c < part.nonempty_cells(); ++c) {
    const auto ids = part.cell_members(c);
    if (ids.size() < 2) continue;
    const auto occupancy = static_cast<Index>(ids.size());
    TopologyConfig local;
    local.hub_rule = cfg.hub_rule;
    if (cfg.hub_rule == HubRule::ball_net)
      local.hub_ball_size = resolved_hub_ball_size(TopologyConfig{}, occupancy);
    else
      local.net_radius = part.cell_side() / std::sqrt(static_cast<double>(occupancy));
    const auto local_graph = build_hub_graph(ps.subset(ids), local);
    for (const auto& e : local_graph.edges())
      edges.push_back({ids[static_cast<std::size_t>(e.u)], ids[static_cast<std::size_t>(e.v)]});
  }

  std::vector<Index> reps = part.representatives;
  std::sort(reps.begin(), reps.end());
  const auto tree = build_mst(ps.subset(reps));
  for (const auto& e : tree.edges())
    edges.push_back({reps[static_cast<std::size_t>(e.u)], reps[static_cast<std::size_t>(e.v)]});
  return GeometricGraph(n, std::move(edges));
}

}  // namespace lowint

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "lowint/geometry.hpp"
#include "lowint/grid_index.hpp"

namespace lowint {

/// Undirected edge stored with u < v.
struct Edge {
  Index u;
  Index v;

  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Simple undirected graph on vertices 0..n-1. Edges are stored normalised
/// (u < v) and sorted. Self-loops and repeated edges are rejected.
class GeometricGraph {
 public:
  explicit GeometricGraph(Index vertex_count, std::vector<Edge> edges = {})
      : n_(vertex_count), edges_(std::move(edges)) {
    if (n_ < 0) throw std::invalid_argument("GeometricGraph: negative vertex count");
    for (auto& e : edges_) {
      if (e.u == e.v) throw std::invalid_argument("GeometricGraph: self-loop");
      if (e.u > e.v) std::swap(e.u, e.v);
      if (e.u < 0 || e.v >= n_) throw std::invalid_argument("GeometricGraph: vertex index out of range");
    }
    std::sort(edges_.begin(), edges_.end());
    if (std::adjacent_find(edges_.begin(), edges_.end()) != edges_.end())
      throw std::invalid_argument("GeometricGraph: duplicate edge");
  }

  Index vertex_count() const noexcept { return n_; }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  std::span<const Edge> edges() const noexcept { return edges_; }

  bool has_edge(Index a, Index b) const {
    const Edge e{std::min(a, b), std::max(a, b)};
    return std::binary_search(edges_.begin(), edges_.end(), e);
  }

  /// Adjacency lists, neighbours in increasing order.
  std::vector<std::vector<Index>> adjacency() const {
    std::vector<std::vector<Index>> adj(static_cast<std::size_t>(n_));
    for (const auto& e : edges_) {
      adj[static_cast<std::size_t>(e.u)].push_back(e.v);
      adj[static_cast<std::size_t>(e.v)].push_back(e.u);
    }
    for (auto& a : adj) std::sort(a.begin(), a.end());
    return adj;
  }

  bool operator==(const GeometricGraph&) const = default;

 private:
  Index n_;
  std::vector<Edge> edges_;
};

template <typename Scalar>
void require_compatible(const PointSet<Scalar>& ps, const GeometricGraph& g) {
  if (ps.size() != g.vertex_count())
    throw std::invalid_argument("graph vertex count does not match point set size");
}

/// Union-find with path halving and union by size.
class DisjointSets {
 public:
  explicit DisjointSets(Index n) : parent_(static_cast<std::size_t>(n)), size_(static_cast<std::size_t>(n), 1), count_(n) {
    std::iota(parent_.begin(), parent_.end(), Index{0});
  }

  Index find(Index x) {
    auto p = static_cast<std::size_t>(x);
    while (parent_[p] != static_cast<Index>(p)) {
      parent_[p] = parent_[static_cast<std::size_t>(parent_[p])];
      p = static_cast<std::size_t>(parent_[p]);
    }
    return static_cast<Index>(p);
  }

  bool unite(Index a, Index b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    auto ua = static_cast<std::size_t>(a), ub = static_cast<std::size_t>(b);
    if (size_[ua] < size_[ub]) std::swap(ua, ub);
    parent_[ub] = static_cast<Index>(ua);
    size_[ua] += size_[ub];
    --count_;
    return true;
  }

  Index components() const noexcept { return count_; }

 private:
  std::vector<Index> parent_;
  std::vector<Index> size_;
  Index count_;
};

/// Total order on candidate edges: (squared length, min index, max index).
/// With it the minimum spanning tree is unique even when lengths tie.
template <typename Scalar>
struct EdgeKey {
  Scalar sq_len;
  Index u;  // u < v
  Index v;

  friend bool operator<(const EdgeKey& a, const EdgeKey& b) {
    if (a.sq_len != b.sq_len) return a.sq_len < b.sq_len;
    if (a.u != b.u) return a.u < b.u;
    return a.v < b.v;
  }
};

template <typename Scalar>
EdgeKey<Scalar> edge_key(const PointSet<Scalar>& ps, Index a, Index b) {
  return {squared_distance(ps, a, b), std::min(a, b), std::max(a, b)};
}

template <typename Scalar>
Scalar edge_length(const PointSet<Scalar>& ps, const Edge& e) {
  return std::sqrt(squared_distance(ps, e.u, e.v));
}

template <typename Scalar>
Scalar total_length(const PointSet<Scalar>& ps, const GeometricGraph& g) {
  Scalar sum(0);
  for (const auto& e : g.edges()) sum += edge_length(ps, e);
  return sum;
}

bool inline is_connected(const GeometricGraph& g) {
  if (g.vertex_count() <= 1) return true;
  DisjointSets dsu(g.vertex_count());
  for (const auto& e : g.edges()) dsu.unite(e.u, e.v);
  return dsu.components() == 1;
}

// --- minimum spanning trees ------------------------------------------------

/// O(n^2) Prim's algorithm over the complete graph, using the EdgeKey order.
/// Needs O(n) memory. Serves as the reference implementation and as the
/// fallback for inputs the grid method handles badly.
template <typename Scalar>
GeometricGraph build_mst_dense(const PointSet<Scalar>& ps) {
  const Index n = ps.size();
  std::vector<Edge> edges;
  if (n <= 1) return GeometricGraph(n);
  edges.reserve(static_cast<std::size_t>(n - 1));

  const auto inf = std::numeric_limits<Scalar>::infinity();
  std::vector<EdgeKey<Scalar>> best(static_cast<std::size_t>(n), EdgeKey<Scalar>{inf, n, n});
  std::vector<char> in_tree(static_cast<std::size_t>(n), 0);
  Index current = 0;
  in_tree[0] = 1;
  for (Index added = 1; added < n; ++added) {
    Index next = -1;
    for (Index v = 0; v < n; ++v) {
      const auto vu = static_cast<std::size_t>(v);
      if (in_tree[vu]) continue;
      const auto cand = edge_key(ps, current, v);
      if (cand < best[vu]) best[vu] = cand;
      if (next < 0 || best[vu] < best[static_cast<std::size_t>(next)]) next = v;
    }
    const auto& k = best[static_cast<std::size_t>(next)];
    edges.push_back({k.u, k.v});
    in_tree[static_cast<std::size_t>(next)] = 1;
    current = next;
  }
  return GeometricGraph(n, std::move(edges));
}

namespace detail {

// Radius at which a uniform sample of n points over the occupied box would
// have about kappa*ln(n) neighbours per point. This is the first guess for
// the connectivity threshold.
template <typename Scalar>
Scalar initial_threshold(const PointSet<Scalar>& ps, double kappa) {
  const auto [lo, hi] = bounding_box(ps);
  Scalar volume(1), widest(0);
  int axes = 0;
  for (Index k = 0; k < ps.dim(); ++k) {
    const Scalar w = hi(k) - lo(k);
    widest = std::max(widest, w);
    if (w > Scalar(0)) {
      volume *= w;
      ++axes;
    }
  }
  if (axes == 0) return Scalar(1);
  const Scalar a = static_cast<Scalar>(axes);
  const Scalar unit_ball = std::pow(std::numbers::pi_v<Scalar>, a / 2) / std::tgamma(a / 2 + 1);
  const Scalar n = static_cast<Scalar>(ps.size());
  const Scalar r = std::pow(static_cast<Scalar>(kappa) * std::log(n + 1) * volume / (n * unit_ball), Scalar(1) / a);
  return std::max(r, widest / Scalar(1 << 20));
}

}  // namespace detail

/// Exact EMST by Kruskal over threshold graphs.
///
/// All pairs within radius R are enumerated with a grid of side R and fed
/// to Kruskal in EdgeKey order. If the forest is not yet spanning, R is
/// doubled and only the new pairs (R_old, R] joining different components
/// are added. Each round continues the same sorted Kruskal sequence, so the
/// result is the unique EdgeKey MST. Returns nullopt once more than
/// `pair_budget` candidate pairs have been examined.
template <typename Scalar>
std::optional<GeometricGraph> build_mst_threshold(const PointSet<Scalar>& ps, std::size_t pair_budget) {
  const Index n = ps.size();
  if (n <= 1) return GeometricGraph(n);
  DisjointSets dsu(n);
  std::vector<Edge> tree;
  tree.reserve(static_cast<std::size_t>(n - 1));

  Scalar radius = detail::initial_threshold(ps, 2.0);
  Scalar prev_sq = -Scalar(1);
  std::size_t examined = 0;
  std::vector<EdgeKey<Scalar>> cand;
  while (dsu.components() > 1) {
    const Scalar sq = radius * radius;
    const GridIndex<Scalar> grid(ps, radius);
    cand.clear();
    for (Index i = 0; i < n; ++i) {
      const Index root_i = dsu.find(i);
      grid.visit_candidates(ps.point(i), radius, [&](Index j) {
        if (j <= i) return;
        ++examined;
        const Scalar d2 = squared_distance(ps, i, j);
        if (d2 <= sq && d2 > prev_sq && dsu.find(j) != root_i) cand.push_back({d2, i, j});
      });
      if (examined > pair_budget) return std::nullopt;
    }
    std::sort(cand.begin(), cand.end());
    for (const auto& k : cand)
      if (dsu.unite(k.u, k.v)) tree.push_back({k.u, k.v});
    prev_sq = sq;
    radius *= 2;
  }
  return GeometricGraph(n, std::move(tree));
}

/// Euclidean minimum spanning tree, unique under the EdgeKey order. Uses the
/// threshold-Kruskal method on spread-out inputs and dense Prim otherwise.
template <typename Scalar>
GeometricGraph build_mst(const PointSet<Scalar>& ps) {
  const Index n = ps.size();
  if (n <= 64) return build_mst_dense(ps);
  const auto budget = static_cast<std::size_t>(200) * static_cast<std::size_t>(n) + 1000000;
  if (auto g = build_mst_threshold(ps, budget)) return std::move(*g);
  return build_mst_dense(ps);
}

/// Each vertex joined to its nearest neighbour, with ties going to the
/// smaller index. Under the EdgeKey order that is the minimum incident
/// edge, so the result is a subgraph of build_mst.
template <typename Scalar>
GeometricGraph build_nn_graph(const PointSet<Scalar>& ps) {
  const Index n = ps.size();
  if (n < 2) throw std::invalid_argument("build_nn_graph: need at least two points");
  const GridIndex<Scalar> grid(ps, default_cell_side(ps, 2.0));
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const auto nn = grid.k_nearest(ps, ps.point(i), 1, i);
    edges.push_back({std::min(i, nn[0].id), std::max(i, nn[0].id)});
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return GeometricGraph(n, std::move(edges));
}

// --- edge length classes ----------------------------------------------------

/// Edges with length in the half-open interval (r_low, 2 r_low].
template <typename Scalar>
struct EdgeLengthClass {
  Scalar r_low;

  bool contains(Scalar length) const { return length > r_low && length <= Scalar(2) * r_low; }
};

template <typename Scalar>
GeometricGraph filter_edges_by_length(const PointSet<Scalar>& ps, const GeometricGraph& g,
                                      EdgeLengthClass<Scalar> cls) {
  require_compatible(ps, g);
  if (cls.r_low < Scalar(0)) throw std::invalid_argument("filter_edges_by_length: r_low must be >= 0");
  std::vector<Edge> kept;
  for (const auto& e : g.edges())
    if (cls.contains(edge_length(ps, e))) kept.push_back(e);
  return GeometricGraph(g.vertex_count(), std::move(kept));
}

/// Dyadic classes (r0 2^j, r0 2^(j+1)] with r0 = min_len / 2, enough of them
/// to reach the longest edge. Boundaries are exact powers-of-two multiples,
/// so every positive-length edge falls in exactly one class. Zero-length
/// edges belong to none.
template <typename Scalar>
std::vector<EdgeLengthClass<Scalar>> dyadic_classes(const PointSet<Scalar>& ps, const GeometricGraph& g) {
  require_compatible(ps, g);
  Scalar lo = std::numeric_limits<Scalar>::infinity(), hi(0);
  for (const auto& e : g.edges()) {
    const Scalar len = edge_length(ps, e);
    if (len > Scalar(0)) {
      lo = std::min(lo, len);
      hi = std::max(hi, len);
    }
  }
  std::vector<EdgeLengthClass<Scalar>> out;
  if (!(hi > Scalar(0))) return out;
  const Scalar r0 = std::ldexp(lo, -1);
  for (int j = 0; out.empty() || Scalar(2) * out.back().r_low < hi; ++j) out.push_back({std::ldexp(r0, j)});
  return out;
}

// --- structural checks -------------------------------------------------------

struct DiameterBallViolation {
  Edge edge;
  Index vertex;
};

/// Empty-diametral-ball property: for every edge {i,j}, no other vertex lies
/// strictly inside the ball with diameter x_i x_j. A vertex v is strictly
/// inside exactly when (x_i - v).(x_j - v) < 0. Returns the first violation
/// in edge order (smallest vertex for that edge), or nullopt if none.
template <typename Scalar>
std::optional<DiameterBallViolation> diameter_ball_property(const PointSet<Scalar>& ps, const GeometricGraph& g) {
  require_compatible(ps, g);
  if (g.edge_count() == 0) return std::nullopt;
  const GridIndex<Scalar> grid(ps, default_cell_side(ps, 2.0));
  std::vector<Index> hits;
  for (const auto& e : g.edges()) {
    const auto xi = ps.point(e.u), xj = ps.point(e.v);
    const Point<Scalar> mid = (xi + xj) / Scalar(2);
    const Scalar radius = std::sqrt(squared_distance(xi, xj)) / Scalar(2);
    hits.clear();
    grid.visit_candidates(mid, radius, [&](Index v) {
      if (v == e.u || v == e.v) return;
      Scalar dot(0);
      for (Index k = 0; k < ps.dim(); ++k) dot += (xi(k) - ps(k, v)) * (xj(k) - ps(k, v));
      if (dot < Scalar(0)) hits.push_back(v);
    });
    if (!hits.empty()) return DiameterBallViolation{e, *std::min_element(hits.begin(), hits.end())};
  }
  return std::nullopt;
}

/// Largest squared pairwise distance. Exact: cells are paired in decreasing
/// order of an upper bound on their point-to-point distance, and pairs are
/// pruned once the bound falls below the best found.
template <typename Scalar>
Scalar max_pairwise_sq_distance(const PointSet<Scalar>& ps) {
  const Index n = ps.size();
  Scalar best(0);
  if (n <= 2048) {
    for (Index i = 0; i < n; ++i)
      for (Index j = i + 1; j < n; ++j) best = std::max(best, squared_distance(ps, i, j));
    return best;
  }
  const GridIndex<Scalar> grid(ps, default_cell_side(ps, std::sqrt(static_cast<double>(n))));
  struct Box {
    Point<Scalar> lo, hi;
    std::vector<Index> ids;
  };
  std::vector<Box> boxes;
  grid.for_each_bucket([&](const auto&, std::span<const Index> ids) {
    Box b{ps.point(ids[0]), ps.point(ids[0]), {ids.begin(), ids.end()}};
    for (Index id : ids) {
      b.lo = b.lo.cwiseMin(ps.point(id));
      b.hi = b.hi.cwiseMax(ps.point(id));
    }
    boxes.push_back(std::move(b));
  });
  struct PairBound {
    Scalar ub;
    std::size_t a, b;
  };
  std::vector<PairBound> pairs;
  pairs.reserve(boxes.size() * (boxes.size() + 1) / 2);
  for (std::size_t a = 0; a < boxes.size(); ++a)
    for (std::size_t b = a; b < boxes.size(); ++b) {
      Scalar ub(0);
      for (Index k = 0; k < ps.dim(); ++k) {
        const Scalar w = std::max(boxes[a].hi(k) - boxes[b].lo(k), boxes[b].hi(k) - boxes[a].lo(k));
        ub += w * w;
      }
      pairs.push_back({ub * (Scalar(1) + Scalar(1e-9)), a, b});
    }
  std::sort(pairs.begin(), pairs.end(), [](const PairBound& x, const PairBound& y) { return x.ub > y.ub; });
  for (const auto& p : pairs) {
    if (p.ub < best) break;
    for (Index i : boxes[p.a].ids)
      for (Index j : boxes[p.b].ids) best = std::max(best, squared_distance(ps, i, j));
  }
  return best;
}

/// Smallest squared pairwise distance, from nearest-neighbour queries.
template <typename Scalar>
Scalar min_pairwise_sq_distance(const PointSet<Scalar>& ps) {
  if (ps.size() < 2) throw std::invalid_argument("min_pairwise_sq_distance: need at least two points");
  const GridIndex<Scalar> grid(ps, default_cell_side(ps, 2.0));
  Scalar best = std::numeric_limits<Scalar>::infinity();
  for (Index i = 0; i < ps.size(); ++i) best = std::min(best, grid.k_nearest(ps, ps.point(i), 1, i)[0].sq_dist);
  return best;
}

/// Ratio of the largest to the smallest pairwise distance.
template <typename Scalar>
Scalar distance_ratio(const PointSet<Scalar>& ps) {
  if (ps.size() < 2) throw std::invalid_argument("distance_ratio: need at least two points");
  const Scalar lo = min_pairwise_sq_distance(ps);
  if (!(lo > Scalar(0))) throw std::domain_error("distance_ratio: point set contains coincident points");
  return std::sqrt(max_pairwise_sq_distance(ps)) / std::sqrt(lo);
}

}  // namespace lowint

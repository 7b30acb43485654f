#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "lowint/geometry.hpp"
#include "lowint/graphs.hpp"
#include "lowint/grid_index.hpp"

namespace lowint {

/// Closed transmission balls induced by a graph. Ball i is centred at x_i
/// and reaches its farthest neighbour. Vertices without edges carry no
/// ball.
template <typename Scalar = double>
struct BallSet {
  std::vector<Scalar> sq_radius;  // squared radius, 0 for isolated vertices
  std::vector<char> active;       // vertex has at least one incident edge

  Index size() const { return static_cast<Index>(sq_radius.size()); }
  Scalar radius(Index i) const { return std::sqrt(sq_radius[static_cast<std::size_t>(i)]); }
  bool is_active(Index i) const { return active[static_cast<std::size_t>(i)] != 0; }
};

template <typename Scalar>
BallSet<Scalar> ball_set(const PointSet<Scalar>& ps, const GeometricGraph& g) {
  require_compatible(ps, g);
  BallSet<Scalar> bs{std::vector<Scalar>(static_cast<std::size_t>(ps.size()), Scalar(0)),
                     std::vector<char>(static_cast<std::size_t>(ps.size()), 0)};
  for (const auto& e : g.edges()) {
    const Scalar d2 = squared_distance(ps, e.u, e.v);
    for (Index end : {e.u, e.v}) {
      const auto p = static_cast<std::size_t>(end);
      bs.sq_radius[p] = std::max(bs.sq_radius[p], d2);
      bs.active[p] = 1;
    }
  }
  return bs;
}

/// Number of balls containing q (closed-ball membership, exact comparison).
template <typename Scalar, typename Derived>
std::int64_t interference_at(const PointSet<Scalar>& ps, const BallSet<Scalar>& bs,
                             const Eigen::MatrixBase<Derived>& q) {
  std::int64_t count = 0;
  for (Index i = 0; i < bs.size(); ++i)
    if (bs.is_active(i) && squared_distance(q, ps.point(i)) <= bs.sq_radius[static_cast<std::size_t>(i)]) ++count;
  return count;
}

struct InterferenceReport {
  std::vector<std::int64_t> per_vertex;
  std::int64_t max_value = 0;
  Index argmax = 0;  // smallest vertex attaining max_value

  bool operator==(const InterferenceReport&) const = default;
};

inline InterferenceReport make_report(std::vector<std::int64_t> per_vertex) {
  InterferenceReport r;
  r.per_vertex = std::move(per_vertex);
  for (std::size_t i = 0; i < r.per_vertex.size(); ++i)
    if (r.per_vertex[i] > r.max_value) {
      r.max_value = r.per_vertex[i];
      r.argmax = static_cast<Index>(i);
    }
  return r;
}

/// Reference O(n^2) interference of every vertex.
template <typename Scalar>
InterferenceReport interference_report(const PointSet<Scalar>& ps, const GeometricGraph& g) {
  const auto bs = ball_set(ps, g);
  std::vector<std::int64_t> per(static_cast<std::size_t>(ps.size()));
  for (Index v = 0; v < ps.size(); ++v) per[static_cast<std::size_t>(v)] = interference_at(ps, bs, ps.point(v));
  return make_report(std::move(per));
}

/// Grid cell side used by the accelerated report: the median active radius,
/// clamped to [(n t)^(-1/d), 1] with t = 2^((log2 n)^(1/3)).
template <typename Scalar>
Scalar interference_cell_side(const PointSet<Scalar>& ps, const BallSet<Scalar>& bs) {
  std::vector<Scalar> radii;
  for (Index i = 0; i < bs.size(); ++i)
    if (bs.is_active(i)) radii.push_back(bs.radius(i));
  const Scalar n = static_cast<Scalar>(ps.size());
  const Scalar t = std::exp2(std::cbrt(std::log2(std::max(n, Scalar(2)))));
  const Scalar lo = std::pow(Scalar(1) / (n * t), Scalar(1) / static_cast<Scalar>(ps.dim()));
  if (radii.empty()) return Scalar(1);
  auto mid = radii.begin() + static_cast<std::ptrdiff_t>(radii.size() / 2);
  std::nth_element(radii.begin(), mid, radii.end());
  return std::clamp(*mid, lo, Scalar(1));
}

/// Same result as interference_report, computed ball by ball: every point
/// in a ball's candidate cells is tested exactly and credited.
template <typename Scalar>
InterferenceReport interference_report_accelerated(const PointSet<Scalar>& ps, const GeometricGraph& g,
                                                   const GridIndex<Scalar>& idx) {
  require_compatible(ps, g);
  if (idx.point_count() != ps.size() || idx.dim() != ps.dim())
    throw std::invalid_argument("interference_report_accelerated: index built over a different point set");
  const auto bs = ball_set(ps, g);
  std::vector<std::int64_t> per(static_cast<std::size_t>(ps.size()), 0);
  for (Index i = 0; i < ps.size(); ++i) {
    if (!bs.is_active(i)) continue;
    const Scalar r2 = bs.sq_radius[static_cast<std::size_t>(i)];
    const auto xi = ps.point(i);
    idx.visit_candidates(xi, std::sqrt(r2), [&](Index v) {
      if (squared_distance(ps.point(v), xi) <= r2) ++per[static_cast<std::size_t>(v)];
    });
  }
  return make_report(std::move(per));
}

template <typename Scalar>
InterferenceReport interference_report_accelerated(const PointSet<Scalar>& ps, const GeometricGraph& g) {
  const GridIndex<Scalar> idx(ps, interference_cell_side(ps, ball_set(ps, g)));
  return interference_report_accelerated(ps, g, idx);
}

template <typename Scalar>
std::int64_t interference(const PointSet<Scalar>& ps, const GeometricGraph& g) {
  return interference_report_accelerated(ps, g).max_value;
}

/// Certified check of I(MST) against the log-D packing bound
/// 2 * 30^d * (ceil(log2 D) + 1).
template <typename Scalar = double>
struct LogDBound {
  std::int64_t mst_interference;
  Scalar distance_ratio;
  long double bound;
  bool ok;
};

template <typename Scalar>
LogDBound<Scalar> log_d_bound_check(const PointSet<Scalar>& ps) {
  const Scalar ratio = distance_ratio(ps);
  const auto mst = build_mst(ps);
  const std::int64_t value = interference(ps, mst);
  const long double classes = std::ceil(std::log2(static_cast<long double>(ratio))) + 1.0L;
  const long double bound = 2.0L * std::pow(30.0L, static_cast<long double>(ps.dim())) * classes;
  return {value, ratio, bound, static_cast<long double>(value) <= bound};
}

}  // namespace lowint

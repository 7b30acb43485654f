#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "lowint/geometry.hpp"

namespace lowint {

/// A point at squared distance `sq_dist` from some query. Ordered by
/// (sq_dist, id) so ties always resolve to the smaller index.
template <typename Scalar>
struct Neighbor {
  Scalar sq_dist;
  Index id;

  friend bool operator<(const Neighbor& a, const Neighbor& b) {
    return a.sq_dist < b.sq_dist || (a.sq_dist == b.sq_dist && a.id < b.id);
  }
  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

namespace detail {

// Slack applied when turning a metric radius into a cell range. It only
// widens the set of cells visited; membership is always decided by an exact
// squared-distance comparison afterwards.
template <typename Scalar>
Scalar query_margin(Scalar radius, Scalar coord, Scalar side) {
  return radius * Scalar(1e-9) + (std::abs(coord) + side) * Scalar(1e-12);
}

inline std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a)
    return std::numeric_limits<std::uint64_t>::max();
  return a * b;
}

}  // namespace detail

/// Uniform grid over a point set: point p lives in the bucket
/// floor(p / cell_side), taken componentwise.
///
/// Only non-empty buckets are stored. Bucket contents are the point indices
/// in increasing order. Queries take the same PointSet the index was built
/// from.
template <typename Scalar = double>
class GridIndex {
 public:
  using Cell = std::vector<std::int64_t>;

  GridIndex(const PointSet<Scalar>& ps, Scalar cell_side)
      : side_(cell_side), dim_(ps.dim()), n_(ps.size()) {
    if (!(cell_side > Scalar(0)) || !std::isfinite(static_cast<long double>(cell_side)))
      throw std::invalid_argument("GridIndex: cell_side must be positive and finite");

    std::vector<Cell> cells(static_cast<std::size_t>(n_));
    for (Index i = 0; i < n_; ++i) cells[static_cast<std::size_t>(i)] = cell_of(ps.point(i));

    lo_.assign(static_cast<std::size_t>(dim_), std::numeric_limits<std::int64_t>::max());
    std::vector<std::int64_t> hi(static_cast<std::size_t>(dim_), std::numeric_limits<std::int64_t>::min());
    for (const auto& c : cells)
      for (std::size_t k = 0; k < c.size(); ++k) {
        lo_[k] = std::min(lo_[k], c[k]);
        hi[k] = std::max(hi[k], c[k]);
      }
    extent_.resize(static_cast<std::size_t>(dim_));
    stride_.resize(static_cast<std::size_t>(dim_));
    std::uint64_t total = 1;
    for (std::size_t k = 0; k < extent_.size(); ++k) {
      extent_[k] = hi[k] - lo_[k] + 1;
      stride_[k] = total;
      total = detail::saturating_mul(total, static_cast<std::uint64_t>(extent_[k]));
      if (total == std::numeric_limits<std::uint64_t>::max())
        throw std::invalid_argument("GridIndex: cell_side too small for a 64-bit cell key space");
    }

    std::vector<std::pair<std::uint64_t, Index>> keyed(static_cast<std::size_t>(n_));
    for (Index i = 0; i < n_; ++i) keyed[static_cast<std::size_t>(i)] = {key_of(cells[static_cast<std::size_t>(i)]), i};
    std::sort(keyed.begin(), keyed.end());

    ids_.reserve(keyed.size());
    for (std::size_t p = 0; p < keyed.size(); ++p) {
      if (p == 0 || keyed[p].first != keyed[p - 1].first) {
        slot_.emplace(keyed[p].first, keys_.size());
        keys_.push_back(keyed[p].first);
        start_.push_back(ids_.size());
      }
      ids_.push_back(keyed[p].second);
    }
    start_.push_back(ids_.size());
  }

  Scalar cell_side() const noexcept { return side_; }
  Index dim() const noexcept { return dim_; }
  Index point_count() const noexcept { return n_; }
  std::size_t bucket_count() const noexcept { return keys_.size(); }

  template <typename Derived>
  Cell cell_of(const Eigen::MatrixBase<Derived>& p) const {
    Cell c(static_cast<std::size_t>(dim_));
    for (Index k = 0; k < dim_; ++k) c[static_cast<std::size_t>(k)] = floor_cell(p(k) / side_);
    return c;
  }

  /// Indices stored in the bucket at `cell` (empty if the bucket is empty).
  std::span<const Index> bucket(std::span<const std::int64_t> cell) const {
    if (!inside(cell)) return {};
    const auto it = slot_.find(key_of(cell));
    if (it == slot_.end()) return {};
    return bucket_at(it->second);
  }

  /// Calls f(cell, ids) for every non-empty bucket, in key order.
  template <typename F>
  void for_each_bucket(F&& f) const {
    for (std::size_t b = 0; b < keys_.size(); ++b) f(decode(keys_[b]), bucket_at(b));
  }

  /// Calls f(id) for every point in a bucket that meets the axis-aligned box
  /// around `center` with half-width `radius`. This is a superset of the
  /// closed ball of that radius.
  template <typename Derived, typename F>
  void visit_candidates(const Eigen::MatrixBase<Derived>& center, Scalar radius, F&& f) const {
    Cell lo(static_cast<std::size_t>(dim_)), hi(static_cast<std::size_t>(dim_));
    std::uint64_t cells = 1;
    for (Index k = 0; k < dim_; ++k) {
      const auto ku = static_cast<std::size_t>(k);
      const Scalar m = radius + detail::query_margin(radius, center(k), side_);
      lo[ku] = std::max(floor_cell((center(k) - m) / side_), lo_[ku]);
      hi[ku] = std::min(floor_cell((center(k) + m) / side_), lo_[ku] + extent_[ku] - 1);
      if (lo[ku] > hi[ku]) return;
      cells = detail::saturating_mul(cells, static_cast<std::uint64_t>(hi[ku] - lo[ku] + 1));
    }

    if (cells > keys_.size()) {
      for (std::size_t b = 0; b < keys_.size(); ++b) {
        const Cell c = decode(keys_[b]);
        bool hit = true;
        for (std::size_t k = 0; k < c.size() && hit; ++k) hit = c[k] >= lo[k] && c[k] <= hi[k];
        if (hit)
          for (Index id : bucket_at(b)) f(id);
      }
      return;
    }

    Cell c = lo;
    while (true) {
      const auto it = slot_.find(key_of(c));
      if (it != slot_.end())
        for (Index id : bucket_at(it->second)) f(id);
      std::size_t k = 0;
      for (; k < c.size(); ++k) {
        if (++c[k] <= hi[k]) break;
        c[k] = lo[k];
      }
      if (k == c.size()) break;
    }
  }

  /// Sorted ids of the points with squared distance <= sq_radius from q.
  template <typename Derived>
  std::vector<Index> range_query_sq(const PointSet<Scalar>& ps, const Eigen::MatrixBase<Derived>& q,
                                    Scalar sq_radius) const {
    std::vector<Index> out;
    if (sq_radius < Scalar(0)) return out;
    visit_candidates(q, std::sqrt(sq_radius), [&](Index id) {
      if (squared_distance(ps.point(id), q) <= sq_radius) out.push_back(id);
    });
    std::sort(out.begin(), out.end());
    return out;
  }

  template <typename Derived>
  std::vector<Index> range_query(const PointSet<Scalar>& ps, const Eigen::MatrixBase<Derived>& q,
                                 Scalar radius) const {
    return range_query_sq(ps, q, radius * radius);
  }

  /// The k points nearest to q, ordered by (squared distance, index). The
  /// point `exclude` is skipped if it is in range. Searches rings of cells
  /// outward from q's cell. Falls back to a full scan when rings grow larger
  /// than the occupied grid.
  template <typename Derived>
  std::vector<Neighbor<Scalar>> k_nearest(const PointSet<Scalar>& ps, const Eigen::MatrixBase<Derived>& q,
                                          Index k, Index exclude = -1) const {
    const Index available = n_ - ((exclude >= 0 && exclude < n_) ? 1 : 0);
    k = std::min(k, available);
    std::vector<Neighbor<Scalar>> out;
    if (k <= 0) return out;

    std::priority_queue<Neighbor<Scalar>> best;  // max-heap of the k best so far
    auto offer = [&](Index id) {
      if (id == exclude) return;
      const Neighbor<Scalar> cand{squared_distance(ps.point(id), q), id};
      if (static_cast<Index>(best.size()) < k) {
        best.push(cand);
      } else if (cand < best.top()) {
        best.pop();
        best.push(cand);
      }
    };

    const Cell home = cell_of(q);
    Scalar qmax(0);
    for (Index c = 0; c < dim_; ++c) qmax = std::max(qmax, std::abs(q(c)));

    bool exhaustive = false;
    for (std::int64_t ring = 0;; ++ring) {
      const std::uint64_t cube = pow_u64(static_cast<std::uint64_t>(2 * ring + 1), dim_);
      if (cube > 4 * keys_.size() + 16) {
        exhaustive = true;
        break;
      }
      bool covers_all = true;
      Cell lo(static_cast<std::size_t>(dim_)), hi(static_cast<std::size_t>(dim_));
      bool empty = false;
      for (std::size_t c = 0; c < lo.size(); ++c) {
        const std::int64_t glo = lo_[c], ghi = lo_[c] + extent_[c] - 1;
        covers_all = covers_all && home[c] - ring <= glo && home[c] + ring >= ghi;
        lo[c] = std::max(home[c] - ring, glo);
        hi[c] = std::min(home[c] + ring, ghi);
        empty = empty || lo[c] > hi[c];
      }
      if (!empty) {
        Cell c = lo;
        while (true) {
          std::int64_t cheb = 0;
          for (std::size_t a = 0; a < c.size(); ++a) cheb = std::max(cheb, std::abs(c[a] - home[a]));
          if (cheb == ring) {
            const auto it = slot_.find(key_of(c));
            if (it != slot_.end())
              for (Index id : bucket_at(it->second)) offer(id);
          }
          std::size_t a = 0;
          for (; a < c.size(); ++a) {
            if (++c[a] <= hi[a]) break;
            c[a] = lo[a];
          }
          if (a == c.size()) break;
        }
      }
      if (covers_all) break;
      if (static_cast<Index>(best.size()) == k) {
        // Anything unseen is at least `ring` whole cells away along some axis.
        const Scalar reach = static_cast<Scalar>(ring) * side_;
        const Scalar bound = reach - detail::query_margin(reach, qmax, side_);
        if (bound > Scalar(0) && best.top().sq_dist < bound * bound) break;
      }
    }

    if (exhaustive) {
      best = {};
      for (Index id = 0; id < n_; ++id) offer(id);
    }
    out.resize(best.size());
    for (std::size_t p = out.size(); p-- > 0;) {
      out[p] = best.top();
      best.pop();
    }
    return out;
  }

 private:
  std::int64_t floor_cell(Scalar v) const {
    const Scalar f = std::floor(v);
    if (!(std::abs(f) < Scalar(4.0e18)))
      throw std::invalid_argument("GridIndex: coordinate out of range for cell_side");
    return static_cast<std::int64_t>(f);
  }

  bool inside(std::span<const std::int64_t> cell) const {
    if (static_cast<Index>(cell.size()) != dim_) return false;
    for (std::size_t k = 0; k < cell.size(); ++k)
      if (cell[k] < lo_[k] || cell[k] >= lo_[k] + extent_[k]) return false;
    return true;
  }

  std::uint64_t key_of(std::span<const std::int64_t> cell) const {
    std::uint64_t key = 0;
    for (std::size_t k = 0; k < cell.size(); ++k)
      key += static_cast<std::uint64_t>(cell[k] - lo_[k]) * stride_[k];
    return key;
  }

  Cell decode(std::uint64_t key) const {
    Cell c(static_cast<std::size_t>(dim_));
    for (std::size_t k = 0; k < c.size(); ++k)
      c[k] = lo_[k] + static_cast<std::int64_t>((key / stride_[k]) % static_cast<std::uint64_t>(extent_[k]));
    return c;
  }

  std::span<const Index> bucket_at(std::size_t b) const {
    return {ids_.data() + start_[b], start_[b + 1] - start_[b]};
  }

  static std::uint64_t pow_u64(std::uint64_t base, Index e) {
    std::uint64_t r = 1;
    for (Index i = 0; i < e; ++i) r = detail::saturating_mul(r, base);
    return r;
  }

  Scalar side_;
  Index dim_;
  Index n_;
  std::vector<std::int64_t> lo_;
  std::vector<std::int64_t> extent_;
  std::vector<std::uint64_t> stride_;
  std::vector<std::uint64_t> keys_;
  std::vector<std::size_t> start_;
  std::vector<Index> ids_;
  std::unordered_map<std::uint64_t, std::size_t> slot_;
};

/// Cell side giving roughly `per_cell` points per occupied cell if the
/// points were spread evenly over their bounding box. Axes with zero extent
/// are ignored.
template <typename Scalar>
Scalar default_cell_side(const PointSet<Scalar>& ps, double per_cell = 2.0) {
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
  const Scalar side = std::pow(volume * static_cast<Scalar>(per_cell) / static_cast<Scalar>(ps.size()),
                               Scalar(1) / static_cast<Scalar>(axes));
  // Keep the key space small even when the box is very flat.
  const Scalar floor_side = widest / Scalar(1 << 20);
  return std::max({side, floor_side, std::numeric_limits<Scalar>::min()});
}

template <typename Scalar>
GridIndex<Scalar> build_grid_index(const PointSet<Scalar>& ps, Scalar cell_side) {
  return GridIndex<Scalar>(ps, cell_side);
}

}  // namespace lowint

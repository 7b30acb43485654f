#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "lowint/rng.hpp"

namespace lowint {

using Index = Eigen::Index;

template <typename Scalar>
using CoordMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using Point = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Ordered set of n points in R^d, stored one point per column.
///
/// Column order is the vertex identity used by every graph built over the
/// set. Instances are immutable once constructed.
template <typename Scalar = double>
class PointSet {
 public:
  using scalar_type = Scalar;

  explicit PointSet(CoordMatrix<Scalar> coords) : coords_(std::move(coords)) {
    if (coords_.rows() < 1) throw std::invalid_argument("PointSet: dimension must be >= 1");
    if (coords_.cols() < 1) throw std::invalid_argument("PointSet: need at least one point");
    if (!coords_.allFinite()) throw std::invalid_argument("PointSet: coordinates must be finite");
  }

  Index dim() const noexcept { return coords_.rows(); }
  Index size() const noexcept { return coords_.cols(); }

  auto point(Index i) const { return coords_.col(i); }
  Scalar operator()(Index k, Index i) const { return coords_(k, i); }
  const CoordMatrix<Scalar>& coords() const noexcept { return coords_; }

  /// Points selected by `ids`, in the given order.
  PointSet subset(const std::vector<Index>& ids) const {
    CoordMatrix<Scalar> out(dim(), static_cast<Index>(ids.size()));
    for (std::size_t c = 0; c < ids.size(); ++c) out.col(static_cast<Index>(c)) = coords_.col(ids[c]);
    return PointSet(std::move(out));
  }

  template <typename Other>
  PointSet<Other> cast() const {
    return PointSet<Other>(coords_.template cast<Other>());
  }

  bool operator==(const PointSet& o) const {
    return dim() == o.dim() && size() == o.size() && coords_ == o.coords_;
  }

 private:
  CoordMatrix<Scalar> coords_;
};

/// Squared Euclidean distance, summed in coordinate order. Every distance
/// comparison in the library goes through this function, so two code paths
/// comparing the same pair always see the same bits. The sum is symmetric in
/// its arguments.
template <typename A, typename B>
typename A::Scalar squared_distance(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  using S = typename A::Scalar;
  S sum(0);
  for (Index k = 0; k < a.size(); ++k) {
    const S diff = a(k) - b(k);
    sum += diff * diff;
  }
  return sum;
}

template <typename Scalar>
Scalar squared_distance(const PointSet<Scalar>& ps, Index i, Index j) {
  return squared_distance(ps.point(i), ps.point(j));
}

/// Axis-aligned bounding box of the set.
template <typename Scalar>
std::pair<Point<Scalar>, Point<Scalar>> bounding_box(const PointSet<Scalar>& ps) {
  return {ps.coords().rowwise().minCoeff(), ps.coords().rowwise().maxCoeff()};
}

// --- generators -----------------------------------------------------------

/// n points with i.i.d. uniform [0,1) coordinates, drawn point-major from a
/// stream seeded by `seed`.
template <typename Scalar = double>
PointSet<Scalar> gen_uniform(Index n, Index d, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("gen_uniform: n must be >= 1");
  if (d < 1) throw std::invalid_argument("gen_uniform: d must be >= 1");
  UniformStream rng(seed);
  CoordMatrix<Scalar> c(d, n);
  for (Index i = 0; i < n; ++i)
    for (Index k = 0; k < d; ++k) c(k, i) = static_cast<Scalar>(rng.next());
  return PointSet<Scalar>(std::move(c));
}

/// Where a halving chain sits on the x axis.
///  - ascending: x_1 = 0 < x_2 < ..., gaps g0, g0*ratio, ... The points pile
///    up below 2*g0, so float spacing near the limit point runs out quickly
///    (about 54 points in double, 65 in long double).
///  - converging: the mirror image with the limit point at the origin,
///    x_i = g0*ratio^(i-1)/(1-ratio), so x_1 > x_2 > ... > 0. With ratio 1/2
///    every coordinate is a power of two, and chains of thousands of points
///    stay exact in long double.
/// Both layouts have the same gap sequence, so they are congruent.
enum class ChainLayout { ascending, converging };

/// Collinear chain with consecutive gaps gap_i = g0 * ratio^(i-1), embedded in
/// dimension d (extra coordinates 0).
///
/// Throws std::domain_error when Scalar cannot hold the chain: consecutive
/// points coincide, or the smallest gap or its square is not a normal number.
template <typename Scalar = double>
PointSet<Scalar> gen_halving_chain(Index n, Scalar ratio = Scalar(0.5), Scalar g0 = Scalar(0.5),
                                   Index d = 1, ChainLayout layout = ChainLayout::ascending) {
  if (n < 2) throw std::invalid_argument("gen_halving_chain: n must be >= 2");
  if (d < 1) throw std::invalid_argument("gen_halving_chain: d must be >= 1");
  if (!(ratio > Scalar(0) && ratio <= Scalar(0.5)))
    throw std::invalid_argument("gen_halving_chain: ratio must lie in (0, 1/2]");
  if (!(g0 > Scalar(0)) || !std::isfinite(static_cast<long double>(g0)))
    throw std::invalid_argument("gen_halving_chain: g0 must be positive");

  Scalar smallest = g0;
  for (Index i = 2; i < n; ++i) smallest *= ratio;
  if (!std::isnormal(smallest) || !std::isnormal(smallest * smallest))
    throw std::domain_error("gen_halving_chain: gaps underflow this scalar type");

  CoordMatrix<Scalar> c = CoordMatrix<Scalar>::Zero(d, n);
  if (layout == ChainLayout::ascending) {
    Scalar pos(0), gap = g0;
    for (Index i = 1; i < n; ++i) {
      pos += gap;
      gap *= ratio;
      c(0, i) = pos;
      if (!(c(0, i) > c(0, i - 1)))
        throw std::domain_error(
            "gen_halving_chain: ascending chain exhausts float spacing; use the converging layout");
    }
  } else {
    Scalar pos = g0 / (Scalar(1) - ratio);
    for (Index i = 0; i < n; ++i) {
      c(0, i) = pos;
      pos *= ratio;
    }
  }
  return PointSet<Scalar>(std::move(c));
}

/// Parameters of a Zeno configuration: k small balls of radius u, ball 0 at
/// `center`, ball i at center + u*3^i*axis, inside an outer ball of radius
/// u*3^k.
template <typename Scalar = double>
struct ZenoConfig {
  Index k = 2;
  Scalar u = Scalar(0);
  Point<Scalar> center;
  Point<Scalar> axis;  // empty means +x

  Scalar outer_radius() const { return u * std::pow(Scalar(3), static_cast<Scalar>(k)); }
};

/// Scale at which the outer ball has area 1/n: u = 1/(sqrt(pi n) 3^k).
template <typename Scalar = double>
Scalar zeno_scale_for_ambient(Index n, Index k) {
  return Scalar(1) / (std::sqrt(std::numbers::pi_v<Scalar> * static_cast<Scalar>(n)) *
                      std::pow(Scalar(3), static_cast<Scalar>(k)));
}

/// Centre of the i-th small ball.
template <typename Scalar>
Point<Scalar> zeno_ball_center(const ZenoConfig<Scalar>& cfg, Index d, Index i) {
  Point<Scalar> axis = cfg.axis;
  if (axis.size() == 0) {
    axis = Point<Scalar>::Zero(d);
    axis(0) = Scalar(1);
  }
  Point<Scalar> c = cfg.center;
  if (i > 0) c += (cfg.u * std::pow(Scalar(3), static_cast<Scalar>(i))) * axis;
  return c;
}

/// Realises a Zeno configuration as k points, one per small ball.
///
/// By default each point sits at the centre of its ball. If `sample_seed`
/// is given, each point is drawn uniformly from its ball (rejection from
/// the bounding cube). With `require_unit_cube` the outer ball must lie
/// inside [0,1]^d.
template <typename Scalar = double>
PointSet<Scalar> gen_zeno(const ZenoConfig<Scalar>& cfg, Index d,
                          std::optional<std::uint64_t> sample_seed = std::nullopt,
                          bool require_unit_cube = true) {
  if (cfg.k < 2) throw std::invalid_argument("gen_zeno: k must be >= 2");
  if (!(cfg.u > Scalar(0))) throw std::invalid_argument("gen_zeno: u must be > 0");
  if (d < 1) throw std::invalid_argument("gen_zeno: d must be >= 1");
  if (cfg.center.size() != d) throw std::invalid_argument("gen_zeno: center dimension mismatch");
  if (cfg.axis.size() != 0) {
    if (cfg.axis.size() != d) throw std::invalid_argument("gen_zeno: axis dimension mismatch");
    const Scalar norm = cfg.axis.norm();
    if (!(std::abs(norm - Scalar(1)) <= Scalar(1e-12)))
      throw std::invalid_argument("gen_zeno: axis must be a unit vector");
  }
  if (require_unit_cube) {
    const Scalar r = cfg.outer_radius();
    for (Index c = 0; c < d; ++c)
      if (cfg.center(c) - r < Scalar(0) || cfg.center(c) + r > Scalar(1))
        throw std::invalid_argument("gen_zeno: outer ball leaves the unit cube");
  }

  CoordMatrix<Scalar> out(d, cfg.k);
  std::optional<UniformStream> rng;
  if (sample_seed) rng.emplace(*sample_seed);
  for (Index i = 0; i < cfg.k; ++i) {
    Point<Scalar> c = zeno_ball_center(cfg, d, i);
    if (rng) {
      Point<Scalar> offset(d);
      do {
        for (Index k = 0; k < d; ++k)
          offset(k) = (Scalar(2) * static_cast<Scalar>(rng->next()) - Scalar(1)) * cfg.u;
      } while (offset.squaredNorm() > cfg.u * cfg.u);
      c += offset;
    }
    out.col(i) = c;
  }
  return PointSet<Scalar>(std::move(out));
}

}  // namespace lowint

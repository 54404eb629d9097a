#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "geoextremes/geometry.hpp"
#include "geoextremes/rng.hpp"

namespace geoextremes {

/// Axis-aligned box in R^d.
struct Box {
  Point lo;
  Point hi;
  int d = 2;

  static Box cube(int d, double lo, double hi);
  double volume() const;
  bool contains(const Point &p) const;
  /// Box grown by `margin` on every side.
  Box inflated(double margin) const;
  /// Distance from p (inside) to the complement of the box.
  double inner_distance(const Point &p) const;
  double diameter() const;
};

struct Ball {
  Point center;
  double radius = 0.0;
  int d = 2;

  double volume() const;
  bool contains(const Point &p) const;
};

/// Spherical shell r_inner < |x - center| <= r_outer.
struct Shell {
  Point center;
  double r_inner = 0.0;
  double r_outer = 0.0;
  int d = 2;

  double volume() const;
  bool contains(const Point &p) const;
};

using Region = std::variant<Box, Ball, Shell>;

/// Observation window W_t = [0, t^{1/d}]^d with a sampling buffer around it.
struct Window {
  double scale_t = 1.0;
  int d = 2;
  double buffer = 0.0;

  double side() const;
  Box core() const;
  Box sampling() const;
};

/// Probability density on [0,1]^d together with bounds used for thinning.
struct Density {
  std::string name = "uniform";
  int d = 2;
  std::function<double(const Point &)> f;
  double f_minus = 1.0;
  double f_plus = 1.0;
  /// Integral of f over [0,1]^d (1 for a probability density).
  double integral = 1.0;
  bool constant = true;

  double operator()(const Point &p) const
  {
    return f ? f(p) : f_plus;
  }

  static Density uniform(int d);
  /// f(x) = 1 + slope * (x_1 - 1/2), |slope| < 2.
  static Density linear_ramp(int d, double slope);
};

/**
 * Intensity function of a Poisson process. Either a constant gamma on R^d, or
 * c * s * f on [0,1]^d and zero elsewhere.
 */
class IntensitySpec {
 public:
  static IntensitySpec constant(double gamma, int d = 2);
  static IntensitySpec scaled_density(double c, double s, Density f);

  double operator()(const Point &p) const;
  /// Upper bound of the intensity used as the envelope for thinning.
  double envelope() const;
  int dim() const
  {
    return d_;
  }
  bool is_constant() const
  {
    return !density_;
  }
  double gamma() const
  {
    return gamma_;
  }
  double c() const
  {
    return c_;
  }
  double s() const
  {
    return s_;
  }
  const Density &density() const
  {
    return density_.value();
  }

 private:
  int d_ = 2;
  double gamma_ = 1.0;
  double c_ = 1.0;
  double s_ = 1.0;
  std::optional<Density> density_;
};

/// Uniform bucket grid over a box. Points outside the box are clamped to boundary cells.
class GridIndex {
 public:
  GridIndex() = default;
  GridIndex(std::span<const Point> points, const Box &bounds, double cell_width);

  double cell_width() const
  {
    return h_;
  }
  std::array<int, 3> dims() const
  {
    return n_;
  }
  std::array<int, 3> cell_of(const Point &p) const;
  /// Largest Chebyshev ring index that still intersects the grid, seen from `cell`.
  int max_ring(const std::array<int, 3> &cell) const;

  /// Calls f(index) for every indexed point lying in a cell that intersects the cube around c.
  template<class F> void for_each_candidate(const Point &c, double r, F &&f) const;
  /// Calls f(index) for every point in the cells at Chebyshev distance exactly `ring` from `cell`.
  template<class F> void for_each_in_ring(const std::array<int, 3> &cell, int ring, F &&f) const;

 private:
  int flat(int i, int j, int k) const
  {
    return (k * n_[1] + j) * n_[0] + i;
  }
  template<class F> void visit_cell(int i, int j, int k, F &f) const;

  Box bounds_;
  double h_ = 1.0;
  std::array<int, 3> n_{1, 1, 1};
  std::vector<std::size_t> start_;
  std::vector<std::size_t> items_;
};

/**
 * Finite simple counting measure: distinct points with a spatial index. `region`
 * is the set on which the configuration is known (the sampling region).
 */
class PointConfiguration {
 public:
  PointConfiguration() = default;
  PointConfiguration(int d, std::vector<Point> points, const Box &region, double cell_width = 0.0);

  int dim() const
  {
    return d_;
  }
  std::span<const Point> points() const
  {
    return points_;
  }
  const Point &operator[](std::size_t i) const
  {
    return points_[i];
  }
  std::size_t size() const
  {
    return points_.size();
  }
  bool empty() const
  {
    return points_.empty();
  }
  const Box &region() const
  {
    return region_;
  }
  const GridIndex &index() const
  {
    return index_;
  }

  /// Points of the configuration in the closed ball B(c, r).
  std::vector<Point> query_ball(const Point &c, double r) const;
  std::vector<std::size_t> query_ball_indices(const Point &c, double r) const;
  /// Number of points in the closed ball other than `exclude`; stops counting after `limit`.
  std::size_t count_in_ball(const Point &c, double r, std::size_t exclude = npos,
                            std::size_t limit = std::numeric_limits<std::size_t>::max()) const;

  /// The k-th nearest point to x among points different from x, in the total order of y - x.
  Point knn_query(const Point &x, int k) const;
  /// Distance from point i to its k-th nearest other point (k >= 1); infinity if there are fewer.
  double kth_neighbor_distance(std::size_t i, int k) const;
  /// Index of the point equal to p, or npos.
  std::size_t find(const Point &p) const;

  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

 private:
  int d_ = 2;
  std::vector<Point> points_;
  Box region_;
  GridIndex index_;
};

/// Points of a Poisson process with the given intensity on `region`, generated by thinning.
std::vector<Point> sample_poisson_points(const IntensitySpec &intensity, const Region &region, Rng &rng);

/// Poisson process on a box, returned with its spatial index. Deterministic in `seed`.
PointConfiguration sample_poisson(const IntensitySpec &intensity, const Box &region, const SeedSpec &seed);

/// Standard normal vector in R^d.
Point gaussian_point(int d, Rng &rng);
/// Uniform point on the unit sphere S^{d-1}.
Point uniform_on_sphere(int d, Rng &rng);

enum class MeckeFunction {
  /// f(x, mu) = 1{x in [0,1]^d}
  indicator_unit_cube,
  /// f(x, mu) = 1{x in [0,1]^d, no other point of mu within distance r of x}
  isolated_in_unit_cube,
  /// f(x, y, mu) = 1{x, y in [0,1]^d, |x - y| <= r}
  close_pair,
};

int mecke_order(MeckeFunction f);

struct MeckeReport {
  int k = 1;
  double lhs = 0.0;
  double lhs_se = 0.0;
  double rhs = 0.0;
  double rhs_se = 0.0;
  /// Closed form of the right-hand side when the intensity is constant; NaN otherwise.
  double rhs_exact = std::numeric_limits<double>::quiet_NaN();
  double z_score = 0.0;
};

/**
 * Monte Carlo check of the multivariate Mecke equation for f on a Poisson process.
 * The left side sums f over (ordered, distinct) tuples of the process, the right
 * side integrates f(x, eta + delta_x) against the k-fold intensity measure.
 */
MeckeReport verify_mecke(const IntensitySpec &intensity, MeckeFunction f, double r, std::size_t n_mc,
                         const SeedSpec &seed);

void write_points_csv(std::ostream &os, std::span<const Point> points, int d);
std::vector<Point> read_points_csv(std::istream &is, int d);

// Template definitions.

template<class F> void GridIndex::visit_cell(int i, int j, int k, F &f) const
{
  const int c = flat(i, j, k);
  for (std::size_t a = start_[c]; a < start_[c + 1]; ++a) {
    f(items_[a]);
  }
}

template<class F> void GridIndex::for_each_candidate(const Point &c, double r, F &&f) const
{
  if (start_.empty()) {
    return;
  }
  std::array<int, 3> lo{0, 0, 0};
  std::array<int, 3> hi{0, 0, 0};
  for (int a = 0; a < bounds_.d; ++a) {
    const double l = std::floor((c[a] - r - bounds_.lo[a]) / h_);
    const double u = std::floor((c[a] + r - bounds_.lo[a]) / h_);
    lo[a] = static_cast<int>(std::clamp(l, 0.0, double(n_[a] - 1)));
    hi[a] = static_cast<int>(std::clamp(u, 0.0, double(n_[a] - 1)));
  }
  for (int k = lo[2]; k <= hi[2]; ++k) {
    for (int j = lo[1]; j <= hi[1]; ++j) {
      for (int i = lo[0]; i <= hi[0]; ++i) {
        visit_cell(i, j, k, f);
      }
    }
  }
}

template<class F> void GridIndex::for_each_in_ring(const std::array<int, 3> &cell, int ring, F &&f) const
{
  if (start_.empty()) {
    return;
  }
  std::array<int, 3> lo{0, 0, 0};
  std::array<int, 3> hi{0, 0, 0};
  for (int a = 0; a < bounds_.d; ++a) {
    lo[a] = std::max(cell[a] - ring, 0);
    hi[a] = std::min(cell[a] + ring, n_[a] - 1);
  }
  for (int k = lo[2]; k <= hi[2]; ++k) {
    const bool kface = bounds_.d == 3 && std::abs(k - cell[2]) == ring;
    for (int j = lo[1]; j <= hi[1]; ++j) {
      const bool jface = kface || std::abs(j - cell[1]) == ring;
      if (jface) {
        for (int i = lo[0]; i <= hi[0]; ++i) {
          visit_cell(i, j, k, f);
        }
      }
      else {
        if (cell[0] - ring >= 0) {
          visit_cell(cell[0] - ring, j, k, f);
        }
        if (ring > 0 && cell[0] + ring < n_[0]) {
          visit_cell(cell[0] + ring, j, k, f);
        }
      }
    }
  }
}

}  // namespace geoextremes

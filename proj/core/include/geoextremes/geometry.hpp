#pragma once

#include <cmath>
#include <compare>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace geoextremes {

/// Point of R^d for d <= 3. Unused coordinates are zero, so norms and inner products are dimension free.
struct Point {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  double operator[](int i) const
  {
    return i == 0 ? x : (i == 1 ? y : z);
  }
  double &operator[](int i)
  {
    return i == 0 ? x : (i == 1 ? y : z);
  }

  Point &operator+=(const Point &o)
  {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  Point &operator-=(const Point &o)
  {
    x -= o.x;
    y -= o.y;
    z -= o.z;
    return *this;
  }
  Point &operator*=(double s)
  {
    x *= s;
    y *= s;
    z *= s;
    return *this;
  }

  friend Point operator+(Point a, const Point &b)
  {
    return a += b;
  }
  friend Point operator-(Point a, const Point &b)
  {
    return a -= b;
  }
  friend Point operator-(const Point &a)
  {
    return {-a.x, -a.y, -a.z};
  }
  friend Point operator*(Point a, double s)
  {
    return a *= s;
  }
  friend Point operator*(double s, Point a)
  {
    return a *= s;
  }
  friend Point operator/(Point a, double s)
  {
    return a *= 1.0 / s;
  }
  friend bool operator==(const Point &, const Point &) = default;
};

inline double dot(const Point &a, const Point &b)
{
  return a.x * b.x + a.y * b.y + a.z * b.z;
}
inline double norm2(const Point &a)
{
  return dot(a, a);
}
inline double norm(const Point &a)
{
  return std::sqrt(norm2(a));
}
inline double distance2(const Point &a, const Point &b)
{
  return norm2(a - b);
}
inline double distance(const Point &a, const Point &b)
{
  return std::sqrt(distance2(a, b));
}
/// z component of the planar cross product.
inline double cross2(const Point &a, const Point &b)
{
  return a.x * b.y - a.y * b.x;
}
inline Point cross3(const Point &a, const Point &b)
{
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

/// Relative tolerance for geometric predicates.
inline constexpr double kTolGeom = 1e-9;

/// Absolute tolerance used for a configuration whose coordinates are bounded by `max_abs`.
inline double geom_tolerance(double max_abs)
{
  return kTolGeom * (1.0 + max_abs);
}

/**
 * Total order on R^d: first by Euclidean norm, ties broken lexicographically.
 * Equal norms are compared through squared norms, so (1,0) and (0,1) tie on norm.
 */
std::strong_ordering compare_total_order(const Point &a, const Point &b);

struct TotalOrderLess {
  bool operator()(const Point &a, const Point &b) const
  {
    return compare_total_order(a, b) < 0;
  }
};

struct Sphere {
  Point center;
  double radius = 0.0;
  /// Set when the points are affinely dependent. Center is then the origin and radius zero.
  bool degenerate = false;
};

/**
 * The smallest sphere through 1 <= m <= 4 points in general position, with center
 * in their affine hull. For m = 1 this is the point itself with radius zero.
 */
Sphere circumsphere(std::span<const Point> pts);

/// k-dimensional volume of the simplex spanned by k + 1 points (k >= 1).
double simplex_volume(std::span<const Point> pts);

/// Squared volume via the Gram determinant; exact zero for repeated points.
double simplex_volume_squared(std::span<const Point> pts);

enum class CellKind { voronoi_polytope, delaunay_simplex };

/**
 * Compact convex polygon in the plane with nonempty interior. Vertices are stored
 * counter-clockwise. Coordinates are relative to whatever center the caller chose,
 * usually the nucleus or the circumcenter.
 */
class ConvexCell {
 public:
  ConvexCell() = default;
  ConvexCell(std::vector<Point> vertices, CellKind kind);

  std::span<const Point> vertices() const
  {
    return vertices_;
  }
  std::size_t size() const
  {
    return vertices_.size();
  }
  CellKind kind() const
  {
    return kind_;
  }

  double area() const;
  double perimeter() const;
  /// max over vertices of <v, u>.
  double support(const Point &u) const;

  ConvexCell translated(const Point &offset) const;
  ConvexCell scaled(double factor) const;

 private:
  std::vector<Point> vertices_;
  CellKind kind_ = CellKind::voronoi_polytope;
};

/// Regular n-gon of circumradius r centered at the origin, first vertex at angle `phase`.
ConvexCell regular_polygon(int n, double r, double phase = 0.0, CellKind kind = CellKind::voronoi_polytope);

struct CellFunctionals {
  double area = 0.0;
  double perimeter = 0.0;
  /// Radius of the largest ball centered at the origin inside the cell.
  double rho_o = 0.0;
  /// Radius of the smallest ball centered at the origin containing the cell.
  double r_o = 0.0;
  /// (1/d) times the spherical mean of h^d, h the support function.
  double phi = 0.0;
};

/// Distance from the origin to the boundary. Throws OriginNotInterior if the origin is not inside.
double centered_inradius(const ConvexCell &cell);
double centered_circumradius(const ConvexCell &cell);

/// Angular trapezoid rule with n_phi nodes for (1/2) * mean of h^2 on the circle.
double phi_functional(const ConvexCell &cell, int n_phi = 4096);

CellFunctionals cell_functionals(const ConvexCell &cell, int n_phi = 4096);

/// (r_o - rho_o) / (r_o + rho_o) for a cell recentred at its nucleus.
double deviation_voronoi(const ConvexCell &cell);

struct DeviationOptions {
  /// Rotation grid size before golden-section refinement.
  int n_rot = 720;
  /// Match vertices to the reference triangle by all 6 bijections rather than cyclic ones.
  bool all_permutations = false;
};

/**
 * Hausdorff-type distance of a triangle to the regular triangle: recentre at the
 * circumcenter, scale to the unit circle, then minimise over rotations, reflections
 * and vertex matchings the largest distance between matched vertices.
 */
double deviation_delaunay(const ConvexCell &cell, const DeviationOptions &opts = {});

/// Area of the intersection of two disks with radii r1, r2 and center distance dist.
double disk_intersection_area(double r1, double r2, double dist);

enum class SizeKind { volume, centered_inradius, inradius, circumradius, intrinsic_v1 };

/// Size functional; for `inradius` the cell must be a triangle.
double size_functional(SizeKind kind, const ConvexCell &cell);

/// Degree of homogeneity k in Sigma(lambda K) = lambda^k Sigma(K).
int homogeneity(SizeKind kind, int d);

const char *to_string(SizeKind kind);
SizeKind size_kind_from_string(const std::string &name);

}  // namespace geoextremes

#include "geoextremes/geometry.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <numbers>
#include <string>

#include "geoextremes/error.hpp"

namespace geoextremes {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Solves the n x n system a * x = b in place by partial pivoting. Returns false if singular.
template<int N> bool solve_small(std::array<std::array<double, N>, N> a, std::array<double, N> b, int n,
                                 std::array<double, N> &x)
{
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) {
        piv = r;
      }
    }
    if (a[piv][col] == 0.0) {
      return false;
    }
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    for (int r = col + 1; r < n; ++r) {
      const double f = a[r][col] / a[col][col];
      for (int c = col; c < n; ++c) {
        a[r][c] -= f * a[col][c];
      }
      b[r] -= f * b[col];
    }
  }
  for (int r = n - 1; r >= 0; --r) {
    double s = b[r];
    for (int c = r + 1; c < n; ++c) {
      s -= a[r][c] * x[c];
    }
    x[r] = s / a[r][r];
  }
  return true;
}

template<int N> double det_small(std::array<std::array<double, N>, N> a, int n)
{
  double det = 1.0;
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) {
        piv = r;
      }
    }
    if (a[piv][col] == 0.0) {
      return 0.0;
    }
    if (piv != col) {
      std::swap(a[piv], a[col]);
      det = -det;
    }
    det *= a[col][col];
    for (int r = col + 1; r < n; ++r) {
      const double f = a[r][col] / a[col][col];
      for (int c = col; c < n; ++c) {
        a[r][c] -= f * a[col][c];
      }
    }
  }
  return det;
}

using Gram = std::array<std::array<double, 3>, 3>;

Gram gram_matrix(std::span<const Point> pts, int k)
{
  Gram g{};
  for (int i = 0; i < k; ++i) {
    const Point vi = pts[i + 1] - pts[0];
    for (int j = 0; j <= i; ++j) {
      const Point vj = pts[j + 1] - pts[0];
      g[i][j] = g[j][i] = dot(vi, vj);
    }
  }
  return g;
}

double chord(double angle)
{
  return 2.0 * std::abs(std::sin(0.5 * angle));
}

}  // namespace

std::strong_ordering compare_total_order(const Point &a, const Point &b)
{
  const double na = norm2(a);
  const double nb = norm2(b);
  if (na != nb) {
    return na < nb ? std::strong_ordering::less : std::strong_ordering::greater;
  }
  for (int i = 0; i < 3; ++i) {
    if (a[i] != b[i]) {
      return a[i] < b[i] ? std::strong_ordering::less : std::strong_ordering::greater;
    }
  }
  return std::strong_ordering::equal;
}

Sphere circumsphere(std::span<const Point> pts)
{
  const int m = static_cast<int>(pts.size());
  if (m < 1 || m > 4) {
    throw DomainError("circumsphere: need between 1 and 4 points");
  }
  if (m == 1) {
    return {pts[0], 0.0, false};
  }
  const int k = m - 1;
  const Gram g = gram_matrix(pts, k);
  double scale = 1.0;
  for (int i = 0; i < k; ++i) {
    scale *= g[i][i];
  }
  const double det = det_small<3>(g, k);
  if (scale == 0.0 || det <= kTolGeom * kTolGeom * scale) {
    return {Point{}, 0.0, true};
  }
  std::array<double, 3> rhs{};
  for (int i = 0; i < k; ++i) {
    rhs[i] = 0.5 * g[i][i];
  }
  std::array<double, 3> lambda{};
  if (!solve_small<3>(g, rhs, k, lambda)) {
    return {Point{}, 0.0, true};
  }
  Point c = pts[0];
  for (int i = 0; i < k; ++i) {
    c += lambda[i] * (pts[i + 1] - pts[0]);
  }
  double r = 0.0;
  for (const Point &p : pts) {
    r = std::max(r, distance(c, p));
  }
  return {c, r, false};
}

double simplex_volume_squared(std::span<const Point> pts)
{
  const int k = static_cast<int>(pts.size()) - 1;
  if (k < 1 || k > 3) {
    throw DomainError("simplex_volume: need between 2 and 4 points");
  }
  const double det = std::max(0.0, det_small<3>(gram_matrix(pts, k), k));
  double fact = 1.0;
  for (int i = 2; i <= k; ++i) {
    fact *= i;
  }
  return det / (fact * fact);
}

double simplex_volume(std::span<const Point> pts)
{
  return std::sqrt(simplex_volume_squared(pts));
}

ConvexCell::ConvexCell(std::vector<Point> vertices, CellKind kind) : vertices_(std::move(vertices)), kind_(kind)
{
  if (vertices_.size() < 3) {
    throw DomainError("ConvexCell: need at least 3 vertices");
  }
  if (kind_ == CellKind::delaunay_simplex && vertices_.size() != 3) {
    throw DomainError("ConvexCell: a planar simplex has 3 vertices");
  }
  for (Point &v : vertices_) {
    v.z = 0.0;
  }
  double twice_area = 0.0;
  const std::size_t n = vertices_.size();
  for (std::size_t i = 0; i < n; ++i) {
    twice_area += cross2(vertices_[i], vertices_[(i + 1) % n]);
  }
  if (twice_area < 0.0) {
    std::reverse(vertices_.begin(), vertices_.end());
  }
  if (twice_area == 0.0) {
    throw DegenerateSimplex("ConvexCell: zero area");
  }
}

double ConvexCell::area() const
{
  double s = 0.0;
  const std::size_t n = vertices_.size();
  for (std::size_t i = 0; i < n; ++i) {
    s += cross2(vertices_[i], vertices_[(i + 1) % n]);
  }
  return 0.5 * s;
}

double ConvexCell::perimeter() const
{
  double s = 0.0;
  const std::size_t n = vertices_.size();
  for (std::size_t i = 0; i < n; ++i) {
    s += distance(vertices_[i], vertices_[(i + 1) % n]);
  }
  return s;
}

double ConvexCell::support(const Point &u) const
{
  double h = -std::numeric_limits<double>::infinity();
  for (const Point &v : vertices_) {
    h = std::max(h, dot(v, u));
  }
  return h;
}

ConvexCell ConvexCell::translated(const Point &offset) const
{
  ConvexCell out = *this;
  for (Point &v : out.vertices_) {
    v += offset;
  }
  return out;
}

ConvexCell ConvexCell::scaled(double factor) const
{
  if (!(factor > 0.0)) {
    throw DomainError("ConvexCell::scaled: factor must be positive");
  }
  ConvexCell out = *this;
  for (Point &v : out.vertices_) {
    v *= factor;
  }
  return out;
}

ConvexCell regular_polygon(int n, double r, double phase, CellKind kind)
{
  std::vector<Point> v;
  v.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double a = phase + kTwoPi * i / n;
    v.push_back({r * std::cos(a), r * std::sin(a), 0.0});
  }
  return ConvexCell(std::move(v), kind);
}

double centered_inradius(const ConvexCell &cell)
{
  const auto v = cell.vertices();
  const std::size_t n = v.size();
  double rho = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const Point e = v[(i + 1) % n] - v[i];
    // Counter-clockwise orientation: the interior lies to the left of each edge.
    const double dist = cross2(e, -v[i]) / norm(e);
    rho = std::min(rho, dist);
  }
  if (!(rho > 0.0)) {
    throw OriginNotInterior("cell does not contain the origin in its interior");
  }
  return rho;
}

double centered_circumradius(const ConvexCell &cell)
{
  double r = 0.0;
  for (const Point &p : cell.vertices()) {
    r = std::max(r, norm(p));
  }
  return r;
}

double phi_functional(const ConvexCell &cell, int n_phi)
{
  if (n_phi < 3) {
    throw DomainError("phi_functional: n_phi too small");
  }
  double acc = 0.0;
  for (int j = 0; j < n_phi; ++j) {
    const double a = kTwoPi * j / n_phi;
    const double h = cell.support({std::cos(a), std::sin(a), 0.0});
    acc += h * h;
  }
  return 0.5 * acc / n_phi;
}

CellFunctionals cell_functionals(const ConvexCell &cell, int n_phi)
{
  CellFunctionals f;
  f.area = cell.area();
  f.perimeter = cell.perimeter();
  f.rho_o = centered_inradius(cell);
  f.r_o = centered_circumradius(cell);
  f.phi = phi_functional(cell, n_phi);
  return f;
}

double deviation_voronoi(const ConvexCell &cell)
{
  const double rho = centered_inradius(cell);
  const double r = centered_circumradius(cell);
  return (r - rho) / (r + rho);
}

double deviation_delaunay(const ConvexCell &cell, const DeviationOptions &opts)
{
  const auto v = cell.vertices();
  if (v.size() != 3) {
    throw DegenerateSimplex("deviation_delaunay: cell is not a triangle");
  }
  const Sphere s = circumsphere(v);
  if (s.degenerate || !(s.radius > 0.0)) {
    throw DegenerateSimplex("deviation_delaunay: degenerate triangle");
  }
  std::array<double, 3> alpha{};
  for (int i = 0; i < 3; ++i) {
    const Point w = v[i] - s.center;
    alpha[i] = std::atan2(w.y, w.x);
  }
  const int n_rot = std::max(opts.n_rot, 12);
  const double step = kTwoPi / n_rot;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;

  std::vector<std::array<int, 3>> matchings = {{0, 1, 2}, {1, 2, 0}, {2, 0, 1}};
  if (opts.all_permutations) {
    matchings.push_back({0, 2, 1});
    matchings.push_back({2, 1, 0});
    matchings.push_back({1, 0, 2});
  }

  double best = std::numeric_limits<double>::infinity();
  std::vector<double> grid(n_rot);
  for (int reflect = 0; reflect < 2; ++reflect) {
    std::array<double, 3> a = alpha;
    if (reflect == 1) {
      for (double &x : a) {
        x = -x;
      }
    }
    // Cyclic matchings are taken along the counter-clockwise vertex order.
    std::array<int, 3> order = {0, 1, 2};
    std::sort(order.begin(), order.end(), [&](int i, int j) { return a[i] < a[j]; });
    for (const auto &m : matchings) {
      std::array<double, 3> beta{};
      for (int j = 0; j < 3; ++j) {
        beta[j] = kTwoPi * j / 3.0 - a[order[m[j]]];
      }
      auto f = [&](double theta) {
        double r = 0.0;
        for (int j = 0; j < 3; ++j) {
          r = std::max(r, chord(beta[j] - theta));
        }
        return r;
      };
      double gmin = std::numeric_limits<double>::infinity();
      for (int g = 0; g < n_rot; ++g) {
        grid[g] = f(step * g);
        gmin = std::min(gmin, grid[g]);
      }
      for (int g = 0; g < n_rot; ++g) {
        const double prev = grid[(g + n_rot - 1) % n_rot];
        const double next = grid[(g + 1) % n_rot];
        if (grid[g] > prev || grid[g] > next || grid[g] > gmin + step) {
          continue;
        }
        double lo = step * (g - 1);
        double hi = step * (g + 1);
        double x1 = hi - inv_phi * (hi - lo);
        double x2 = lo + inv_phi * (hi - lo);
        double f1 = f(x1);
        double f2 = f(x2);
        for (int it = 0; it < 80 && hi - lo > 1e-13; ++it) {
          if (f1 <= f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
          }
          else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
          }
        }
        best = std::min({best, grid[g], f1, f2});
      }
    }
  }
  return best;
}

double size_functional(SizeKind kind, const ConvexCell &cell)
{
  switch (kind) {
    case SizeKind::volume:
      return cell.area();
    case SizeKind::centered_inradius:
      return centered_inradius(cell);
    case SizeKind::inradius:
      if (cell.size() != 3) {
        throw DomainError("size_functional: inradius is only defined here for triangles");
      }
      return 2.0 * cell.area() / cell.perimeter();
    case SizeKind::circumradius:
      return centered_circumradius(cell);
    case SizeKind::intrinsic_v1:
      return 0.5 * cell.perimeter();
  }
  throw DomainError("size_functional: unknown kind");
}

int homogeneity(SizeKind kind, int d)
{
  return kind == SizeKind::volume ? d : 1;
}

double disk_intersection_area(double r1, double r2, double dist)
{
  if (r1 <= 0.0 || r2 <= 0.0 || dist >= r1 + r2) {
    return 0.0;
  }
  const double rmin = std::min(r1, r2);
  if (dist <= std::abs(r1 - r2)) {
    return std::numbers::pi * rmin * rmin;
  }
  // Two circular segments cut by the radical line.
  const double c1 = std::clamp((dist * dist + r1 * r1 - r2 * r2) / (2.0 * dist * r1), -1.0, 1.0);
  const double c2 = std::clamp((dist * dist + r2 * r2 - r1 * r1) / (2.0 * dist * r2), -1.0, 1.0);
  const double a1 = std::acos(c1);
  const double a2 = std::acos(c2);
  return r1 * r1 * (a1 - c1 * std::sqrt(1.0 - c1 * c1)) + r2 * r2 * (a2 - c2 * std::sqrt(1.0 - c2 * c2));
}

const char *to_string(SizeKind kind)
{
  switch (kind) {
    case SizeKind::volume:
      return "volume";
    case SizeKind::centered_inradius:
      return "centered_inradius";
    case SizeKind::inradius:
      return "inradius";
    case SizeKind::circumradius:
      return "circumradius";
    case SizeKind::intrinsic_v1:
      return "intrinsic_v1";
  }
  return "?";
}

SizeKind size_kind_from_string(const std::string &name)
{
  for (SizeKind k : {SizeKind::volume, SizeKind::centered_inradius, SizeKind::inradius, SizeKind::circumradius,
                     SizeKind::intrinsic_v1})
  {
    if (name == to_string(k)) {
      return k;
    }
  }
  throw ConfigError("unknown size functional '" + name + "'");
}

}  // namespace geoextremes

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "geoextremes/error.hpp"
#include "geoextremes/geometry.hpp"

using namespace geoextremes;

namespace {

constexpr double kPi = std::numbers::pi;

/* Closed form of (1/2) * mean of h^2 over the circle for a polygon: on the normal
 * cone of vertex v, h(theta) = |v| cos(theta - arg v). */
double phi_exact(const ConvexCell &cell)
{
  const auto v = cell.vertices();
  const std::size_t n = v.size();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Point prev = v[(i + n - 1) % n];
    const Point cur = v[i];
    const Point next = v[(i + 1) % n];
    const Point e_in = cur - prev;
    const Point e_out = next - cur;
    // outward normals of the two edges meeting at cur
    double a0 = std::atan2(-e_in.x, e_in.y);
    double a1 = std::atan2(-e_out.x, e_out.y);
    if (a1 < a0) {
      a1 += 2 * kPi;
    }
    const double r2 = norm2(cur);
    const double ph = std::atan2(cur.y, cur.x);
    auto prim = [&](double t) { return 0.5 * r2 * ((t - ph) + 0.5 * std::sin(2 * (t - ph))); };
    total += prim(a1) - prim(a0);
  }
  return 0.5 * total / (2 * kPi);
}

/* Monte Carlo estimate of the area of {r u : r <= h(u)}: y belongs to it iff the
 * line <w, y> = |y|^2 does not separate the origin side from the whole polygon. */
double phi_monte_carlo(const ConvexCell &cell, int n, std::mt19937_64 &rng)
{
  double rmax = 0.0;
  for (const Point &p : cell.vertices()) {
    rmax = std::max(rmax, norm(p));
  }
  std::uniform_real_distribution<double> u(-rmax, rmax);
  int hits = 0;
  for (int i = 0; i < n; ++i) {
    const Point y{u(rng), u(rng), 0.0};
    const double q = norm2(y);
    bool inside = false;
    for (const Point &w : cell.vertices()) {
      if (dot(w, y) >= q) {
        inside = true;
        break;
      }
    }
    hits += inside;
  }
  const double area = 4 * rmax * rmax * hits / n;
  return area / (2 * kPi);
}

double chord(double a)
{
  return 2 * std::abs(std::sin(a / 2));
}

/* Brute force: every rotation on a fine grid, both orientations, all 6 matchings. */
double deviation_delaunay_oracle(const ConvexCell &cell, int n_grid)
{
  const auto v = cell.vertices();
  const Sphere s = circumsphere(v);
  double best = 1e300;
  int perm[3] = {0, 1, 2};
  do {
    for (int refl = 0; refl < 2; ++refl) {
      double beta[3];
      for (int j = 0; j < 3; ++j) {
        const Point w = v[perm[j]] - s.center;
        const double a = std::atan2(w.y, w.x);
        beta[j] = 2 * kPi * j / 3 - (refl ? -a : a);
      }
      for (int g = 0; g < n_grid; ++g) {
        const double th = 2 * kPi * g / n_grid;
        double m = 0;
        for (int j = 0; j < 3; ++j) {
          m = std::max(m, chord(beta[j] - th));
        }
        best = std::min(best, m);
      }
    }
  } while (std::next_permutation(perm, perm + 3));
  return best;
}

std::vector<Point> convex_hull(std::vector<Point> pts)
{
  std::sort(pts.begin(), pts.end(), [](const Point &a, const Point &b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  std::vector<Point> hull(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && cross2(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= 0) {
      --k;
    }
    hull[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i > 0; --i) {
    while (k >= t && cross2(hull[k - 1] - hull[k - 2], pts[i - 1] - hull[k - 2]) <= 0) {
      --k;
    }
    hull[k++] = pts[i - 1];
  }
  hull.resize(k - 1);
  return hull;
}

/* Intrinsic volume V1 from the Steiner formula: A(K + eps B) = A + 2 eps V1 + pi eps^2,
 * with the Minkowski sum computed as a convex hull of vertex sums. */
double v1_steiner(const ConvexCell &cell, double eps)
{
  std::vector<Point> pts;
  const int m = 4096;
  for (const Point &p : cell.vertices()) {
    for (int j = 0; j < m; ++j) {
      const double a = 2 * kPi * (j + 0.5) / m;
      pts.push_back({p.x + eps * std::cos(a), p.y + eps * std::sin(a), 0});
    }
  }
  const std::vector<Point> hull = convex_hull(pts);
  double a2 = 0;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    a2 += cross2(hull[i], hull[(i + 1) % hull.size()]);
  }
  // the polygonal disk of the sum has area m/2 sin(2pi/m) eps^2
  const double disk = 0.5 * m * std::sin(2 * kPi / m) * eps * eps;
  return (0.5 * a2 - cell.area() - disk) / (2 * eps);
}

ConvexCell random_convex_cell(std::mt19937_64 &rng)
{
  std::uniform_real_distribution<double> ang(0, 2 * kPi);
  std::uniform_real_distribution<double> rad(0.5, 2.0);
  std::vector<double> a(7);
  for (double &x : a) {
    x = ang(rng);
  }
  std::sort(a.begin(), a.end());
  std::vector<Point> v;
  for (double x : a) {
    const double r = rad(rng);
    v.push_back({r * std::cos(x), r * std::sin(x), 0});
  }
  return ConvexCell(convex_hull(v), CellKind::voronoi_polytope);
}

}  // namespace

TEST(TotalOrder, NormFirstThenLexicographic)
{
  EXPECT_TRUE(compare_total_order({1, 0}, {2, 0}) < 0);
  EXPECT_TRUE(compare_total_order({0, 1}, {1, 0}) < 0);
  EXPECT_TRUE(compare_total_order({0.5, -0.5}, {0.5, -0.5}) == 0);
  EXPECT_TRUE(compare_total_order({0, 0, 1}, {0, 1, 0}) < 0);
  EXPECT_TRUE(compare_total_order({0, 1, 0}, {1, 0, 0}) < 0);
}

TEST(TotalOrder, IsStrictAndTransitive)
{
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> u(-3, 3);
  std::vector<Point> pts;
  for (int i = 0; i < 200; ++i) {
    pts.push_back({double(u(rng)), double(u(rng)), 0});
  }
  for (const Point &a : pts) {
    for (const Point &b : pts) {
      const auto ab = compare_total_order(a, b);
      EXPECT_EQ(ab == 0, a == b);
      EXPECT_EQ(ab < 0, compare_total_order(b, a) > 0);
    }
  }
  std::sort(pts.begin(), pts.end(), TotalOrderLess{});
  for (std::size_t i = 1; i < pts.size(); ++i) {
    EXPECT_LE(norm(pts[i - 1]), norm(pts[i]));
  }
}

TEST(Circumsphere, Examples)
{
  const Point tri[] = {{0, 0}, {2, 0}, {0, 2}};
  const Sphere s = circumsphere(tri);
  EXPECT_FALSE(s.degenerate);
  EXPECT_NEAR(s.center.x, 1, 1e-12);
  EXPECT_NEAR(s.center.y, 1, 1e-12);
  EXPECT_NEAR(s.radius, std::sqrt(2.0), 1e-12);

  const Point line[] = {{0, 0}, {1, 0}, {2, 0}};
  EXPECT_TRUE(circumsphere(line).degenerate);

  const Point one[] = {{3, 4}};
  const Sphere p = circumsphere(one);
  EXPECT_EQ(p.center, (Point{3, 4}));
  EXPECT_EQ(p.radius, 0.0);

  const Point two[] = {{0, 0, 0}, {2, 0, 0}};
  const Sphere q = circumsphere(two);
  EXPECT_NEAR(q.center.x, 1, 1e-15);
  EXPECT_NEAR(q.radius, 1, 1e-15);
}

TEST(Circumsphere, EquidistantRandom)
{
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n01;
  for (int m = 2; m <= 4; ++m) {
    for (int rep = 0; rep < 200; ++rep) {
      std::vector<Point> p(m);
      double mx = 0;
      for (Point &x : p) {
        x = {n01(rng), n01(rng), n01(rng)};
        mx = std::max({mx, std::abs(x.x), std::abs(x.y), std::abs(x.z)});
      }
      const Sphere s = circumsphere(p);
      ASSERT_FALSE(s.degenerate);
      for (const Point &x : p) {
        EXPECT_NEAR(distance(x, s.center), s.radius, geom_tolerance(mx) * (1 + s.radius));
      }
      // center lies in the affine hull: residual after projection is tiny
      if (m == 3) {
        const Point nrm = cross3(p[1] - p[0], p[2] - p[0]);
        EXPECT_NEAR(dot(s.center - p[0], nrm) / norm(nrm), 0.0, 1e-9);
      }
    }
  }
}

TEST(SimplexVolume, Examples)
{
  const Point tri[] = {{0, 0}, {1, 0}, {0, 1}};
  EXPECT_NEAR(simplex_volume(tri), 0.5, 1e-15);
  const Point line[] = {{0, 0}, {1, 0}, {2, 0}};
  EXPECT_EQ(simplex_volume(line), 0.0);
  const Point seg[] = {{1, 1, 1}, {2, 3, 3}};
  EXPECT_NEAR(simplex_volume(seg), 3.0, 1e-15);
  const Point tet[] = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  EXPECT_NEAR(simplex_volume(tet), 1.0 / 6.0, 1e-15);
}

TEST(SimplexVolume, MatchesTripleProduct)
{
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n01;
  for (int rep = 0; rep < 100; ++rep) {
    Point p[4];
    for (Point &x : p) {
      x = {n01(rng), n01(rng), n01(rng)};
    }
    const double det = dot(p[1] - p[0], cross3(p[2] - p[0], p[3] - p[0]));
    EXPECT_NEAR(simplex_volume(p), std::abs(det) / 6, 1e-12);
  }
}

TEST(ConvexCell, OrientationAndArea)
{
  ConvexCell sq({{1, 1}, {1, -1}, {-1, -1}, {-1, 1}}, CellKind::voronoi_polytope);
  EXPECT_NEAR(sq.area(), 4, 1e-15);
  EXPECT_NEAR(sq.perimeter(), 8, 1e-15);
  EXPECT_THROW(ConvexCell({{0, 0}, {1, 0}, {2, 0}}, CellKind::delaunay_simplex), DegenerateSimplex);
}

TEST(CellFunctionals, Square)
{
  ConvexCell sq({{1, 1}, {-1, 1}, {-1, -1}, {1, -1}}, CellKind::voronoi_polytope);
  const CellFunctionals f = cell_functionals(sq);
  EXPECT_NEAR(f.area, 4, 1e-14);
  EXPECT_NEAR(f.rho_o, 1, 1e-14);
  EXPECT_NEAR(f.r_o, std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(f.phi, phi_exact(sq), 1e-6 * f.phi);
}

TEST(CellFunctionals, DiskLimit)
{
  const ConvexCell disk = regular_polygon(4096, 1.0);
  EXPECT_NEAR(phi_functional(disk), 0.5, 1e-6);
  const ConvexCell disk3 = regular_polygon(4096, 3.0, 0.1);
  EXPECT_NEAR(centered_inradius(disk3), 3.0, 1e-6);
}

TEST(CellFunctionals, OriginOutside)
{
  ConvexCell sq({{1, 1}, {3, 1}, {3, 3}, {1, 3}}, CellKind::voronoi_polytope);
  EXPECT_THROW(cell_functionals(sq), OriginNotInterior);
}

TEST(CellFunctionals, PhiAgainstClosedFormAndMonteCarlo)
{
  std::mt19937_64 rng(11);
  int checked = 0;
  while (checked < 10) {
    const ConvexCell c = random_convex_cell(rng);
    try {
      centered_inradius(c);
    }
    catch (const OriginNotInterior &) {
      continue;
    }
    ++checked;
    const double phi = phi_functional(c);
    EXPECT_NEAR(phi, phi_exact(c), 1e-6 * phi);
    EXPECT_NEAR(phi, phi_monte_carlo(c, 400000, rng), 0.02 * phi);
  }
}

TEST(CellFunctionals, Homogeneity)
{
  std::mt19937_64 rng(5);
  const ConvexCell c = random_convex_cell(rng);
  const double lam = 1.7;
  const ConvexCell s = c.scaled(lam);
  for (SizeKind k : {SizeKind::volume, SizeKind::circumradius, SizeKind::intrinsic_v1}) {
    EXPECT_NEAR(size_functional(k, s), std::pow(lam, homogeneity(k, 2)) * size_functional(k, c), 1e-12);
  }
  EXPECT_NEAR(phi_functional(s), lam * lam * phi_functional(c), 1e-12);
}

TEST(SizeFunctional, IntrinsicVolumeSteiner)
{
  std::mt19937_64 rng(9);
  for (int rep = 0; rep < 5; ++rep) {
    const ConvexCell c = random_convex_cell(rng);
    EXPECT_NEAR(size_functional(SizeKind::intrinsic_v1, c), v1_steiner(c, 1e-3), 1e-5);
  }
}

TEST(SizeFunctional, TriangleInradius)
{
  ConvexCell t({{0, 0}, {3, 0}, {0, 4}}, CellKind::delaunay_simplex);
  EXPECT_NEAR(size_functional(SizeKind::inradius, t), 1.0, 1e-14);
  EXPECT_NEAR(size_functional(SizeKind::volume, t), 6.0, 1e-14);
}

TEST(Deviation, RegularShapesVanish)
{
  const ConvexCell disk = regular_polygon(4096, 2.0);
  EXPECT_NEAR(deviation_voronoi(disk), 0.0, 1e-6);
  for (double phase : {0.0, 0.3, 1.9}) {
    const ConvexCell tri = regular_polygon(3, 1.5, phase, CellKind::delaunay_simplex);
    EXPECT_NEAR(deviation_delaunay(tri), 0.0, 1e-6);
  }
}

TEST(Deviation, VoronoiSquare)
{
  ConvexCell sq({{1, 1}, {-1, 1}, {-1, -1}, {1, -1}}, CellKind::voronoi_polytope);
  const double s2 = std::sqrt(2.0);
  EXPECT_NEAR(deviation_voronoi(sq), (s2 - 1) / (s2 + 1), 1e-14);
}

TEST(Deviation, DelaunayAgainstBruteForce)
{
  std::mt19937_64 rng(21);
  std::normal_distribution<double> n01;
  for (int rep = 0; rep < 40; ++rep) {
    const ConvexCell t({{n01(rng), n01(rng)}, {n01(rng), n01(rng)}, {n01(rng), n01(rng)}},
                       CellKind::delaunay_simplex);
    const double oracle = deviation_delaunay_oracle(t, 100000);
    const double fast = deviation_delaunay(t, {720, true});
    EXPECT_NEAR(fast, oracle, 1e-4);
    EXPECT_LE(fast, oracle + 1e-12);
    const double cyclic = deviation_delaunay(t);
    EXPECT_GE(cyclic, fast - 1e-12);
    // invariance under similarity
    EXPECT_NEAR(deviation_delaunay(t.scaled(3.0).translated({5, -2})), cyclic, 1e-9);
  }
}

TEST(Deviation, DegenerateTriangleRejected)
{
  EXPECT_THROW(ConvexCell({{0, 0}, {1, 1}, {2, 2}}, CellKind::delaunay_simplex), DegenerateSimplex);
}

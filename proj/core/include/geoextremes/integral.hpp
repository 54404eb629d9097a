#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <string>

#include "geoextremes/geometry.hpp"
#include "geoextremes/rng.hpp"

namespace geoextremes {

enum class TestFunctionKind {
  /// exp(-sum |x_i|^2)
  gaussian,
  /// 1{all x_i in [0,1]^d}
  unit_cube,
  zero,
};

/// Named integrand on (R^d)^m used by the integral identity checks.
struct TestFunction {
  TestFunctionKind kind = TestFunctionKind::gaussian;

  double operator()(std::span<const Point> x, int d) const;
  /// Integral over (R^d)^m.
  double exact_integral(int d, int m) const;
  /// Radius of a ball around the origin that carries (almost all of) the mass of one point.
  double reach(int d) const;
  /// Typical largest distance between two points where f is not negligible.
  double spread(int d) const;
  const char *name() const;

  static TestFunction from_name(const std::string &name);
};

struct IdentityCheck {
  double lhs = 0.0;
  double lhs_se = 0.0;
  double rhs = 0.0;
  double rhs_se = 0.0;
  /// Closed form of both sides.
  double exact = std::numeric_limits<double>::quiet_NaN();
  double z_score = 0.0;
};

/// Constant of the affine Blaschke-Petkantschin formula with probability measures on G(d,k) and S_L.
double bp_linear_constant(int d, int k);
/// Constant of the subsphere formula with probability measures on G(Q^perp, m), S_L and S_{L+Q}.
double bp_subsphere_constant(int d, int k, int m);

/// (d+1)-point spherical formula, d = 2 or 3.
IdentityCheck verify_bp_spherical(int d, const TestFunction &f, std::size_t n_mc, const SeedSpec &seed);

/// (k+1)-point formula over k-dimensional spheres in random subspaces, d in {2,3}, 1 <= k <= d.
IdentityCheck verify_bp_linear(int d, int k, const TestFunction &f, std::size_t n_mc, const SeedSpec &seed);

/**
 * m-point formula for spheres through a fixed (d-k-1)-sphere of radius r0 centered at
 * the origin inside Q = span(e_{k+1}, ..., e_d). L runs over the m-dimensional
 * subspaces of the orthogonal complement of Q.
 */
IdentityCheck verify_bp_subsphere(int d, int k, int m, double r0, const TestFunction &f, std::size_t n_mc,
                                  const SeedSpec &seed);

/// Modified Bessel function of the second kind by its integral representation.
class BesselK {
 public:
  explicit BesselK(double nu) : nu_(nu) {}

  double operator()(double x) const;
  /// Value with the truncation point multiplied by `stretch`; used to certify the truncation.
  double evaluate(double x, double stretch) const;
  /// Upper integration limit: beyond it the integrand is below 1e-22 of its value at zero.
  static double truncation(double x);
  double nu() const
  {
    return nu_;
  }

 private:
  double nu_;
};

/// K_{1/6}.
double bessel_k16(double x);

/// Density of the area of the typical planar Poisson-Delaunay triangle at intensity gamma.
double rathie_density(double v, double gamma);
/// P(area > v) for the typical planar Poisson-Delaunay triangle at intensity gamma.
double rathie_survival(double v, double gamma);
/// Solves rathie_survival(v, gamma) = p for 0 < p < 1.
double rathie_quantile(double p, double gamma);

}  // namespace geoextremes

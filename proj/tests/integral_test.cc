#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "geoextremes/error.hpp"
#include "geoextremes/integral.hpp"
#include "geoextremes/numerics.hpp"

using namespace geoextremes;

namespace {

constexpr double kPi = std::numbers::pi;
const TestFunction kGauss{TestFunctionKind::gaussian};
const TestFunction kCube{TestFunctionKind::unit_cube};
const TestFunction kZero{TestFunctionKind::zero};

void expect_identity(const IdentityCheck &c, const char *what)
{
  SCOPED_TRACE(what);
  EXPECT_LE(std::abs(c.z_score), 4.0);
  EXPECT_LE(std::abs(c.lhs - c.exact), 4 * c.lhs_se + 1e-12);
  EXPECT_LE(std::abs(c.rhs - c.exact), 4 * c.rhs_se + 1e-12);
}

/* Composite Simpson of the unit-intensity area density written with the standard
 * library Bessel function, after u = v + w^3 to smooth the u^{2/3} behaviour at 0. */
double survival_oracle(double v)
{
  const double c = 2 * kPi / (3 * std::sqrt(3.0));
  auto g = [&](double u) {
    if (u <= 0) {
      return 0.0;
    }
    const double k = std::cyl_bessel_k(1.0 / 6.0, c * u);
    return 8 * kPi / 9 * u * k * k;
  };
  auto gw = [&](double w) { return 3 * w * w * g(v + w * w * w); };
  const int n = 200000;
  const double b = std::cbrt(40.0);
  const double h = b / n;
  double s = gw(0) + gw(b);
  for (int i = 1; i < n; ++i) {
    s += gw(i * h) * (i % 2 ? 4 : 2);
  }
  return s * h / 3;
}

}  // namespace

TEST(TestFunctions, ExactIntegrals)
{
  EXPECT_NEAR(kGauss.exact_integral(2, 3), std::pow(kPi, 3.0), 1e-9);
  EXPECT_EQ(kCube.exact_integral(3, 4), 1.0);
  EXPECT_EQ(kZero.exact_integral(2, 2), 0.0);
  const Point x[] = {{0.5, 0.5}, {1.5, 0.5}};
  EXPECT_EQ(kCube(x, 2), 0.0);
  EXPECT_NEAR(kGauss(x, 2), std::exp(-0.5 - 2.5), 1e-15);
}

TEST(BlaschkePetkantschin, Constants)
{
  // probability normalised Grassmannians carry the mass of the rotation invariant measure
  EXPECT_NEAR(grassmannian_mass(2, 1), kPi, 1e-14);
  EXPECT_NEAR(grassmannian_mass(3, 1), 2 * kPi, 1e-14);
  EXPECT_NEAR(grassmannian_mass(3, 2), 2 * kPi, 1e-14);
  EXPECT_NEAR(grassmannian_mass(3, 3), 1.0, 1e-14);
  EXPECT_NEAR(bp_linear_constant(2, 1), 4 * kPi, 1e-13);
  EXPECT_NEAR(bp_linear_constant(2, 2), std::pow(2 * kPi, 3), 1e-10);
  EXPECT_NEAR(bp_subsphere_constant(2, 1, 1), 4 * kPi, 1e-13);
  EXPECT_NEAR(bp_subsphere_constant(2, 2, 1), 4 * kPi, 1e-13);
  EXPECT_NEAR(bp_subsphere_constant(2, 2, 2), 8 * kPi * kPi * kPi, 1e-10);
}

TEST(BlaschkePetkantschin, SphericalPlane)
{
  expect_identity(verify_bp_spherical(2, kGauss, 200000, {1, 0}), "gaussian");
  expect_identity(verify_bp_spherical(2, kCube, 200000, {1, 1}), "cube");
  const IdentityCheck z = verify_bp_spherical(2, kZero, 1000, {1, 2});
  EXPECT_EQ(z.lhs, 0.0);
  EXPECT_EQ(z.rhs, 0.0);
  EXPECT_EQ(z.z_score, 0.0);
}

TEST(BlaschkePetkantschin, SphericalSpace)
{
  expect_identity(verify_bp_spherical(3, kGauss, 200000, {2, 0}), "gaussian");
}

TEST(BlaschkePetkantschin, Linear)
{
  expect_identity(verify_bp_linear(2, 1, kGauss, 200000, {3, 0}), "d2 k1 gaussian");
  expect_identity(verify_bp_linear(2, 1, kCube, 200000, {3, 1}), "d2 k1 cube");
  expect_identity(verify_bp_linear(2, 2, kGauss, 200000, {3, 2}), "d2 k2 gaussian");
  expect_identity(verify_bp_linear(3, 1, kGauss, 200000, {3, 3}), "d3 k1 gaussian");
  expect_identity(verify_bp_linear(3, 2, kGauss, 200000, {3, 4}), "d3 k2 gaussian");
  const IdentityCheck z = verify_bp_linear(3, 2, kZero, 1000, {3, 5});
  EXPECT_EQ(z.rhs, 0.0);
}

TEST(BlaschkePetkantschin, LinearFullDimensionMatchesSpherical)
{
  const IdentityCheck a = verify_bp_linear(2, 2, kCube, 200000, {4, 0});
  const IdentityCheck b = verify_bp_spherical(2, kCube, 200000, {4, 1});
  EXPECT_LE(std::abs(a.rhs - b.rhs), 4 * std::hypot(a.rhs_se, b.rhs_se));
}

TEST(BlaschkePetkantschin, Subsphere)
{
  expect_identity(verify_bp_subsphere(2, 1, 1, 0.7, kGauss, 200000, {5, 0}), "d2 k1 m1 r0");
  expect_identity(verify_bp_subsphere(2, 1, 1, 0.0, kGauss, 200000, {5, 1}), "d2 k1 m1");
  expect_identity(verify_bp_subsphere(2, 2, 2, 0.0, kGauss, 200000, {5, 2}), "d2 k2 m2");
  expect_identity(verify_bp_subsphere(2, 2, 1, 0.0, kCube, 200000, {5, 3}), "d2 k2 m1 cube");
  expect_identity(verify_bp_subsphere(3, 1, 1, 0.5, kGauss, 200000, {5, 4}), "d3 k1 m1 r0");
  expect_identity(verify_bp_subsphere(3, 2, 2, 0.5, kGauss, 200000, {5, 5}), "d3 k2 m2 r0");
  const IdentityCheck z = verify_bp_subsphere(2, 1, 1, 0.3, kZero, 1000, {5, 6});
  EXPECT_EQ(z.rhs, 0.0);
  EXPECT_THROW(verify_bp_subsphere(2, 2, 1, 0.5, kGauss, 10, {5, 7}), DomainError);
  EXPECT_THROW(verify_bp_subsphere(2, 1, 2, 0.0, kGauss, 10, {5, 7}), DomainError);
}

TEST(BesselK, HalfOrderClosedForm)
{
  const BesselK k(0.5);
  for (double x : {0.01, 0.3, 1.0, 4.0, 25.0}) {
    const double exact = std::sqrt(kPi / (2 * x)) * std::exp(-x);
    EXPECT_NEAR(k(x), exact, 1e-11 * exact);
  }
}

TEST(BesselK, SixthOrderAgainstLibrary)
{
  for (double x : {1e-3, 0.05, 0.5, 1.0, 3.0, 10.0, 40.0}) {
    const double ref = std::cyl_bessel_k(1.0 / 6.0, x);
    EXPECT_NEAR(bessel_k16(x), ref, 1e-10 * ref);
  }
}

TEST(BesselK, TruncationCertified)
{
  const BesselK k(1.0 / 6.0);
  for (double x : {1e-3, 0.1, 1.0, 10.0, 50.0}) {
    const double a = k.evaluate(x, 1.0);
    const double b = k.evaluate(x, 2.0);
    EXPECT_LT(std::abs(a - b), 1e-10 * a);
  }
}

TEST(BesselK, PositiveDecreasingAndAsymptotic)
{
  double prev = bessel_k16(0.01);
  for (double x = 0.02; x < 30; x *= 1.3) {
    const double v = bessel_k16(x);
    EXPECT_GT(v, 0.0);
    EXPECT_LT(v, prev);
    prev = v;
  }
  for (double x : {20.0, 30.0, 60.0}) {
    EXPECT_NEAR(bessel_k16(x) / (std::sqrt(kPi / (2 * x)) * std::exp(-x)), 1.0, 0.01);
  }
}

TEST(Rathie, TotalMassAndMean)
{
  EXPECT_NEAR(rathie_survival(0.0, 1.0), 1.0, 1e-8);
  // mean area is 1 / (2 gamma): integrate v * density
  for (double gamma : {1.0, 3.0}) {
    const double mean = integrate([&](double v) { return v * rathie_density(v, gamma); }, 0.0, 40.0 / gamma, 1e-10);
    EXPECT_NEAR(mean, 0.5 / gamma, 1e-6);
  }
}

TEST(Rathie, MatchesIndependentQuadrature)
{
  for (double v : {0.0, 0.1, 0.5, 1.0, 2.0}) {
    EXPECT_NEAR(rathie_survival(v, 1.0), survival_oracle(v), 1e-8);
  }
}

TEST(Rathie, TailMonotoneAndDerivative)
{
  EXPECT_LT(rathie_survival(10.0, 1.0), 1e-6);
  double prev = 1.0;
  for (double v = 0.05; v < 6; v += 0.25) {
    const double s = rathie_survival(v, 1.0);
    EXPECT_LT(s, prev);
    prev = s;
    const double h = 1e-4;
    const double fd = (rathie_survival(v + h, 1.0) - rathie_survival(v - h, 1.0)) / (2 * h);
    EXPECT_NEAR(fd, -rathie_density(v, 1.0), 1e-5 * rathie_density(v, 1.0));
  }
}

TEST(Rathie, ScalingAndQuantile)
{
  EXPECT_NEAR(rathie_survival(0.4, 2.5), rathie_survival(1.0, 1.0), 1e-12);
  for (double p : {0.5, 0.05, 0.005}) {
    const double v = rathie_quantile(p, 1.0);
    EXPECT_NEAR(rathie_survival(v, 1.0), p, 1e-9 * std::max(p, 0.01));
  }
}

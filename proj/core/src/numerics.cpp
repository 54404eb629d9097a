#include "geoextremes/numerics.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/poisson.hpp>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>

#include "geoextremes/error.hpp"

namespace geoextremes {

double unit_ball_volume(int j)
{
  if (j < 0) {
    throw DomainError("unit_ball_volume: negative dimension");
  }
  return std::pow(std::numbers::pi, 0.5 * j) / std::tgamma(0.5 * j + 1.0);
}

double unit_sphere_area(int j)
{
  if (j < 1) {
    throw DomainError("unit_sphere_area: dimension must be >= 1");
  }
  return j * unit_ball_volume(j);
}

double grassmannian_mass(int n, int m)
{
  if (m < 0 || m > n) {
    throw DomainError("grassmannian_mass: need 0 <= m <= n");
  }
  double num = 1.0;
  double den = 1.0;
  for (int j = n - m + 1; j <= n; ++j) {
    num *= unit_sphere_area(j);
  }
  for (int j = 1; j <= m; ++j) {
    den *= unit_sphere_area(j);
  }
  return num / den;
}

double log_factorial(int k)
{
  return std::lgamma(static_cast<double>(k) + 1.0);
}

double integrate(const std::function<double(double)> &f, double a, double b, double rel_tol,
                 unsigned max_depth)
{
  if (a == b) {
    return 0.0;
  }
  double err = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 21>::integrate(f, a, b, max_depth, rel_tol, &err);
}

double integrate_to_infinity(const std::function<double(double)> &f, double a, double rel_tol)
{
  boost::math::quadrature::exp_sinh<double> integrator;
  return integrator.integrate([&](double x) { return f(x); }, a, std::numeric_limits<double>::infinity(),
                              rel_tol);
}

double poisson_pmf(int k, double mean)
{
  if (k < 0) {
    return 0.0;
  }
  if (mean == 0.0) {
    return k == 0 ? 1.0 : 0.0;
  }
  return std::exp(k * std::log(mean) - mean - log_factorial(k));
}

double poisson_cdf(int k, double mean)
{
  if (k < 0) {
    return 0.0;
  }
  if (mean == 0.0) {
    return 1.0;
  }
  return boost::math::cdf(boost::math::poisson_distribution<double>(mean), static_cast<double>(k));
}

double chi_square_survival(double x, double dof)
{
  if (x <= 0.0) {
    return 1.0;
  }
  return boost::math::cdf(boost::math::complement(boost::math::chi_squared_distribution<double>(dof), x));
}

double kolmogorov_pvalue(double d, std::size_t n)
{
  if (n == 0) {
    return 1.0;
  }
  const double sn = std::sqrt(static_cast<double>(n));
  // Stephens' finite sample correction on the limiting distribution.
  const double x = d * (sn + 0.12 + 0.11 / sn);
  if (x < 0.2) {
    return 1.0;
  }
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-17) {
      break;
    }
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

double bisect(const std::function<double(double)> &f, double lo, double hi, double rel_tol, int max_iter)
{
  double flo = f(lo);
  const double fhi = f(hi);
  if (flo == 0.0) {
    return lo;
  }
  if (fhi == 0.0) {
    return hi;
  }
  if ((flo < 0.0) == (fhi < 0.0)) {
    throw DomainError("bisect: root not bracketed");
  }
  for (int it = 0; it < max_iter; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm == 0.0) {
      return mid;
    }
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    }
    else {
      hi = mid;
    }
    if (hi - lo <= rel_tol * std::max(std::abs(lo), std::abs(hi))) {
      break;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace geoextremes

#pragma once

#include <cmath>
#include <functional>
#include <numbers>

namespace geoextremes {

/// Volume of the unit ball in R^j.
double unit_ball_volume(int j);

/// Surface area of the unit sphere S^{j-1} in R^j, j * kappa_j. For j = 1 this is 2.
double unit_sphere_area(int j);

/**
 * Mass of the Grassmannian of m-dimensional linear subspaces of R^n under the
 * rotation invariant measure normalised by
 *   prod_{j=n-m+1..n} omega_j / prod_{j=1..m} omega_j,
 * where omega_j is the unit sphere area. Equals 1 when m == 0 or m == n.
 */
double grassmannian_mass(int n, int m);

double log_factorial(int k);

/// Adaptive Gauss-Kronrod integral of f over [a, b].
double integrate(const std::function<double(double)> &f, double a, double b, double rel_tol = 1e-10,
                 unsigned max_depth = 15);

/// Integral of f over [a, infinity), f assumed integrable.
double integrate_to_infinity(const std::function<double(double)> &f, double a, double rel_tol = 1e-10);

/// Poisson probability P(N = k) for N ~ Poisson(mean).
double poisson_pmf(int k, double mean);

/// Poisson probability P(N <= k).
double poisson_cdf(int k, double mean);

/// Upper tail of the chi-square distribution.
double chi_square_survival(double x, double dof);

/// Asymptotic Kolmogorov p-value for a KS distance d from n samples.
double kolmogorov_pvalue(double d, std::size_t n);

/// Bisection root of a monotone function on [lo, hi], f(lo) and f(hi) of opposite sign.
double bisect(const std::function<double(double)> &f, double lo, double hi, double rel_tol = 1e-12,
              int max_iter = 200);

}  // namespace geoextremes

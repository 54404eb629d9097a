#include "geoextremes/integral.hpp"

#include <array>
#include <numbers>
#include <vector>

#include "geoextremes/error.hpp"
#include "geoextremes/numerics.hpp"
#include "geoextremes/sampling.hpp"

namespace geoextremes {

namespace {

constexpr double kPi = std::numbers::pi;

/// Unit sphere of a linear subspace with an orthonormal basis.
class SubspaceSphere {
 public:
  explicit SubspaceSphere(std::vector<Point> basis) : basis_(std::move(basis)) {}

  int dim() const
  {
    return static_cast<int>(basis_.size());
  }
  const std::vector<Point> &basis() const
  {
    return basis_;
  }

  Point uniform(Rng &rng) const
  {
    std::normal_distribution<double> n01;
    for (;;) {
      Point u;
      for (const Point &b : basis_) {
        u += n01(rng) * b;
      }
      const double n = norm(u);
      if (n > 1e-300) {
        return u / n;
      }
    }
  }

  /// sigma-probability of a cap of angular radius delta.
  double cap_mass(double delta) const
  {
    if (delta >= kPi) {
      return 1.0;
    }
    switch (dim()) {
      case 1:
        return 0.5;
      case 2:
        return delta / kPi;
      default:
        return 0.5 * (1.0 - std::cos(delta));
    }
  }

  static bool in_cap(const Point &u, const Point &c, double delta)
  {
    return delta >= kPi || dot(u, c) >= std::cos(delta);
  }

  Point cap(const Point &c, double delta, Rng &rng) const
  {
    if (delta >= kPi) {
      return uniform(rng);
    }
    if (dim() == 1) {
      return c;
    }
    if (dim() == 2) {
      const double a0 = dot(c, basis_[0]);
      const double a1 = dot(c, basis_[1]);
      const Point perp = -a1 * basis_[0] + a0 * basis_[1];
      const double th = delta * (2.0 * uniform01(rng) - 1.0);
      return std::cos(th) * c + std::sin(th) * perp;
    }
    // dim 3: the span is all of R^3
    const Point *pick = &basis_[0];
    for (const Point &b : basis_) {
      if (std::abs(dot(b, c)) < std::abs(dot(*pick, c))) {
        pick = &b;
      }
    }
    Point e1 = *pick - dot(*pick, c) * c;
    e1 = e1 / norm(e1);
    const Point e2 = cross3(c, e1);
    const double ct = 1.0 - uniform01(rng) * (1.0 - std::cos(delta));
    const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
    const double ph = 2.0 * kPi * uniform01(rng);
    return ct * c + st * (std::cos(ph) * e1 + std::sin(ph) * e2);
  }

  Point project(const Point &u) const
  {
    Point p;
    for (const Point &b : basis_) {
      p += dot(u, b) * b;
    }
    return p;
  }

 private:
  std::vector<Point> basis_;
};

Point axis(int a)
{
  Point e;
  e[a] = 1.0;
  return e;
}

/// Uniformly random m-dimensional subspace of span(frame), as an orthonormal basis.
std::vector<Point> random_subspace(const std::vector<Point> &frame, int m, Rng &rng)
{
  std::normal_distribution<double> n01;
  for (;;) {
    std::vector<Point> out;
    bool ok = true;
    for (int j = 0; j < m && ok; ++j) {
      Point v;
      for (const Point &b : frame) {
        v += n01(rng) * b;
      }
      for (const Point &w : out) {
        v -= dot(v, w) * w;
      }
      const double n = norm(v);
      ok = n > 1e-8;
      if (ok) {
        out.push_back(v / n);
      }
    }
    if (ok) {
      return out;
    }
  }
}

/// Radius proposal: half exponential bulk, half r^{-2} tail above `scale`.
struct RadiusProposal {
  double scale = 1.0;

  double sample(Rng &rng) const
  {
    const double u = 1.0 - uniform01(rng);
    if (uniform01(rng) < 0.5) {
      return -scale * std::log(u);
    }
    return scale / u;
  }
  double density(double r) const
  {
    const double bulk = std::exp(-r / scale) / scale;
    const double tail = r >= scale ? scale / (r * r) : 0.0;
    return 0.5 * (bulk + tail);
  }
};

struct Accumulator {
  double sum = 0.0;
  double sum2 = 0.0;
  std::size_t n = 0;
  void add(double x)
  {
    sum += x;
    sum2 += x * x;
    ++n;
  }
  double mean() const
  {
    return n ? sum / n : 0.0;
  }
  double se() const
  {
    if (n < 2) {
      return 0.0;
    }
    const double m = mean();
    return std::sqrt(std::max(0.0, sum2 / n - m * m) / (n - 1));
  }
};

double factorial(int k)
{
  double f = 1.0;
  for (int i = 2; i <= k; ++i) {
    f *= i;
  }
  return f;
}

/// Plain importance sampling of the integral of f over (R^d)^m.
void estimate_lhs(int d, int m, const TestFunction &f, std::size_t n_mc, Rng &rng, IdentityCheck &out)
{
  Accumulator acc;
  std::vector<Point> x(m);
  const double lo = -0.25;
  const double hi = 1.25;
  for (std::size_t s = 0; s < n_mc; ++s) {
    double w = 1.0;
    for (Point &p : x) {
      if (f.kind == TestFunctionKind::unit_cube) {
        p = Point{};
        for (int a = 0; a < d; ++a) {
          p[a] = lo + (hi - lo) * uniform01(rng);
        }
        w *= std::pow(hi - lo, d);
      }
      else {
        p = gaussian_point(d, rng);
        w *= std::pow(2.0 * kPi, 0.5 * d) * std::exp(0.5 * norm2(p));
      }
    }
    acc.add(w * f(x, d));
  }
  out.lhs = acc.mean();
  out.lhs_se = acc.se();
  out.exact = f.exact_integral(d, m);
}

void finish(IdentityCheck &c)
{
  const double se = std::hypot(c.lhs_se, c.rhs_se);
  c.z_score = se > 0.0 ? (c.lhs - c.rhs) / se : (c.lhs == c.rhs ? 0.0 : std::copysign(1e300, c.lhs - c.rhs));
}

void check_dims(int d)
{
  if (d != 2 && d != 3) {
    throw DomainError("integral identities are implemented for d = 2 and d = 3");
  }
}

/* Right side of the affine formula. The point x_0 = z + r u_0 is sampled instead of z
 * (unit Jacobian), and the remaining u_j from a mixture of the uniform law and a cap
 * around u_0 whose size matches the spread of f, which keeps the weights bounded. */
void estimate_rhs_linear(int d, int k, double constant, const TestFunction &f, std::size_t n_mc, Rng &rng,
                         IdentityCheck &out)
{
  std::vector<Point> frame;
  for (int a = 0; a < d; ++a) {
    frame.push_back(axis(a));
  }
  const RadiusProposal rprop{1.0};
  const double spread = f.spread(d);
  const double kfact = factorial(k);
  Accumulator acc;
  std::vector<Point> u(k + 1);
  std::vector<Point> x(k + 1);
  for (std::size_t s = 0; s < n_mc; ++s) {
    const SubspaceSphere sphere(random_subspace(frame, k, rng));
    const double r = rprop.sample(rng);
    u[0] = sphere.uniform(rng);
    Point x0;
    double p0 = 1.0;
    if (f.kind == TestFunctionKind::unit_cube) {
      for (int a = 0; a < d; ++a) {
        x0[a] = uniform01(rng);
      }
    }
    else {
      x0 = gaussian_point(d, rng);
      p0 = std::exp(-0.5 * norm2(x0)) / std::pow(2.0 * kPi, 0.5 * d);
    }
    const double delta = 2.0 * std::asin(std::min(1.0, spread / (2.0 * r)));
    const bool use_cap = k > 1;
    const double cap_mass = sphere.cap_mass(delta);
    double q = 1.0;
    for (int j = 1; j <= k; ++j) {
      if (use_cap && uniform01(rng) < 0.5) {
        u[j] = sphere.cap(u[0], delta, rng);
      }
      else {
        u[j] = sphere.uniform(rng);
      }
      if (use_cap) {
        q *= 0.5 + 0.5 * (SubspaceSphere::in_cap(u[j], u[0], delta) ? 1.0 / cap_mass : 0.0);
      }
    }
    const Point z = x0 - r * u[0];
    for (int j = 0; j <= k; ++j) {
      x[j] = z + r * u[j];
    }
    const double fx = f(x, d);
    if (fx == 0.0) {
      acc.add(0.0);
      continue;
    }
    const double delta_k = simplex_volume(u);
    const double kernel = std::pow(r, d * k - 1) * std::pow(kfact * delta_k, d - k + 1);
    acc.add(constant * fx * kernel / (rprop.density(r) * p0 * q));
  }
  out.rhs = acc.mean();
  out.rhs_se = acc.se();
}

}  // namespace

double TestFunction::operator()(std::span<const Point> x, int d) const
{
  switch (kind) {
    case TestFunctionKind::gaussian: {
      double s = 0.0;
      for (const Point &p : x) {
        s += norm2(p);
      }
      return std::exp(-s);
    }
    case TestFunctionKind::unit_cube:
      for (const Point &p : x) {
        for (int a = 0; a < d; ++a) {
          if (p[a] < 0.0 || p[a] > 1.0) {
            return 0.0;
          }
        }
      }
      return 1.0;
    case TestFunctionKind::zero:
      return 0.0;
  }
  return 0.0;
}

double TestFunction::exact_integral(int d, int m) const
{
  switch (kind) {
    case TestFunctionKind::gaussian:
      return std::pow(kPi, 0.5 * d * m);
    case TestFunctionKind::unit_cube:
      return 1.0;
    case TestFunctionKind::zero:
      return 0.0;
  }
  return 0.0;
}

double TestFunction::reach(int d) const
{
  return kind == TestFunctionKind::unit_cube ? std::sqrt(double(d)) : 3.0;
}

double TestFunction::spread(int d) const
{
  return kind == TestFunctionKind::unit_cube ? std::sqrt(double(d)) : 4.0;
}

const char *TestFunction::name() const
{
  switch (kind) {
    case TestFunctionKind::gaussian:
      return "gaussian";
    case TestFunctionKind::unit_cube:
      return "cube";
    case TestFunctionKind::zero:
      return "zero";
  }
  return "?";
}

TestFunction TestFunction::from_name(const std::string &name)
{
  for (auto k : {TestFunctionKind::gaussian, TestFunctionKind::unit_cube, TestFunctionKind::zero}) {
    if (name == TestFunction{k}.name()) {
      return TestFunction{k};
    }
  }
  throw ConfigError("unknown test function '" + name + "'");
}

double bp_linear_constant(int d, int k)
{
  return std::pow(unit_sphere_area(k), k + 1) * grassmannian_mass(d, k);
}

double bp_subsphere_constant(int d, int k, int m)
{
  return unit_sphere_area(m) * std::pow(unit_sphere_area(d - k + m), m) * grassmannian_mass(k, m);
}

IdentityCheck verify_bp_spherical(int d, const TestFunction &f, std::size_t n_mc, const SeedSpec &seed)
{
  check_dims(d);
  if (n_mc < 2) {
    throw DomainError("verify_bp_spherical: need at least 2 samples");
  }
  IdentityCheck out;
  Rng lhs_rng = seed.engine(1);
  Rng rhs_rng = seed.engine(2);
  estimate_lhs(d, d + 1, f, n_mc, lhs_rng, out);
  // d! (d kappa_d)^{d+1} Delta_d(u) is written as (d kappa_d)^{d+1} [d! Delta_d(u)]
  estimate_rhs_linear(d, d, std::pow(d * unit_ball_volume(d), d + 1), f, n_mc, rhs_rng, out);
  finish(out);
  return out;
}

IdentityCheck verify_bp_linear(int d, int k, const TestFunction &f, std::size_t n_mc, const SeedSpec &seed)
{
  check_dims(d);
  if (k < 1 || k > d) {
    throw DomainError("verify_bp_linear: need 1 <= k <= d");
  }
  if (n_mc < 2) {
    throw DomainError("verify_bp_linear: need at least 2 samples");
  }
  IdentityCheck out;
  Rng lhs_rng = seed.engine(1);
  Rng rhs_rng = seed.engine(2);
  estimate_lhs(d, k + 1, f, n_mc, lhs_rng, out);
  estimate_rhs_linear(d, k, bp_linear_constant(d, k), f, n_mc, rhs_rng, out);
  finish(out);
  return out;
}

IdentityCheck verify_bp_subsphere(int d, int k, int m, double r0, const TestFunction &f, std::size_t n_mc,
                                  const SeedSpec &seed)
{
  check_dims(d);
  if (k < 1 || k > d || m < 1 || m > k) {
    throw DomainError("verify_bp_subsphere: need 1 <= m <= k <= d");
  }
  if (r0 < 0.0 || (k == d && r0 != 0.0)) {
    throw DomainError("verify_bp_subsphere: r0 must be >= 0, and 0 when Q = {0}");
  }
  if (n_mc < 2) {
    throw DomainError("verify_bp_subsphere: need at least 2 samples");
  }
  IdentityCheck out;
  Rng lhs_rng = seed.engine(1);
  estimate_lhs(d, m, f, n_mc, lhs_rng, out);

  Rng rng = seed.engine(2);
  std::vector<Point> qperp;
  std::vector<Point> qbasis;
  for (int a = 0; a < k; ++a) {
    qperp.push_back(axis(a));
  }
  for (int a = k; a < d; ++a) {
    qbasis.push_back(axis(a));
  }
  const int dim_q = d - k;
  const double constant = bp_subsphere_constant(d, k, m);
  const RadiusProposal sprop{1.0};
  const double reach = f.reach(d);
  const double spread = f.spread(d);
  const double mfact = factorial(m);
  const SubspaceSphere qsphere(qbasis);
  Accumulator acc;
  std::vector<Point> u(m);
  std::vector<Point> x(m);
  std::vector<Point> simplex(m + 1);
  for (std::size_t s = 0; s < n_mc; ++s) {
    const std::vector<Point> lbasis = random_subspace(qperp, m, rng);
    std::vector<Point> lq = lbasis;
    lq.insert(lq.end(), qbasis.begin(), qbasis.end());
    const SubspaceSphere lsphere(lbasis);
    const SubspaceSphere big(lq);
    const double sv = sprop.sample(rng);
    const double r = std::sqrt(sv * sv + r0 * r0);
    const double a = sv / r;
    const double b = r0 / r;
    const Point z = lsphere.uniform(rng);

    // The first point is steered towards the subsphere of radius r0 where f lives.
    const double delta1 = 2.0 * std::asin(std::min(1.0, (reach + r0) / (2.0 * r)));
    const double mass1 = big.cap_mass(delta1);
    auto center_for = [&](const Point &q) { return -a * z + b * q; };
    if (uniform01(rng) < 0.5) {
      const Point q = dim_q > 0 ? qsphere.uniform(rng) : Point{};
      u[0] = big.cap(center_for(q), delta1, rng);
    }
    else {
      u[0] = big.uniform(rng);
    }
    // probability over q that u[0] lies in the cap around the center chosen by q
    double hit = 0.0;
    if (dim_q == 0 || r0 == 0.0) {
      hit = SubspaceSphere::in_cap(u[0], -a * z, delta1) ? 1.0 : 0.0;
    }
    else if (dim_q == 1) {
      hit = 0.5 * ((SubspaceSphere::in_cap(u[0], center_for(qbasis[0]), delta1) ? 1.0 : 0.0) +
                   (SubspaceSphere::in_cap(u[0], center_for(-qbasis[0]), delta1) ? 1.0 : 0.0));
    }
    else if (delta1 >= kPi) {
      hit = 1.0;
    }
    else {
      const Point uq = qsphere.project(u[0]);
      const double w = norm(uq);
      const double tau = (std::cos(delta1) + a * dot(u[0], z)) / b;
      if (w == 0.0) {
        hit = tau <= 0.0 ? 1.0 : 0.0;
      }
      else {
        hit = std::acos(std::clamp(tau / w, -1.0, 1.0)) / kPi;
      }
    }
    double q = 0.5 + 0.5 * hit / mass1;

    const double delta2 = 2.0 * std::asin(std::min(1.0, spread / (2.0 * r)));
    const double mass2 = big.cap_mass(delta2);
    for (int j = 1; j < m; ++j) {
      u[j] = uniform01(rng) < 0.5 ? big.cap(u[0], delta2, rng) : big.uniform(rng);
      q *= 0.5 + 0.5 * (SubspaceSphere::in_cap(u[j], u[0], delta2) ? 1.0 / mass2 : 0.0);
    }
    for (int j = 0; j < m; ++j) {
      x[j] = sv * z + r * u[j];
    }
    const double fx = f(x, d);
    if (fx == 0.0) {
      acc.add(0.0);
      continue;
    }
    simplex[0] = -a * z;
    for (int j = 0; j < m; ++j) {
      simplex[j + 1] = lsphere.project(u[j]);
    }
    const double vol = simplex_volume(simplex);
    // (r^2 - r0^2)^{(m-2)/2} dr = s^{m-2} (s / r) ds
    const double kernel = std::pow(r, m * (d - 1) + 1) * std::pow(sv, m - 1) / r *
                          std::pow(mfact * vol, k - m + 1);
    acc.add(constant * fx * kernel / (sprop.density(sv) * q));
  }
  out.rhs = acc.mean();
  out.rhs_se = acc.se();
  finish(out);
  return out;
}

double BesselK::truncation(double x)
{
  return std::acosh(1.0 + 52.0 / x);
}

double BesselK::evaluate(double x, double stretch) const
{
  if (!(x > 0.0)) {
    throw DomainError("BesselK: argument must be positive");
  }
  const double t_max = stretch * truncation(x);
  // e^{-x} is factored out so the integrand stays O(1) for large x.
  auto g = [&](double t) { return std::exp(-x * (std::cosh(t) - 1.0)) * std::cosh(nu_ * t); };
  return std::exp(-x) * integrate(g, 0.0, t_max, 1e-13, 20);
}

double BesselK::operator()(double x) const
{
  return evaluate(x, 1.0);
}

double bessel_k16(double x)
{
  static const BesselK k16(1.0 / 6.0);
  return k16(x);
}

namespace {

constexpr double kRathieScale = 2.0 * std::numbers::pi / (3.0 * std::numbers::sqrt3);

double rathie_unit_density(double u)
{
  if (u <= 0.0) {
    return 0.0;
  }
  const double k = bessel_k16(kRathieScale * u);
  return 8.0 * kPi / 9.0 * u * k * k;
}

}  // namespace

double rathie_density(double v, double gamma)
{
  if (!(gamma > 0.0)) {
    throw DomainError("rathie_density: gamma must be positive");
  }
  return gamma * rathie_unit_density(gamma * v);
}

double rathie_survival(double v, double gamma)
{
  if (!(gamma > 0.0)) {
    throw DomainError("rathie_survival: gamma must be positive");
  }
  const double u0 = std::max(0.0, v * gamma);
  // The integrand decays like exp(-2 * 1.209 u); beyond u0 + 40 it is below 1e-40.
  double total = 0.0;
  double a = u0;
  const double step = 2.0;
  while (a < u0 + 40.0) {
    total += integrate(rathie_unit_density, a, a + step, 1e-10, 15);
    a += step;
  }
  return std::clamp(total, 0.0, 1.0);
}

double rathie_quantile(double p, double gamma)
{
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError("rathie_quantile: need 0 < p < 1");
  }
  double hi = 1.0 / gamma;
  while (rathie_survival(hi, gamma) > p) {
    hi *= 2.0;
  }
  return bisect([&](double v) { return rathie_survival(v, gamma) - p; }, 0.0, hi, 1e-12, 200);
}

}  // namespace geoextremes

#include "geoextremes/knn.hpp"

#include <numbers>

#include "geoextremes/error.hpp"
#include "geoextremes/numerics.hpp"

namespace geoextremes {

namespace {

constexpr double kPi = std::numbers::pi;

void check_spec(const KnnSpec &spec)
{
  if (spec.d != 2 && spec.d != 3) {
    throw DomainError("knn: dimension must be 2 or 3");
  }
  if (spec.k < 0) {
    throw DomainError("knn: k must be nonnegative");
  }
  if (!(spec.s > std::numbers::e)) {
    throw DomainError("knn: need s > e");
  }
  if (!(spec.c > 0.0)) {
    throw DomainError("knn: c must be positive");
  }
  if (spec.f.d != spec.d) {
    throw DomainError("knn: density dimension mismatch");
  }
}

/// Area of {(x, y) in B(o, r): x <= a, y <= b}.
double quadrant_area(double a, double b, double r)
{
  if (a <= -r || b <= -r) {
    return 0.0;
  }
  auto H = [r](double x) {
    x = std::clamp(x, -r, r);
    return 0.5 * (x * std::sqrt(std::max(0.0, r * r - x * x)) + r * r * std::asin(x / r));
  };
  const double A = std::min(a, r);
  if (b >= r) {
    return 2.0 * (H(A) - H(-r));
  }
  const double w = std::sqrt(std::max(0.0, r * r - b * b));
  double area = 0.0;
  if (A > -w) {
    const double top = std::min(A, w);
    area += b * (top + w) + H(top) - H(-w);
  }
  if (b >= 0.0) {
    area += 2.0 * (H(std::min(A, -w)) - H(-r));
    if (A > w) {
      area += 2.0 * (H(A) - H(w));
    }
  }
  return area;
}

Box unit_cube(int d)
{
  return Box::cube(d, 0.0, 1.0);
}

bool ball_inside(const Point &x, double r, const Box &box)
{
  return box.inner_distance(x) >= r;
}

}  // namespace

IntensitySpec KnnSpec::intensity() const
{
  return IntensitySpec::scaled_density(c, s, f);
}

double threshold_a(const KnnSpec &spec)
{
  check_spec(spec);
  const double ls = std::log(spec.s);
  return ls + spec.k * std::log(ls) - log_factorial(spec.k);
}

double disk_box_area(const Point &center, double r, const Box &box)
{
  if (!(r > 0.0)) {
    return 0.0;
  }
  const double x0 = box.lo.x - center.x;
  const double x1 = box.hi.x - center.x;
  const double y0 = box.lo.y - center.y;
  const double y1 = box.hi.y - center.y;
  if (x0 <= -r && x1 >= r && y0 <= -r && y1 >= r) {
    return kPi * r * r;
  }
  const double a = quadrant_area(x1, y1, r) - quadrant_area(x0, y1, r) - quadrant_area(x1, y0, r) +
                   quadrant_area(x0, y0, r);
  return std::max(0.0, a);
}

double ball_box_volume(const Point &center, double r, const Box &box)
{
  if (!(r > 0.0)) {
    return 0.0;
  }
  if (ball_inside(center, r, box)) {
    return 4.0 / 3.0 * kPi * r * r * r;
  }
  const double z0 = std::max(box.lo.z, center.z - r);
  const double z1 = std::min(box.hi.z, center.z + r);
  if (z1 <= z0) {
    return 0.0;
  }
  Box face = box;
  face.d = 2;
  return integrate(
      [&](double z) {
        const double dz = z - center.z;
        return disk_box_area(center, std::sqrt(std::max(0.0, r * r - dz * dz)), face);
      },
      z0, z1, 1e-11);
}

double ball_content(const KnnSpec &spec, const Point &x, double r)
{
  const Box cube = unit_cube(spec.d);
  if (!std::isfinite(r)) {
    return spec.f.integral;
  }
  if (spec.f.constant) {
    const double vol = spec.d == 2 ? disk_box_area(x, r, cube) : ball_box_volume(x, r, cube);
    return spec.f.f_plus * vol;
  }
  // Nested quadrature over the slices of the ball that lie in the cube.
  const double rel = 1e-10;
  if (spec.d == 2) {
    const double a = std::max(0.0, x.x - r);
    const double b = std::min(1.0, x.x + r);
    if (b <= a) {
      return 0.0;
    }
    return integrate(
        [&](double u) {
          const double du = u - x.x;
          const double w = std::sqrt(std::max(0.0, r * r - du * du));
          const double lo = std::max(0.0, x.y - w);
          const double hi = std::min(1.0, x.y + w);
          if (hi <= lo) {
            return 0.0;
          }
          return integrate([&](double v) { return spec.f(Point{u, v, 0.0}); }, lo, hi, rel, 8);
        },
        a, b, rel, 10);
  }
  const double a = std::max(0.0, x.z - r);
  const double b = std::min(1.0, x.z + r);
  if (b <= a) {
    return 0.0;
  }
  return integrate(
      [&](double w3) {
        const double dz = w3 - x.z;
        const double rz = std::sqrt(std::max(0.0, r * r - dz * dz));
        const double ua = std::max(0.0, x.x - rz);
        const double ub = std::min(1.0, x.x + rz);
        if (ub <= ua) {
          return 0.0;
        }
        return integrate(
            [&](double u) {
              const double du = u - x.x;
              const double w = std::sqrt(std::max(0.0, rz * rz - du * du));
              const double lo = std::max(0.0, x.y - w);
              const double hi = std::min(1.0, x.y + w);
              if (hi <= lo) {
                return 0.0;
              }
              return integrate([&](double v) { return spec.f(Point{u, v, w3}); }, lo, hi, 1e-8, 6);
            },
            ua, ub, 1e-8, 6);
      },
      a, b, 1e-8, 6);
}

double radius_r_s(const KnnSpec &spec, const Point &x)
{
  const double a = threshold_a(spec);
  const double cs = spec.c * spec.s;
  const double kappa = unit_ball_volume(spec.d);
  if (a <= 0.0) {
    return 0.0;
  }
  if (spec.f.constant) {
    const double r0 = std::pow(a / (cs * spec.f.f_plus * kappa), 1.0 / spec.d);
    if (ball_inside(x, r0, unit_cube(spec.d))) {
      return r0;
    }
  }
  const double rmax = std::sqrt(static_cast<double>(spec.d));
  if (cs * ball_content(spec, x, rmax) < a) {
    return std::numeric_limits<double>::infinity();
  }
  return bisect([&](double r) { return cs * ball_content(spec, x, r) - a; }, 0.0, rmax, 1e-10, 200);
}

ExceedanceOutput build_knn_exceedance(const KnnSpec &spec, const SeedSpec &seed)
{
  check_spec(spec);
  const double cs = spec.c * spec.s;
  const PointConfiguration eta = sample_poisson(spec.intensity(), unit_cube(spec.d), seed);
  ExceedanceOutput out;
  out.points.assign(eta.points().begin(), eta.points().end());
  out.retained.assign(eta.size(), 0);
  out.content.assign(eta.size(), 0.0);
  out.max_content = -std::numeric_limits<double>::infinity();
  const auto limit = static_cast<std::size_t>(spec.k) + 1;
  for (std::size_t i = 0; i < eta.size(); ++i) {
    const Point &x = eta[i];
    const double r = radius_r_s(spec, x);
    const std::size_t n = std::isfinite(r) ? eta.count_in_ball(x, r, i, limit) : eta.size() - 1;
    const bool keep = n <= static_cast<std::size_t>(spec.k);
    const double t = eta.kth_neighbor_distance(i, spec.k + 1);
    out.content[i] = cs * ball_content(spec, x, t);
    out.retained[i] = keep ? 1 : 0;
    if (keep) {
      out.centers.push_back(x);
    }
    out.max_content = std::max(out.max_content, out.content[i]);
  }
  out.count = out.centers.size();
  return out;
}

double exact_mean_count(const KnnSpec &spec)
{
  const double a = threshold_a(spec);
  const double total = spec.c * spec.s * spec.f.integral;
  if (total < a) {
    return total * poisson_cdf(spec.k, total);
  }
  return total * poisson_cdf(spec.k, a);
}

MeanEstimate mc_mean_count(const KnnSpec &spec, std::size_t samples, const SeedSpec &seed)
{
  if (samples < 2) {
    throw DomainError("mc_mean_count: need at least 2 samples");
  }
  Rng rng = seed.engine(7);
  const double cs = spec.c * spec.s;
  double sum = 0.0;
  double sum2 = 0.0;
  for (std::size_t j = 0; j < samples; ++j) {
    Point x;
    for (int a = 0; a < spec.d; ++a) {
      x[a] = uniform01(rng);
    }
    const double r = radius_r_s(spec, x);
    const double mass = cs * ball_content(spec, x, r);
    const double v = cs * spec.f(x) * poisson_cdf(spec.k, mass);
    sum += v;
    sum2 += v * v;
  }
  const double n = static_cast<double>(samples);
  const double mean = sum / n;
  return {mean, std::sqrt(std::max(0.0, sum2 / n - mean * mean) / (n - 1))};
}

double gumbel_statistic_knn(const ExceedanceOutput &out, const KnnSpec &spec)
{
  if (out.points.empty()) {
    return -std::numeric_limits<double>::infinity();
  }
  return out.max_content - threshold_a(spec) - std::log(spec.c * spec.f.integral);
}

double lens_complement_volume(int d, double t)
{
  if (t < 0.0 || t > 2.0) {
    throw DomainError("lens_complement_volume: need 0 <= t <= 2");
  }
  if (d == 2) {
    const double lens = 2.0 * std::acos(0.5 * t) - 0.5 * t * std::sqrt(4.0 - t * t);
    return kPi - lens;
  }
  if (d == 3) {
    const double lens = kPi * (4.0 + t) * (2.0 - t) * (2.0 - t) / 12.0;
    return 4.0 / 3.0 * kPi - lens;
  }
  throw DomainError("lens_complement_volume: dimension must be 2 or 3");
}

double lemma_xA_bound(int d, double t)
{
  return 2.0 * unit_ball_volume(d - 1) / (d + 1) * std::pow(t, 0.5 * (d + 1));
}

LemmaXAReport verify_lemma_xA(int d, std::size_t samples, const SeedSpec &seed)
{
  Rng rng = seed.engine(0);
  LemmaXAReport rep;
  rep.d = d;
  rep.samples = samples;
  rep.min_ratio = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < samples; ++j) {
    // |x| for x uniform in the unit ball, with the endpoint |x| = 1 always included
    const double t = j == 0 ? 1.0 : std::pow(1.0 - uniform01(rng), 1.0 / d);
    const double lhs = lens_complement_volume(d, t);
    const double rhs = lemma_xA_bound(d, t);
    if (lhs < rhs) {
      ++rep.violations;
    }
    const double ratio = lhs / rhs;
    if (ratio < rep.min_ratio) {
      rep.min_ratio = ratio;
      rep.t_at_min = t;
    }
  }
  return rep;
}

}  // namespace geoextremes

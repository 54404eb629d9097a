#include "geoextremes/sampling.hpp"

#include <charconv>
#include <cstdio>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "geoextremes/error.hpp"
#include "geoextremes/numerics.hpp"

namespace geoextremes {

Box Box::cube(int d, double lo, double hi)
{
  Box b;
  b.d = d;
  for (int a = 0; a < d; ++a) {
    b.lo[a] = lo;
    b.hi[a] = hi;
  }
  return b;
}

double Box::volume() const
{
  double v = 1.0;
  for (int a = 0; a < d; ++a) {
    v *= std::max(0.0, hi[a] - lo[a]);
  }
  return v;
}

bool Box::contains(const Point &p) const
{
  for (int a = 0; a < d; ++a) {
    if (p[a] < lo[a] || p[a] > hi[a]) {
      return false;
    }
  }
  return true;
}

Box Box::inflated(double margin) const
{
  Box b = *this;
  for (int a = 0; a < d; ++a) {
    b.lo[a] -= margin;
    b.hi[a] += margin;
  }
  return b;
}

double Box::inner_distance(const Point &p) const
{
  double r = std::numeric_limits<double>::infinity();
  for (int a = 0; a < d; ++a) {
    r = std::min({r, p[a] - lo[a], hi[a] - p[a]});
  }
  return r;
}

double Box::diameter() const
{
  double s = 0.0;
  for (int a = 0; a < d; ++a) {
    s += (hi[a] - lo[a]) * (hi[a] - lo[a]);
  }
  return std::sqrt(s);
}

double Ball::volume() const
{
  return unit_ball_volume(d) * std::pow(radius, d);
}

bool Ball::contains(const Point &p) const
{
  return distance2(p, center) <= radius * radius;
}

double Shell::volume() const
{
  return unit_ball_volume(d) * (std::pow(r_outer, d) - std::pow(r_inner, d));
}

bool Shell::contains(const Point &p) const
{
  const double q = distance2(p, center);
  return q > r_inner * r_inner && q <= r_outer * r_outer;
}

double Window::side() const
{
  return std::pow(scale_t, 1.0 / d);
}

Box Window::core() const
{
  return Box::cube(d, 0.0, side());
}

Box Window::sampling() const
{
  return core().inflated(buffer);
}

Density Density::uniform(int d)
{
  Density f;
  f.name = "uniform";
  f.d = d;
  f.f = [](const Point &) { return 1.0; };
  return f;
}

Density Density::linear_ramp(int d, double slope)
{
  if (!(std::abs(slope) < 2.0)) {
    throw DomainError("linear_ramp: need |slope| < 2");
  }
  Density f;
  f.name = "ramp";
  f.d = d;
  f.f = [slope](const Point &p) { return 1.0 + slope * (p.x - 0.5); };
  f.f_minus = 1.0 - 0.5 * std::abs(slope);
  f.f_plus = 1.0 + 0.5 * std::abs(slope);
  f.integral = 1.0;
  f.constant = slope == 0.0;
  return f;
}

IntensitySpec IntensitySpec::constant(double gamma, int d)
{
  if (!(gamma > 0.0)) {
    throw DomainError("intensity must be positive");
  }
  IntensitySpec s;
  s.d_ = d;
  s.gamma_ = gamma;
  return s;
}

IntensitySpec IntensitySpec::scaled_density(double c, double s, Density f)
{
  if (!(c > 0.0) || !(s > 0.0)) {
    throw DomainError("scaled_density: c and s must be positive");
  }
  if (!(f.f_minus > 0.0) || f.f_plus < f.f_minus) {
    throw DomainError("scaled_density: need 0 < f_minus <= f_plus");
  }
  IntensitySpec out;
  out.d_ = f.d;
  out.c_ = c;
  out.s_ = s;
  out.gamma_ = c * s * f.f_plus;
  out.density_ = std::move(f);
  return out;
}

double IntensitySpec::operator()(const Point &p) const
{
  if (!density_) {
    return gamma_;
  }
  for (int a = 0; a < d_; ++a) {
    if (p[a] < 0.0 || p[a] > 1.0) {
      return 0.0;
    }
  }
  return c_ * s_ * (*density_)(p);
}

double IntensitySpec::envelope() const
{
  return density_ ? c_ * s_ * density_->f_plus : gamma_;
}

GridIndex::GridIndex(std::span<const Point> points, const Box &bounds, double cell_width) : bounds_(bounds)
{
  if (!(cell_width > 0.0)) {
    throw DomainError("GridIndex: cell width must be positive");
  }
  const double max_cells = 4.0 * static_cast<double>(points.size()) + 64.0;
  h_ = cell_width;
  for (;;) {
    double total = 1.0;
    for (int a = 0; a < bounds.d; ++a) {
      total *= std::max(1.0, std::ceil((bounds.hi[a] - bounds.lo[a]) / h_));
    }
    if (total <= max_cells) {
      break;
    }
    h_ *= 1.25;
  }
  n_ = {1, 1, 1};
  for (int a = 0; a < bounds.d; ++a) {
    n_[a] = std::max(1, static_cast<int>(std::ceil((bounds.hi[a] - bounds.lo[a]) / h_)));
  }
  const int ncells = n_[0] * n_[1] * n_[2];
  std::vector<int> cell_id(points.size());
  start_.assign(ncells + 1, 0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto c = cell_of(points[i]);
    cell_id[i] = flat(c[0], c[1], c[2]);
    ++start_[cell_id[i] + 1];
  }
  for (int c = 0; c < ncells; ++c) {
    start_[c + 1] += start_[c];
  }
  items_.resize(points.size());
  std::vector<std::size_t> fill(start_.begin(), start_.end() - 1);
  for (std::size_t i = 0; i < points.size(); ++i) {
    items_[fill[cell_id[i]]++] = i;
  }
}

std::array<int, 3> GridIndex::cell_of(const Point &p) const
{
  std::array<int, 3> c{0, 0, 0};
  for (int a = 0; a < bounds_.d; ++a) {
    const double u = std::floor((p[a] - bounds_.lo[a]) / h_);
    c[a] = static_cast<int>(std::clamp(u, 0.0, double(n_[a] - 1)));
  }
  return c;
}

int GridIndex::max_ring(const std::array<int, 3> &cell) const
{
  int r = 0;
  for (int a = 0; a < bounds_.d; ++a) {
    r = std::max({r, cell[a], n_[a] - 1 - cell[a]});
  }
  return r;
}

PointConfiguration::PointConfiguration(int d, std::vector<Point> points, const Box &region, double cell_width)
    : d_(d), points_(std::move(points)), region_(region)
{
  if (d < 1 || d > 3) {
    throw DomainError("PointConfiguration: dimension must be 1, 2 or 3");
  }
  region_.d = d;
  if (cell_width <= 0.0) {
    const double vol = std::max(region_.volume(), 1e-300);
    const double n = std::max<double>(1.0, static_cast<double>(points_.size()));
    cell_width = std::pow(vol / n, 1.0 / d);
    if (!(cell_width > 0.0) || !std::isfinite(cell_width)) {
      cell_width = 1.0;
    }
  }
  index_ = GridIndex(points_, region_, cell_width);
}

std::vector<std::size_t> PointConfiguration::query_ball_indices(const Point &c, double r) const
{
  std::vector<std::size_t> out;
  const double r2 = r * r;
  index_.for_each_candidate(c, r, [&](std::size_t i) {
    if (distance2(points_[i], c) <= r2) {
      out.push_back(i);
    }
  });
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Point> PointConfiguration::query_ball(const Point &c, double r) const
{
  std::vector<Point> out;
  for (std::size_t i : query_ball_indices(c, r)) {
    out.push_back(points_[i]);
  }
  return out;
}

std::size_t PointConfiguration::count_in_ball(const Point &c, double r, std::size_t exclude,
                                              std::size_t limit) const
{
  std::size_t n = 0;
  const double r2 = r * r;
  index_.for_each_candidate(c, r, [&](std::size_t i) {
    if (i != exclude && n < limit && distance2(points_[i], c) <= r2) {
      ++n;
    }
  });
  return n;
}

std::size_t PointConfiguration::find(const Point &p) const
{
  std::size_t found = npos;
  index_.for_each_candidate(p, 0.0, [&](std::size_t i) {
    if (points_[i] == p) {
      found = i;
    }
  });
  return found;
}

Point PointConfiguration::knn_query(const Point &x, int k) const
{
  if (k < 1) {
    throw DomainError("knn_query: k must be >= 1");
  }
  const std::size_t self = find(x);
  const std::size_t others = points_.size() - (self == npos ? 0 : 1);
  if (others < static_cast<std::size_t>(k)) {
    throw InsufficientPoints("knn_query: fewer than k points distinct from x");
  }
  double r = index_.cell_width() * std::pow(static_cast<double>(k), 1.0 / d_);
  for (;;) {
    std::vector<Point> diffs;
    const double r2 = r * r;
    index_.for_each_candidate(x, r, [&](std::size_t i) {
      if (i != self && distance2(points_[i], x) <= r2) {
        diffs.push_back(points_[i] - x);
      }
    });
    if (diffs.size() >= static_cast<std::size_t>(k)) {
      std::nth_element(diffs.begin(), diffs.begin() + (k - 1), diffs.end(), TotalOrderLess{});
      return x + diffs[k - 1];
    }
    r *= 2.0;
  }
}

double PointConfiguration::kth_neighbor_distance(std::size_t i, int k) const
{
  if (k < 1) {
    throw DomainError("kth_neighbor_distance: k must be >= 1");
  }
  const Point &x = points_[i];
  const auto home = index_.cell_of(x);
  const int last = index_.max_ring(home);
  std::vector<double> best;  // sorted squared distances, at most k entries
  best.reserve(k + 1);
  for (int ring = 0; ring <= last; ++ring) {
    index_.for_each_in_ring(home, ring, [&](std::size_t j) {
      if (j == i) {
        return;
      }
      const double q = distance2(points_[j], x);
      if (best.size() < static_cast<std::size_t>(k) || q < best.back()) {
        best.insert(std::upper_bound(best.begin(), best.end(), q), q);
        if (best.size() > static_cast<std::size_t>(k)) {
          best.pop_back();
        }
      }
    });
    const double bound = ring * index_.cell_width();
    if (best.size() == static_cast<std::size_t>(k) && best.back() <= bound * bound) {
      break;
    }
  }
  if (best.size() < static_cast<std::size_t>(k)) {
    return std::numeric_limits<double>::infinity();
  }
  return std::sqrt(best.back());
}

Point gaussian_point(int d, Rng &rng)
{
  std::normal_distribution<double> n01;
  Point p;
  for (int a = 0; a < d; ++a) {
    p[a] = n01(rng);
  }
  return p;
}

Point uniform_on_sphere(int d, Rng &rng)
{
  if (d == 1) {
    return {uniform01(rng) < 0.5 ? -1.0 : 1.0, 0.0, 0.0};
  }
  for (;;) {
    const Point g = gaussian_point(d, rng);
    const double n = norm(g);
    if (n > 1e-300) {
      return g / n;
    }
  }
}

namespace {

Point uniform_in(const Box &b, Rng &rng)
{
  Point p;
  for (int a = 0; a < b.d; ++a) {
    p[a] = b.lo[a] + uniform01(rng) * (b.hi[a] - b.lo[a]);
  }
  return p;
}

Point uniform_in_shell(const Point &center, double r_in, double r_out, int d, Rng &rng)
{
  const double a = std::pow(r_in, d);
  const double b = std::pow(r_out, d);
  const double rad = std::pow(a + uniform01(rng) * (b - a), 1.0 / d);
  return center + rad * uniform_on_sphere(d, rng);
}

}  // namespace

std::vector<Point> sample_poisson_points(const IntensitySpec &intensity, const Region &region, Rng &rng)
{
  const double env = intensity.envelope();
  const double vol = std::visit([](const auto &r) { return r.volume(); }, region);
  std::vector<Point> out;
  if (!(vol > 0.0)) {
    return out;
  }
  const double mean = env * vol;
  std::poisson_distribution<long long> count_dist(mean);
  const long long n = count_dist(rng);
  out.reserve(static_cast<std::size_t>(n));
  const int d = intensity.dim();
  for (long long i = 0; i < n; ++i) {
    Point p;
    if (const Box *b = std::get_if<Box>(&region)) {
      p = uniform_in(*b, rng);
    }
    else if (const Ball *ball = std::get_if<Ball>(&region)) {
      p = uniform_in_shell(ball->center, 0.0, ball->radius, d, rng);
    }
    else {
      const Shell &s = std::get<Shell>(region);
      p = uniform_in_shell(s.center, s.r_inner, s.r_outer, d, rng);
    }
    if (!intensity.is_constant()) {
      const double lam = intensity(p);
      if (lam > env * (1.0 + 1e-12)) {
        throw EnvelopeViolation("intensity exceeds its declared upper bound");
      }
      if (uniform01(rng) * env >= lam) {
        continue;
      }
    }
    out.push_back(p);
  }
  return out;
}

PointConfiguration sample_poisson(const IntensitySpec &intensity, const Box &region, const SeedSpec &seed)
{
  Rng rng = seed.engine(0);
  Box b = region;
  b.d = intensity.dim();
  std::vector<Point> pts = sample_poisson_points(intensity, b, rng);
  return PointConfiguration(intensity.dim(), std::move(pts), b);
}

int mecke_order(MeckeFunction f)
{
  return f == MeckeFunction::close_pair ? 2 : 1;
}

namespace {

struct MeanAcc {
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
    const double var = std::max(0.0, (sum2 - n * m * m) / (n - 1));
    return std::sqrt(var / n);
  }
};

}  // namespace

MeckeReport verify_mecke(const IntensitySpec &intensity, MeckeFunction f, double r, std::size_t n_mc,
                         const SeedSpec &seed)
{
  if (n_mc < 2) {
    throw DomainError("verify_mecke: need at least 2 replicates");
  }
  if (f != MeckeFunction::indicator_unit_cube && !(r > 0.0)) {
    throw DomainError("verify_mecke: radius must be positive");
  }
  const int d = intensity.dim();
  const Box cube = Box::cube(d, 0.0, 1.0);
  const Box domain = cube.inflated(std::max(r, 0.1));
  MeckeReport rep;
  rep.k = mecke_order(f);

  MeanAcc lhs;
  MeanAcc rhs;
  for (std::size_t j = 0; j < n_mc; ++j) {
    {
      const PointConfiguration eta = sample_poisson(intensity, domain, SeedSpec{seed.stream_seed(1), j});
      double v = 0.0;
      for (std::size_t i = 0; i < eta.size(); ++i) {
        const Point &x = eta[i];
        if (!cube.contains(x)) {
          continue;
        }
        switch (f) {
          case MeckeFunction::indicator_unit_cube:
            v += 1.0;
            break;
          case MeckeFunction::isolated_in_unit_cube:
            v += eta.count_in_ball(x, r, i, 1) == 0 ? 1.0 : 0.0;
            break;
          case MeckeFunction::close_pair:
            for (std::size_t m : eta.query_ball_indices(x, r)) {
              if (m != i && cube.contains(eta[m])) {
                v += 1.0;
              }
            }
            break;
        }
      }
      lhs.add(v);
    }
    {
      const SeedSpec s{seed.stream_seed(2), j};
      const PointConfiguration eta = sample_poisson(intensity, domain, s);
      Rng rng = s.engine(1);
      const Point x = uniform_in(cube, rng);
      double w = intensity(x) * cube.volume();
      double v = 0.0;
      switch (f) {
        case MeckeFunction::indicator_unit_cube:
          v = 1.0;
          break;
        case MeckeFunction::isolated_in_unit_cube:
          v = eta.count_in_ball(x, r) == 0 ? 1.0 : 0.0;
          break;
        case MeckeFunction::close_pair: {
          const Point y = uniform_in(cube, rng);
          w *= intensity(y) * cube.volume();
          v = distance(x, y) <= r ? 1.0 : 0.0;
          break;
        }
      }
      rhs.add(w * v);
    }
  }
  rep.lhs = lhs.mean();
  rep.lhs_se = lhs.se();
  rep.rhs = rhs.mean();
  rep.rhs_se = rhs.se();
  if (intensity.is_constant()) {
    const double g = intensity.gamma();
    switch (f) {
      case MeckeFunction::indicator_unit_cube:
        rep.rhs_exact = g;
        break;
      case MeckeFunction::isolated_in_unit_cube:
        rep.rhs_exact = g * std::exp(-g * unit_ball_volume(d) * std::pow(r, d));
        break;
      case MeckeFunction::close_pair:
        if (d == 2 && r <= 1.0) {
          rep.rhs_exact = g * g * (std::numbers::pi * r * r - 8.0 * r * r * r / 3.0 + 0.5 * r * r * r * r);
        }
        break;
    }
  }
  const double se = std::hypot(rep.lhs_se, rep.rhs_se);
  rep.z_score = se > 0.0 ? (rep.lhs - rep.rhs) / se : 0.0;
  return rep;
}

void write_points_csv(std::ostream &os, std::span<const Point> points, int d)
{
  os << (d == 3 ? "x,y,z\n" : (d == 2 ? "x,y\n" : "x\n"));
  char buf[32];
  for (const Point &p : points) {
    for (int a = 0; a < d; ++a) {
      std::snprintf(buf, sizeof(buf), "%.17g", p[a]);
      os << (a ? "," : "") << buf;
    }
    os << '\n';
  }
}

std::vector<Point> read_points_csv(std::istream &is, int d)
{
  std::vector<Point> out;
  std::string line;
  bool header = true;
  while (std::getline(is, line)) {
    if (line.empty()) {
      continue;
    }
    if (header) {
      header = false;
      if (!line.empty() && (std::isalpha(static_cast<unsigned char>(line[0])) != 0)) {
        continue;
      }
    }
    std::stringstream ss(line);
    std::string cell;
    Point p;
    int a = 0;
    while (std::getline(ss, cell, ',') && a < d) {
      p[a++] = std::stod(cell);
    }
    if (a != d) {
      throw DomainError("read_points_csv: malformed row '" + line + "'");
    }
    out.push_back(p);
  }
  return out;
}

}  // namespace geoextremes

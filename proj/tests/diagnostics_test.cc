#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "geoextremes/diagnostics.hpp"
#include "geoextremes/error.hpp"
#include "geoextremes/numerics.hpp"

using namespace geoextremes;

namespace {

double ks_uniform(std::vector<double> u)
{
  std::sort(u.begin(), u.end());
  double d = 0;
  const double n = static_cast<double>(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    d = std::max({d, (i + 1) / n - u[i], u[i] - i / n});
  }
  return d;
}

// Oracle: sup of |F_n - F| scanned on a dense grid plus both one-sided limits at every sample point.
double ks_brute(const std::vector<double> &x)
{
  const double n = static_cast<double>(x.size());
  auto ecdf = [&](double v, bool left) {
    double c = 0;
    for (double s : x) {
      c += left ? (s < v) : (s <= v);
    }
    return c / n;
  };
  double d = 0;
  std::vector<double> probes = x;
  for (int i = -4000; i <= 4000; ++i) {
    probes.push_back(i * 0.005);
  }
  for (double v : probes) {
    if (std::isinf(v)) {
      continue;
    }
    const double f = gumbel_cdf(v);
    d = std::max({d, std::abs(ecdf(v, false) - f), std::abs(ecdf(v, true) - f)});
  }
  return d;
}

}  // namespace

TEST(CountTv, ExactPmfGivesZero)
{
  std::vector<double> pmf;
  for (int k = 0; k <= 40; ++k) {
    pmf.push_back(poisson_pmf(k, 1.0));
  }
  EXPECT_NEAR(tv_pmf_vs_poisson(pmf, 1.0), 0.0, 1e-15);
}

TEST(CountTv, PointMassAtZero)
{
  CountSample s{std::vector<long>(150, 0), 1.0};
  EXPECT_NEAR(tv_counts_vs_poisson(s), 1 - std::exp(-1.0), 1e-15);
  s.counts.resize(99);
  EXPECT_THROW(tv_counts_vs_poisson(s), InsufficientSample);
}

TEST(CountTv, EqualsLargestEventDiscrepancy)
{
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    std::poisson_distribution<long> pois(0.3 + 0.1 * trial);
    CountSample s{{}, 1.5};
    for (int i = 0; i < 200; ++i) {
      s.counts.push_back(pois(rng));
    }
    const auto pmf = empirical_pmf(s.counts);
    double positive = 0;
    for (std::size_t k = 0; k < pmf.size(); ++k) {
      positive += std::max(0.0, pmf[k] - poisson_pmf(static_cast<int>(k), 1.5));
    }
    const double tv = tv_counts_vs_poisson(s);
    EXPECT_NEAR(tv, positive, 1e-12);
    EXPECT_GE(tv, 0.0);
    EXPECT_LE(tv, 1.0);
  }
}

TEST(SpatialUniformity, NullCalibration)
{
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> pvals;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<Point> pts(500);
    for (auto &p : pts) {
      p = {u(rng), u(rng), 0};
    }
    const ChiSquareReport r = spatial_uniformity(pts, 2);
    EXPECT_EQ(r.bins_per_axis, 10);
    EXPECT_EQ(r.dof, 99.0);
    pvals.push_back(r.p_value);
  }
  EXPECT_GE(kolmogorov_pvalue(ks_uniform(pvals), pvals.size()), 1e-3);
}

TEST(SpatialUniformity, DetectsClustering)
{
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.0, 0.5);
  std::vector<Point> pts(400);
  for (auto &p : pts) {
    p = {u(rng), u(rng), 0};
  }
  EXPECT_LT(spatial_uniformity(pts, 2).p_value, 1e-6);
  pts.resize(199);
  EXPECT_THROW(spatial_uniformity(pts, 2), InsufficientSample);
  pts.resize(300, Point{1.2, 0.5, 0});
  EXPECT_THROW(spatial_uniformity(pts, 2), DomainError);
}

TEST(SpatialUniformity, BinCountRule)
{
  std::vector<Point> pts;
  for (int i = 0; i < 245; ++i) {
    pts.push_back({(i % 7 + 0.5) / 7, (i / 7 % 7 + 0.5) / 7, 0});
  }
  const ChiSquareReport r = spatial_uniformity(pts, 2);
  EXPECT_EQ(r.bins_per_axis, 7);
  EXPECT_EQ(r.statistic, 0.0);
  EXPECT_EQ(r.p_value, 1.0);
}

TEST(GumbelKs, QuantileGrid)
{
  for (std::size_t n : {200u, 1000u, 5000u}) {
    std::vector<double> x;
    for (std::size_t i = 1; i <= n; ++i) {
      x.push_back(-std::log(-std::log((i - 0.5) / n)));
    }
    EXPECT_LE(gumbel_ks(x), 1.0 / n);
  }
}

TEST(GumbelKs, NormalSampleIsDistinguishable)
{
  std::mt19937_64 rng(5);
  std::normal_distribution<double> z;
  std::vector<double> x(10000);
  for (double &v : x) {
    v = z(rng);
  }
  EXPECT_GT(gumbel_ks(x), 0.05);
}

TEST(GumbelKs, MatchesBruteForceWithInfiniteEntries)
{
  std::mt19937_64 rng(6);
  std::extreme_value_distribution<double> g(0.0, 1.0);
  std::vector<double> x(300);
  for (double &v : x) {
    v = std::round(g(rng) * 20) / 20;
  }
  const double ks = gumbel_ks(x);
  EXPECT_NEAR(ks, ks_brute(x), 1e-12);
  std::vector<double> y = x;
  y.insert(y.end(), 100, -std::numeric_limits<double>::infinity());
  EXPECT_NEAR(gumbel_ks(y), ks_brute(y), 1e-12);
  EXPECT_GE(gumbel_ks(y), 0.25);
  std::reverse(y.begin(), y.end());
  EXPECT_EQ(gumbel_ks(y), ks_brute(y));
  x.resize(199);
  x.insert(x.end(), 50, -std::numeric_limits<double>::infinity());
  EXPECT_THROW(gumbel_ks(x), InsufficientSample);
}

TEST(BoundTerms, HandComputedExample)
{
  MosaicSpec spec;
  spec.t = 100;
  const double b = b_t(spec);
  CenterProcessOutput a, c;
  a.centers = {{0, 0, 0}, {2 * b - 0.1, 0, 0}, {0, 2 * b + 0.1, 0}};
  a.stabilization = {b - 1, b + 1, b};
  a.count = 3;
  c.centers = {{0, 2 * b, 0}};
  c.stabilization = {b + 2};
  c.count = 1;
  const std::vector<CenterProcessOutput> outs{a, c};
  const BoundTermEstimates e = estimate_bound_terms(spec, outs);
  EXPECT_DOUBLE_EQ(e.stab_tail, 0.5);
  // Within a: only the first pair is closer than 2b. Within c: none.
  EXPECT_DOUBLE_EQ(e.c2_like, 0.5);
  // Across: (0,0)-(0,2b) at distance 2b, (0,2b+0.1)-(0,2b); the middle one is farther.
  EXPECT_DOUBLE_EQ(e.pair_close_mass, 2.0);
  EXPECT_EQ(e.centers, 4u);
}

TEST(BoundTerms, DegenerateThresholdsAndScale)
{
  MosaicSpec spec;
  spec.t = 100;
  const auto none = estimate_bound_terms(spec, fixed_threshold(spec, std::numeric_limits<double>::infinity()), 6,
                                         SeedSpec{1, 0});
  EXPECT_EQ(none.stab_tail, 0.0);
  EXPECT_EQ(none.pair_close_mass, 0.0);
  EXPECT_EQ(none.c2_like, 0.0);
  MosaicSpec unit = spec;
  unit.t = 1.0;
  EXPECT_EQ(b_t(unit), 0.0);
  CenterProcessOutput a;
  a.centers = {{0.1, 0.1, 0}, {0.1, 0.2, 0}};
  a.stabilization = {0.5, 0.5};
  a.count = 2;
  const std::vector<CenterProcessOutput> outs{a, a};
  const auto e = estimate_bound_terms(unit, outs);
  EXPECT_EQ(e.c2_like, 0.0);
  EXPECT_EQ(e.pair_close_mass, 2.0);
  a.centers = {{0.3, 0.1, 0}, {0.3, 0.2, 0}};
  const std::vector<CenterProcessOutput> shifted{outs[0], a};
  EXPECT_EQ(estimate_bound_terms(unit, shifted).pair_close_mass, 0.0);
}

TEST(BoundTerms, NonincreasingInThreshold)
{
  MosaicSpec spec;
  spec.t = 100;
  double prev_pair = std::numeric_limits<double>::infinity(), prev_c2 = prev_pair;
  for (double v : {0.0, 0.3, 0.45, 0.6}) {
    const auto e = estimate_bound_terms(spec, fixed_threshold(spec, v), 10, SeedSpec{2, 0});
    EXPECT_LE(e.pair_close_mass, prev_pair);
    EXPECT_LE(e.c2_like, prev_c2);
    prev_pair = e.pair_close_mass;
    prev_c2 = e.c2_like;
  }
}

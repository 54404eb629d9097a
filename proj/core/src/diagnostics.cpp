#include "geoextremes/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "geoextremes/error.hpp"
#include "geoextremes/numerics.hpp"
#include "geoextremes/parallel.hpp"

namespace geoextremes {

namespace {

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe mean_se(std::span<const double> x)
{
  MeanSe r;
  const double n = static_cast<double>(x.size());
  if (x.empty()) {
    return r;
  }
  double s = 0.0;
  for (double v : x) {
    s += v;
  }
  r.mean = s / n;
  if (x.size() > 1) {
    double q = 0.0;
    for (double v : x) {
      q += (v - r.mean) * (v - r.mean);
    }
    r.se = std::sqrt(q / (n - 1.0) / n);
  }
  return r;
}

}  // namespace

std::vector<double> empirical_pmf(std::span<const long> counts)
{
  if (counts.empty()) {
    return {};
  }
  long top = 0;
  for (long c : counts) {
    if (c < 0) {
      throw DomainError("empirical_pmf: negative count");
    }
    top = std::max(top, c);
  }
  std::vector<double> pmf(static_cast<std::size_t>(top) + 1, 0.0);
  for (long c : counts) {
    pmf[static_cast<std::size_t>(c)] += 1.0;
  }
  for (double &p : pmf) {
    p /= static_cast<double>(counts.size());
  }
  return pmf;
}

double tv_pmf_vs_poisson(std::span<const double> pmf, double mean)
{
  if (!(mean >= 0.0)) {
    throw DomainError("tv_pmf_vs_poisson: negative mean");
  }
  double sum = 0.0;
  double covered = 0.0;
  for (std::size_t k = 0; k < pmf.size(); ++k) {
    const double q = poisson_pmf(static_cast<int>(k), mean);
    covered += q;
    sum += std::abs(pmf[k] - q);
  }
  sum += std::max(0.0, 1.0 - covered);
  return std::min(1.0, 0.5 * sum);
}

double tv_counts_vs_poisson(const CountSample &sample)
{
  if (sample.counts.size() < 100) {
    throw InsufficientSample("tv_counts_vs_poisson: needs at least 100 replicates, got " +
                             std::to_string(sample.counts.size()));
  }
  const auto pmf = empirical_pmf(sample.counts);
  return tv_pmf_vs_poisson(pmf, sample.target_mean);
}

ChiSquareReport spatial_uniformity(std::span<const Point> points, int d)
{
  if (d < 1 || d > 3) {
    throw DomainError("spatial_uniformity: d must be 1, 2 or 3");
  }
  if (points.size() < 200) {
    throw InsufficientSample("spatial_uniformity: needs at least 200 centers, got " +
                             std::to_string(points.size()));
  }
  ChiSquareReport r;
  r.n = points.size();
  const double n = static_cast<double>(r.n);
  int g = static_cast<int>(std::floor(std::pow(n / 5.0, 1.0 / d)));
  while (std::pow(g + 1, d) * 5.0 <= n) {
    ++g;
  }
  while (g > 1 && std::pow(g, d) * 5.0 > n) {
    --g;
  }
  r.bins_per_axis = g;
  std::size_t cells = 1;
  for (int a = 0; a < d; ++a) {
    cells *= static_cast<std::size_t>(g);
  }
  std::vector<double> observed(cells, 0.0);
  for (const Point &p : points) {
    std::size_t idx = 0;
    for (int a = d - 1; a >= 0; --a) {
      if (!(p[a] >= 0.0 && p[a] <= 1.0)) {
        throw DomainError("spatial_uniformity: point outside [0,1]^d");
      }
      const int b = std::min(g - 1, static_cast<int>(p[a] * g));
      idx = idx * static_cast<std::size_t>(g) + static_cast<std::size_t>(b);
    }
    observed[idx] += 1.0;
  }
  const double expected = n / static_cast<double>(cells);
  for (double o : observed) {
    r.statistic += (o - expected) * (o - expected) / expected;
  }
  r.dof = static_cast<double>(cells) - 1.0;
  r.p_value = r.dof > 0 ? chi_square_survival(r.statistic, r.dof) : 1.0;
  return r;
}

double gumbel_cdf(double x)
{
  return std::exp(-std::exp(-x));
}

double gumbel_ks(std::span<const double> statistics)
{
  std::vector<double> x(statistics.begin(), statistics.end());
  const auto finite = std::count_if(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
  if (finite < 200) {
    throw InsufficientSample("gumbel_ks: needs at least 200 finite statistics, got " + std::to_string(finite));
  }
  if (std::any_of(x.begin(), x.end(), [](double v) { return std::isnan(v); })) {
    throw DomainError("gumbel_ks: NaN statistic");
  }
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double dist = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = std::isinf(x[i]) ? (x[i] < 0 ? 0.0 : 1.0) : gumbel_cdf(x[i]);
    dist = std::max({dist, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return dist;
}

BoundTermEstimates estimate_bound_terms(const MosaicSpec &spec, std::span<const CenterProcessOutput> outputs)
{
  BoundTermEstimates est;
  est.b_t = b_t(spec);
  est.replicates = outputs.size();
  const double reach2 = 4.0 * est.b_t * est.b_t;

  std::size_t tail = 0;
  std::vector<double> within;
  within.reserve(outputs.size());
  for (const auto &out : outputs) {
    est.centers += out.count;
    for (double r : out.stabilization) {
      tail += r > est.b_t ? 1 : 0;
    }
    double pairs = 0.0;
    for (std::size_t i = 0; i < out.count; ++i) {
      for (std::size_t j = i + 1; j < out.count; ++j) {
        pairs += distance2(out.centers[i], out.centers[j]) <= reach2 ? 1.0 : 0.0;
      }
    }
    within.push_back(pairs);
  }
  if (est.centers > 0) {
    const double p = static_cast<double>(tail) / static_cast<double>(est.centers);
    est.stab_tail = p;
    est.stab_tail_se = std::sqrt(p * (1.0 - p) / static_cast<double>(est.centers));
  }
  const MeanSe c2 = mean_se(within);
  est.c2_like = c2.mean;
  est.c2_like_se = c2.se;

  std::vector<double> across;
  for (std::size_t j = 0; j + 1 < outputs.size(); j += 2) {
    const auto &a = outputs[j];
    const auto &b = outputs[j + 1];
    double pairs = 0.0;
    for (const Point &w : a.centers) {
      for (const Point &z : b.centers) {
        pairs += distance2(w, z) <= reach2 ? 1.0 : 0.0;
      }
    }
    across.push_back(pairs);
  }
  const MeanSe pc = mean_se(across);
  est.pair_close_mass = pc.mean;
  est.pair_close_mass_se = pc.se;
  return est;
}

BoundTermEstimates estimate_bound_terms(const MosaicSpec &spec, const CalibratedThreshold &threshold,
                                        std::size_t replicates, const SeedSpec &seed, unsigned workers)
{
  std::vector<CenterProcessOutput> outputs(replicates);
  parallel_for(replicates, workers,
               [&](std::size_t r) { outputs[r] = build_center_process(spec, threshold, seed.child(40, r)); });
  return estimate_bound_terms(spec, outputs);
}

}  // namespace geoextremes

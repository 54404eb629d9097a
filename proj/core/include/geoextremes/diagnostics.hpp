#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "geoextremes/geometry.hpp"
#include "geoextremes/mosaic.hpp"
#include "geoextremes/rng.hpp"

namespace geoextremes {

struct CountSample {
  std::vector<long> counts;
  /// Mean of the Poisson reference law.
  double target_mean = 1.0;
};

/// Empirical pmf on {0, ..., max count}.
std::vector<double> empirical_pmf(std::span<const long> counts);

/**
 * Half the L1 distance between the empirical count law and Poisson(target_mean):
 * the sum over k <= max observed plus the Poisson mass above it. Needs at least
 * 100 replicates (InsufficientSample).
 */
double tv_counts_vs_poisson(const CountSample &sample);
/// Same for an explicit pmf on {0, ..., pmf.size() - 1}.
double tv_pmf_vs_poisson(std::span<const double> pmf, double mean);

struct ChiSquareReport {
  double statistic = 0.0;
  double dof = 0.0;
  double p_value = 1.0;
  int bins_per_axis = 0;
  std::size_t n = 0;
};

/**
 * Chi-square test of uniformity on [0,1]^d with g^d equal bins, g the largest
 * integer with n / g^d >= 5. Needs at least 200 points (InsufficientSample);
 * points outside the closed cube are a DomainError.
 */
ChiSquareReport spatial_uniformity(std::span<const Point> points, int d);

/// Standard Gumbel distribution function exp(-exp(-x)).
double gumbel_cdf(double x);

/**
 * Kolmogorov-Smirnov distance of the sample to the standard Gumbel law. Entries
 * equal to -infinity are mass at -infinity. Needs at least 200 finite entries.
 */
double gumbel_ks(std::span<const double> statistics);

struct BoundTermEstimates {
  /// Fraction of retained centers whose stabilization radius exceeds b_t.
  double stab_tail = 0.0;
  double stab_tail_se = 0.0;
  /// Expected number of pairs (w, z), w and z from independent replicates, with |w - z| <= 2 b_t.
  double pair_close_mass = 0.0;
  double pair_close_mass_se = 0.0;
  /// Expected number of unordered pairs of retained centers of one replicate at distance <= 2 b_t.
  double c2_like = 0.0;
  double c2_like_se = 0.0;
  double b_t = 0.0;
  std::size_t replicates = 0;
  std::size_t centers = 0;
};

/// Estimates from precomputed replicates; replicates 2j and 2j+1 form the independent pairs.
BoundTermEstimates estimate_bound_terms(const MosaicSpec &spec, std::span<const CenterProcessOutput> outputs);

/// Runs `replicates` center processes with seeds seed.child(40, r) and estimates the terms.
BoundTermEstimates estimate_bound_terms(const MosaicSpec &spec, const CalibratedThreshold &threshold,
                                        std::size_t replicates, const SeedSpec &seed, unsigned workers = 1);

}  // namespace geoextremes

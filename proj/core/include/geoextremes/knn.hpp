#pragma once

#include <cstddef>
#include <vector>

#include "geoextremes/sampling.hpp"

namespace geoextremes {

/// Poisson process with intensity c * s * f on [0,1]^d, observed through k-nearest neighbour balls.
struct KnnSpec {
  int d = 2;
  int k = 0;
  double c = 1.0;
  double s = 1e4;
  Density f = Density::uniform(2);

  IntensitySpec intensity() const;
};

/// a_s = log s + k log log s - log k!.
double threshold_a(const KnnSpec &spec);

/// Exact area of the intersection of the disk B(center, r) with an axis aligned rectangle.
double disk_box_area(const Point &center, double r, const Box &box);
/// Volume of B(center, r) intersected with a box in R^3.
double ball_box_volume(const Point &center, double r, const Box &box);

/// (f L_d)(B(x, r) intersected with [0,1]^d). An infinite radius gives the integral of f.
double ball_content(const KnnSpec &spec, const Point &x, double r);

/**
 * Radius r with c s (f L_d)(B(x, r)) = a_s. Returns +infinity when even the whole
 * cube carries less mass than a_s, and 0 when a_s <= 0.
 */
double radius_r_s(const KnnSpec &spec, const Point &x);

struct ExceedanceOutput {
  std::vector<Point> points;
  /// 1 when the point has at most k other points in its closed ball B(x, r_s(x)).
  std::vector<char> retained;
  /// lambda_s-content of B(x, T_k(x)), T_k the distance to the (k+1)-th nearest other point.
  std::vector<double> content;
  std::vector<Point> centers;
  std::size_t count = 0;
  /// Largest content; -infinity for an empty configuration.
  double max_content = 0.0;
};

ExceedanceOutput build_knn_exceedance(const KnnSpec &spec, const SeedSpec &seed);

/// Mean number of exceedances, c s int f * P(Poisson(a_s) <= k).
double exact_mean_count(const KnnSpec &spec);

struct MeanEstimate {
  double mean = 0.0;
  double se = 0.0;
};

/// Same mean by Monte Carlo over x, with the content of B(x, r_s(x)) computed numerically.
MeanEstimate mc_mean_count(const KnnSpec &spec, std::size_t samples, const SeedSpec &seed);

/// max content - log s - k log log s + log k! - log(c int f); asymptotically standard Gumbel.
double gumbel_statistic_knn(const ExceedanceOutput &out, const KnnSpec &spec);

/// L_d(B(o,1) \ B(x,1)) for |x| = t <= 2, d in {2, 3}.
double lens_complement_volume(int d, double t);
/// 2 kappa_{d-1} / (d+1) t^{(d+1)/2}.
double lemma_xA_bound(int d, double t);

struct LemmaXAReport {
  int d = 2;
  std::size_t samples = 0;
  std::size_t violations = 0;
  /// Smallest ratio of the volume to the lower bound over the samples.
  double min_ratio = 0.0;
  double t_at_min = 0.0;
};

/// Checks the lens lower bound at random |x| in (0, 1].
LemmaXAReport verify_lemma_xA(int d, std::size_t samples, const SeedSpec &seed);

}  // namespace geoextremes

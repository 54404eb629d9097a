#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "geoextremes/geometry.hpp"
#include "geoextremes/rng.hpp"
#include "geoextremes/sampling.hpp"

namespace geoextremes {

enum class MosaicKind { voronoi, delaunay };

const char *to_string(MosaicKind kind);
MosaicKind mosaic_kind_from_string(const std::string &name);

/**
 * How much of the point process a configuration represents. `complete`: the
 * configuration is all of mu. `windowed`: mu is only known on config.region(),
 * and results must be certified not to depend on points outside it.
 */
enum class CellMode { complete, windowed };

// Voronoi cells.

/// Number of cones of half-angle pi/6 tiling the plane around a point.
inline constexpr int kStabilizationCones = 6;

/**
 * Voronoi cell of config[i], recentred at the nucleus. Neighbours are processed
 * by increasing distance; the construction stops once the polygon lies inside
 * half the distance of the next unprocessed point. Throws UnboundedCell when the
 * cell is unbounded (complete mode) or reaches outside what the region certifies.
 */
ConvexCell voronoi_cell(const PointConfiguration &config, std::size_t i, CellMode mode = CellMode::windowed);
ConvexCell voronoi_cell(const PointConfiguration &config, const Point &nucleus,
                        CellMode mode = CellMode::windowed);

/// Distance from config[i] to the nearest other point in each cone; infinity for an empty cone.
std::array<double, kStabilizationCones> cone_distances(const PointConfiguration &config, std::size_t i);

/**
 * 2 max_i R_i over the six cones. The cell of config[i] lies in B(x, R/2) and is
 * determined by the points in B(x, R). Infinity if a cone is empty, or in
 * windowed mode if some cone distance exceeds the certified distance to the
 * region boundary.
 */
double stabilization_radius_voronoi(const PointConfiguration &config, std::size_t i,
                                    CellMode mode = CellMode::windowed);

// Delaunay triangulation.

struct Triangulation {
  /// Counter-clockwise vertex indices of the finite triangles.
  std::vector<std::array<std::size_t, 3>> triangles;
  /// In-circle tests that returned exactly zero (cocircular input); resolved as "not in conflict".
  std::size_t incircle_ties = 0;
  /// Input points equal to an earlier one; ignored.
  std::size_t duplicates = 0;
};

/**
 * Delaunay triangulation of planar points by Bowyer-Watson insertion in Hilbert
 * order, with a vertex at infinity closing the hull. Cocircular ties are broken
 * by insertion order, so the result is deterministic. Fewer than three affinely
 * independent points give no triangles.
 */
Triangulation delaunay_triangulate(std::span<const Point> points);

struct DelaunayCell {
  std::array<std::size_t, 3> vertices{};
  Sphere circle;
  /// The simplex recentred at its circumcenter.
  ConvexCell cell;
};

/**
 * Delaunay cells of the configuration whose circumcenter lies in `core`. Every
 * emitted cell is re-checked to have no configuration point inside its open
 * circumdisk. In windowed mode the circumdisk must also lie in config.region(),
 * otherwise UnboundedCell is thrown.
 */
std::vector<DelaunayCell> delaunay_cells(const PointConfiguration &config, const Box &core,
                                         CellMode mode = CellMode::windowed);

// Model.

struct MosaicSpec {
  MosaicKind kind = MosaicKind::voronoi;
  int d = 2;
  double gamma = 1.0;
  double t = 100.0;
  double c = 1.0;
  SizeKind functional = SizeKind::centered_inradius;
  /// Sampling buffer as a multiple of b_t.
  double buffer_factor = 3.0;
  /// Deviation threshold used by the pair bound check.
  double epsilon = 0.2;

  /// Throws DomainError for unsupported mosaic/functional pairs or parameters.
  void validate() const;
  int k() const
  {
    return homogeneity(functional, d);
  }
};

/// Expected number of Delaunay circumcenters per unit volume (2 gamma for d = 2).
double beta_d(int d, double gamma);

/// gamma for Voronoi cells, beta_d for Delaunay cells.
double cell_rate(const MosaicSpec &spec);

/// Stabilization scale: 2 (3 I log t / gamma)^{1/d} (Voronoi) or (3 log t / (gamma kappa_d))^{1/d} (Delaunay).
double b_t(const MosaicSpec &spec);

/// Isoperimetric constant tau for the functional of `spec`.
double tau_constant(const MosaicSpec &spec);

/// Limit of v_t^{-d/k} log t.
double threshold_rate_limit(const MosaicSpec &spec);

/// c / (rate * t): the typical-cell exceedance probability defining v_t.
double target_level(const MosaicSpec &spec);

/// Value of ConvexCell functional for a (recentred) cell of the given mosaic.
double cell_sigma(const MosaicSpec &spec, const ConvexCell &cell);
double cell_deviation(const MosaicSpec &spec, const ConvexCell &cell);

// Typical cells.

struct TypicalCellSample {
  std::vector<ConvexCell> cells;
  std::vector<double> sigma_values;
  std::vector<double> deviation_values;
  std::vector<double> rho_o;
  std::vector<double> r_o;
  std::vector<double> area;
  /// Delaunay only: cells per unit volume over the simulated windows, and its standard error.
  double beta_hat = 0.0;
  double beta_se = 0.0;
  double observed_volume = 0.0;

  std::size_t size() const
  {
    return sigma_values.size();
  }
};

struct TypicalOptions {
  bool deviation = true;
  bool keep_cells = true;
  unsigned workers = 1;
};

/// Independent draws of C(o, eta + delta_o), each simulated on a ball grown until it contains B(o, R).
TypicalCellSample sample_typical_voronoi(const MosaicSpec &spec, std::size_t n, const SeedSpec &seed,
                                         const TypicalOptions &opts = {});

/**
 * Circumcenter-recentred Delaunay cells with circumcenter in the cores of
 * independent windows, until at least n cells are collected. All cells of every
 * simulated window are kept.
 */
TypicalCellSample sample_typical_delaunay(const MosaicSpec &spec, std::size_t n, const SeedSpec &seed,
                                          const TypicalOptions &opts = {});

/// CSV with header sigma,deviation,rho_o,r_o,area.
void write_typical_csv(std::ostream &os, const TypicalCellSample &sample);

// Exact laws where available.

/// P(Sigma(Z) > v) in closed form or by quadrature: Voronoi centered inradius, Delaunay area and circumradius.
std::optional<double> typical_survival_exact(const MosaicSpec &spec, double v);
bool has_exact_law(const MosaicSpec &spec);

/// Exact law if available, otherwise the empirical survival of `sample` (which must then be non-null).
std::function<double(double)> typical_survival(const MosaicSpec &spec, const TypicalCellSample *sample);

// Threshold.

enum class CalibrationMode { empirical, exact };

struct CalibratedThreshold {
  double v_t = 0.0;
  double target_level = 0.0;
  std::size_t n_typical = 0;
  double se = 0.0;
  CalibrationMode mode = CalibrationMode::empirical;
};

/**
 * Empirical (1 - target_level)-quantile of the typical sample. Requires
 * n >= 50 / target_level (InsufficientSample otherwise). The standard error is
 * half the spread of the order statistics one binomial SD either side.
 */
CalibratedThreshold calibrate_v_t(const MosaicSpec &spec, const TypicalCellSample &typical);

/// Inversion of the exact law; DomainError if there is none for `spec`.
CalibratedThreshold calibrate_v_t_exact(const MosaicSpec &spec);

/// Threshold with an explicit value, for tests and the degenerate cases 0 and infinity.
CalibratedThreshold fixed_threshold(const MosaicSpec &spec, double v_t);

// Center processes.

struct CenterProcessOutput {
  std::vector<Point> centers;
  std::vector<Point> scaled_centers;
  std::vector<double> sigma;
  /// Stabilization radius of each retained center (cone radius for Voronoi, circumradius for Delaunay).
  std::vector<double> stabilization;
  std::size_t count = 0;
  /// Max of Sigma over all candidates in W_t; -infinity if there are none.
  double max_sigma = 0.0;
  /// Nuclei (Voronoi) or cells (Delaunay) with center in W_t.
  std::size_t candidates = 0;
  std::size_t sampled_points = 0;
};

/// Samples eta on the buffered window and thins the centers in W_t by Sigma > v_t.
CenterProcessOutput build_center_process(const MosaicSpec &spec, const CalibratedThreshold &threshold,
                                         const SeedSpec &seed);

/// Same on a given configuration whose region contains the buffered window.
CenterProcessOutput build_center_process(const MosaicSpec &spec, double v_t, const PointConfiguration &config);

/**
 * Standardised maximum: lambda with rate * t * P(Sigma(Z) > max_sigma) = e^{-lambda},
 * i.e. max_sigma = v_{t e^lambda}. -infinity when there is no candidate.
 */
double gumbel_statistic_mosaic(const MosaicSpec &spec, double max_sigma,
                               const std::function<double(double)> &survival);

// Bound checks.

struct PairBoundRow {
  double distance = 0.0;
  std::size_t samples = 0;
  double lhs = 0.0;
  double lhs_se = 0.0;
  double rhs = 0.0;
  bool violation = false;
};

struct PairBoundReport {
  double epsilon = 0.0;
  double a = 0.0;
  double tau = 0.0;
  double v = 0.0;
  double p_single = 0.0;
  std::vector<PairBoundRow> rows;
  std::size_t violations = 0;
};

/**
 * Monte Carlo estimate of P(Sigma(x) > v, Sigma(y) > v, dev(x) < eps, dev(y) < eps)
 * for the cells of x = o and y = (|x - y|, 0) in eta + delta_x + delta_y, against
 * P(Sigma(o) > v) exp(-gamma a^d tau (1 - arccos(sqrt(1 - a^2)) / pi) v^{d/k}) with
 * a = (1 - eps) / (1 + eps). A violation is lhs > rhs + 3 SE. `pairs` samples are
 * split evenly over `distances` (default: a grid in units of v plus one far point).
 */
PairBoundReport check_pair_bound_voronoi(const MosaicSpec &spec, const CalibratedThreshold &threshold,
                                         std::size_t pairs, const SeedSpec &seed,
                                         const std::function<double(double)> &survival = {},
                                         std::vector<double> distances = {});

/// Largest eps for which dev(S) < eps forces every cap cut off by a side of S to have area <= pi r^2 / 3.
double delaunay_overlap_epsilon();

struct OverlapReport {
  double epsilon = 0.0;
  std::size_t requested = 0;
  std::size_t checked = 0;
  std::size_t generation_failures = 0;
  std::size_t violations = 0;
  /// Largest lens area / (2 kappa_2 / 3) r(y, u)^2 observed.
  double max_ratio = 0.0;
  std::array<std::size_t, 3> per_ell{};
};

/**
 * Draws configurations (x, u), (y, u) with l = |x| in {1, 2, 3}, dev(x, u) < eps,
 * r(x, u) <= r(y, u) and every x_i outside B(y, u), and compares the lens area of
 * the two circumdisks with (2 kappa_2 / 3) r(y, u)^2.
 */
OverlapReport check_overlap_bound_delaunay(std::size_t samples, const SeedSpec &seed,
                                           std::size_t max_attempts = 1000);

}  // namespace geoextremes

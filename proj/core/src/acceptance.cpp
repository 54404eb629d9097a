#include "geoextremes/acceptance.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <numbers>

#include "geoextremes/diagnostics.hpp"
#include "geoextremes/error.hpp"
#include "geoextremes/integral.hpp"
#include "geoextremes/knn.hpp"
#include "geoextremes/mosaic.hpp"
#include "geoextremes/numerics.hpp"
#include "geoextremes/parallel.hpp"

namespace geoextremes {

namespace {

constexpr double kPi = std::numbers::pi;

std::string fmt(const char *format, ...)
{
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof buf, format, args);
  va_end(args);
  return buf;
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

const char *const kNames[kAcceptanceCriteria] = {
    "knn-poisson-limit",  "intensity-identity", "lemma-xA",          "mecke-identity",   "blaschke-petkantschin",
    "delaunay-constants", "rathie-law",         "voronoi-void-law",  "voronoi-gumbel",   "delaunay-gumbel",
    "stabilization",      "bound-term-trend",   "lemma-overlap",
};

// Wall-clock budgets in seconds; 0 means none.
constexpr std::array<double, kAcceptanceCriteria> kBudget{300, 1, 1, 60, 300, 300, 300, 180, 1800, 1800, 0, 0, 0};

Outcome knn_poisson_limit(unsigned workers)
{
  KnnSpec ks;
  ks.d = 2;
  ks.k = 0;
  ks.c = 1.0;
  ks.s = 1e4;
  const std::size_t reps = 2000;
  std::vector<long> counts(reps);
  parallel_for(reps, workers,
               [&](std::size_t r) { counts[r] = static_cast<long>(build_knn_exceedance(ks, SeedSpec{1001, r}).count); });
  const double tv = tv_counts_vs_poisson(CountSample{counts, 1.0});
  const double p0 = static_cast<double>(std::count(counts.begin(), counts.end(), 0L)) / reps;
  const double dp0 = std::abs(p0 - std::exp(-1.0));
  return {tv <= 0.08 && dp0 <= 0.03, fmt("tv=%.4f (<=0.08) |p0-e^-1|=%.4f (<=0.03) p0=%.4f", tv, dp0, p0)};
}

Outcome intensity_identity()
{
  KnnSpec ks;
  ks.k = 1;
  double prev = std::numeric_limits<double>::infinity();
  bool ok = true;
  std::string detail = "|mean-1|:";
  for (double s : {1e3, 1e6, 1e9}) {
    ks.s = s;
    const double e = std::abs(exact_mean_count(ks) - 1.0);
    ok = ok && e < prev;
    prev = e;
    detail += fmt(" s=%.0e %.6f", s, e);
  }
  return {ok, detail + " (strictly decreasing)"};
}

Outcome lemma_xa()
{
  const LemmaXAReport rep = verify_lemma_xA(2, 10000, SeedSpec{1003, 0});
  const double slack0 = lens_complement_volume(2, 0.0) - lemma_xA_bound(2, 0.0);
  const double at1 = lens_complement_volume(2, 1.0);
  const bool ok = rep.violations == 0 && slack0 == 0.0 && std::abs(at1 - 1.91322) <= 5e-6 &&
                  at1 >= lemma_xA_bound(2, 1.0) && std::abs(lemma_xA_bound(2, 1.0) - 4.0 / 3.0) < 1e-15;
  return {ok, fmt("violations=%zu/%zu slack(o)=%.3g lhs(|x|=1)=%.6f (1.91322) bound=%.6f", rep.violations,
                  rep.samples, slack0, at1, lemma_xA_bound(2, 1.0))};
}

Outcome mecke_identity()
{
  const IntensitySpec intensity = IntensitySpec::constant(5.0, 2);
  bool ok = true;
  std::string detail;
  std::uint64_t j = 0;
  for (auto [name, f] : {std::pair{"indicator", MeckeFunction::indicator_unit_cube},
                         std::pair{"isolated", MeckeFunction::isolated_in_unit_cube},
                         std::pair{"close_pair", MeckeFunction::close_pair}}) {
    const MeckeReport rep = verify_mecke(intensity, f, 0.2, 100000, SeedSpec{1004, j++});
    const double pooled = std::hypot(rep.lhs_se, rep.rhs_se);
    const double z = std::abs(rep.lhs - rep.rhs) / pooled;
    ok = ok && std::abs(rep.lhs - rep.rhs) <= 3.0 * pooled;
    detail += fmt("%s%s |d|/se=%.2f", detail.empty() ? "" : " ", name, z);
  }
  return {ok, detail + " (<=3)"};
}

Outcome blaschke_petkantschin()
{
  struct Case {
    const char *formula;
    int d, k, m;
    double r0;
  };
  const Case cases[] = {{"sph", 2, 0, 0, 0.0}, {"sph", 3, 0, 0, 0.0}, {"lin", 2, 1, 0, 0.0}, {"lin", 2, 2, 0, 0.0},
                        {"lin", 3, 1, 0, 0.0}, {"lin", 3, 2, 0, 0.0}, {"sub", 2, 1, 1, 0.7}, {"sub", 2, 2, 2, 0.0},
                        {"sub", 2, 2, 1, 0.0}};
  const std::size_t n = 1000000;
  double worst = 0.0;
  std::string worst_case;
  int checks = 0;
  std::uint64_t j = 0;
  for (const Case &c : cases) {
    for (const char *fn : {"gaussian", "cube"}) {
      const TestFunction f = TestFunction::from_name(fn);
      const SeedSpec seed{1005, j++};
      IdentityCheck r;
      if (c.formula[0] == 's' && c.formula[1] == 'p') {
        r = verify_bp_spherical(c.d, f, n, seed);
      }
      else if (c.formula[0] == 'l') {
        r = verify_bp_linear(c.d, c.k, f, n, seed);
      }
      else {
        r = verify_bp_subsphere(c.d, c.k, c.m, c.r0, f, n, seed);
      }
      ++checks;
      if (std::abs(r.z_score) >= worst) {
        worst = std::abs(r.z_score);
        worst_case = fmt("%s d=%d k=%d m=%d %s", c.formula, c.d, c.k, c.m, fn);
      }
    }
  }
  return {worst <= 3.0, fmt("%d checks, max |z|=%.2f (<=3) at %s", checks, worst, worst_case.c_str())};
}

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe mean_se(const std::vector<double> &x)
{
  const double n = static_cast<double>(x.size());
  double m = 0.0, m2 = 0.0;
  for (double v : x) {
    m += v;
    m2 += v * v;
  }
  m /= n;
  return {m, std::sqrt(std::max(0.0, m2 / n - m * m) / n)};
}

MosaicSpec delaunay_area_spec()
{
  MosaicSpec ms;
  ms.kind = MosaicKind::delaunay;
  ms.functional = SizeKind::volume;
  ms.gamma = 1.0;
  ms.t = 400.0;
  ms.c = 1.0;
  return ms;
}

Outcome delaunay_constants(unsigned workers)
{
  const MosaicSpec ms = delaunay_area_spec();
  const TypicalCellSample s = sample_typical_delaunay(ms, 100000, SeedSpec{1006, 0}, {false, false, workers});
  const double rel = std::abs(s.beta_hat - 2.0) / 2.0;
  const MeanSe a = mean_se(s.area);
  const bool ok = s.size() >= 100000 && rel <= 0.02 && std::abs(a.mean - 0.5) <= 3.0 * a.se;
  return {ok, fmt("n=%zu beta_hat=%.5f+-%.5f (2 within 2%%: %.3f%%) mean area=%.5f+-%.5f (0.5 within 3 SE)", s.size(),
                  s.beta_hat, s.beta_se, 100 * rel, a.mean, a.se)};
}

Outcome rathie_law(unsigned workers)
{
  const MosaicSpec ms = delaunay_area_spec();
  const TypicalCellSample s = sample_typical_delaunay(ms, 100000, SeedSpec{1007, 0}, {false, false, workers});
  const double n = static_cast<double>(s.size());
  bool ok = true;
  std::string detail;
  for (double v : {0.5, 1.0, 2.0}) {
    const double emp = static_cast<double>(std::count_if(s.area.begin(), s.area.end(), [v](double a) { return a > v; })) / n;
    const double ex = rathie_survival(v, 1.0);
    ok = ok && std::abs(emp - ex) <= 0.02;
    detail += fmt("v=%.1f emp=%.4f exact=%.4f; ", v, emp, ex);
  }
  // S(v) < 1e-40 beyond v = 40.
  double integral = 0.0;
  for (double a = 0.0; a < 40.0; a += 2.0) {
    integral += integrate([](double v) { return rathie_survival(v, 1.0); }, a, a + 2.0, 1e-7, 8);
  }
  ok = ok && std::abs(integral - 0.5) <= 1e-3;
  return {ok, detail + fmt("int S=%.7f (0.5 +- 1e-3)", integral)};
}

Outcome voronoi_void_law(unsigned workers)
{
  MosaicSpec ms;
  ms.functional = SizeKind::centered_inradius;
  const std::size_t n = 100000;
  const TypicalCellSample s = sample_typical_voronoi(ms, n, SeedSpec{1008, 0}, {false, false, workers});
  bool ok = true;
  std::string detail;
  for (double r : {0.2, 0.4, 0.6}) {
    const double p = std::exp(-kPi * 4.0 * r * r);
    const double emp =
        static_cast<double>(std::count_if(s.rho_o.begin(), s.rho_o.end(), [r](double x) { return x > r; })) / n;
    const double se = std::sqrt(p * (1.0 - p) / n);
    ok = ok && std::abs(emp - p) <= 3.0 * se;
    detail += fmt("r=%.1f emp=%.5f exact=%.5f z=%.2f; ", r, emp, p, (emp - p) / se);
  }
  return {ok, detail + "(|z|<=3)"};
}

struct GumbelRun {
  double tv = 0.0;
  double ks = 0.0;
  double chi_p = 0.0;
  double mean_count = 0.0;
};

GumbelRun mosaic_gumbel(const MosaicSpec &ms, std::uint64_t master, unsigned workers)
{
  const std::size_t reps = 1000;
  const CalibratedThreshold th = calibrate_v_t_exact(ms);
  const auto survival = typical_survival(ms, nullptr);
  std::vector<long> counts(reps);
  std::vector<double> stats(reps);
  std::vector<std::vector<Point>> centers(reps);
  parallel_for(reps, workers, [&](std::size_t r) {
    const CenterProcessOutput out = build_center_process(ms, th, SeedSpec{master, r});
    counts[r] = static_cast<long>(out.count);
    stats[r] = gumbel_statistic_mosaic(ms, out.max_sigma, survival);
    centers[r] = out.scaled_centers;
  });
  GumbelRun g;
  g.tv = tv_counts_vs_poisson(CountSample{counts, ms.c});
  g.ks = gumbel_ks(stats);
  std::vector<Point> pooled;
  for (const auto &c : centers) {
    pooled.insert(pooled.end(), c.begin(), c.end());
  }
  g.chi_p = spatial_uniformity(pooled, 2).p_value;
  for (long c : counts) {
    g.mean_count += static_cast<double>(c) / reps;
  }
  return g;
}

Outcome voronoi_gumbel(unsigned workers)
{
  MosaicSpec ms;
  ms.functional = SizeKind::centered_inradius;
  ms.t = 400.0;
  const GumbelRun g = mosaic_gumbel(ms, 1009, workers);
  return {g.tv <= 0.12 && g.chi_p >= 1e-3 && g.ks <= 0.1,
          fmt("tv=%.4f (<=0.12) chi2 p=%.4f (>=1e-3) ks=%.4f (<=0.1) mean count=%.3f", g.tv, g.chi_p, g.ks,
              g.mean_count)};
}

Outcome delaunay_gumbel(unsigned workers)
{
  const MosaicSpec ms = delaunay_area_spec();
  const GumbelRun g = mosaic_gumbel(ms, 1010, workers);
  const TypicalCellSample s = sample_typical_delaunay(ms, 100000, SeedSpec{1010, 1u << 20}, {false, false, workers});
  const CalibratedThreshold emp = calibrate_v_t(ms, s);
  const CalibratedThreshold ex = calibrate_v_t_exact(ms);
  const bool agree = std::abs(emp.v_t - ex.v_t) <= 2.0 * emp.se;
  return {g.tv <= 0.12 && g.ks <= 0.1 && agree,
          fmt("tv=%.4f (<=0.12) ks=%.4f (<=0.1) v_t exact=%.5f empirical=%.5f se=%.5f (within 2 SE) mean count=%.3f",
              g.tv, g.ks, ex.v_t, emp.v_t, emp.se, g.mean_count)};
}

Outcome stabilization()
{
  const IntensitySpec unit = IntensitySpec::constant(1.0, 2);
  const Box box = Box::cube(2, 0, 30);
  std::size_t cell_ok = 0, cell_ok_r = 0, stop_ok = 0;
  for (std::uint64_t trial = 0; trial < 100; ++trial) {
    const PointConfiguration config = sample_poisson(unit, box, SeedSpec{1011, trial});
    Rng pick = SeedSpec{1011, trial}.engine(7);
    const Point target{10 + 10 * uniform01(pick), 10 + 10 * uniform01(pick), 0};
    std::size_t x = 0;
    for (std::size_t i = 0; i < config.size(); ++i) {
      if (distance2(config[i], target) < distance2(config[x], target)) {
        x = i;
      }
    }
    const Point nucleus = config[x];
    const double R = stabilization_radius_voronoi(config, x);
    const ConvexCell cell = voronoi_cell(config, x);
    const PointConfiguration fresh = sample_poisson(unit, box, SeedSpec{2011, trial});
    for (double keep : {2.0 * R, R}) {
      std::vector<Point> inside{nucleus};
      for (std::size_t i = 0; i < config.size(); ++i) {
        if (i != x && distance(config[i], nucleus) <= keep) {
          inside.push_back(config[i]);
        }
      }
      std::vector<Point> pts = inside;
      for (const Point &p : fresh.points()) {
        if (distance(p, nucleus) > keep) {
          pts.push_back(p);
        }
      }
      const ConvexCell again = voronoi_cell(PointConfiguration(2, pts, box), 0);
      const bool same = again.vertices().size() == cell.vertices().size() &&
                        std::equal(cell.vertices().begin(), cell.vertices().end(), again.vertices().begin());
      if (keep == 2.0 * R) {
        cell_ok += same ? 1 : 0;
        stop_ok += stabilization_radius_voronoi(PointConfiguration(2, inside, box), 0) == R ? 1 : 0;
      }
      else {
        cell_ok_r += same ? 1 : 0;
      }
    }
  }

  KnnSpec ks;
  ks.k = 1;
  ks.s = 1e4;
  const Box cube = Box::cube(2, 0, 1);
  std::size_t knn_ok = 0;
  for (std::uint64_t trial = 0; trial < 100; ++trial) {
    const PointConfiguration config = sample_poisson(ks.intensity(), cube, SeedSpec{1111, trial});
    Rng pick = SeedSpec{1111, trial}.engine(7);
    const std::size_t i = static_cast<std::size_t>(uniform01(pick) * static_cast<double>(config.size()));
    const Point x = config[i];
    const double r = radius_r_s(ks, x);
    const double T = config.kth_neighbor_distance(i, ks.k + 1);
    const bool retained = config.count_in_ball(x, r, i, ks.k + 1) <= static_cast<std::size_t>(ks.k);
    const double R = std::max(r, T);
    std::vector<Point> pts{x};
    for (std::size_t j = 0; j < config.size(); ++j) {
      if (j != i && distance(config[j], x) <= R) {
        pts.push_back(config[j]);
      }
    }
    const PointConfiguration fresh = sample_poisson(ks.intensity(), cube, SeedSpec{2111, trial});
    for (const Point &p : fresh.points()) {
      if (distance(p, x) > R) {
        pts.push_back(p);
      }
    }
    const PointConfiguration again(2, pts, cube);
    const bool same = again.kth_neighbor_distance(0, ks.k + 1) == T &&
                      (again.count_in_ball(x, r, 0, ks.k + 1) <= static_cast<std::size_t>(ks.k)) == retained;
    knn_ok += same ? 1 : 0;
  }
  return {cell_ok == 100 && stop_ok == 100 && knn_ok == 100,
          fmt("voronoi outside B(x,2R): %zu/100, stopping set: %zu/100, outside B(x,R): %zu/100; knn: %zu/100", cell_ok,
              stop_ok, cell_ok_r, knn_ok)};
}

Outcome bound_term_trend(unsigned workers)
{
  MosaicSpec ms;
  ms.functional = SizeKind::centered_inradius;
  const std::size_t reps = 400;
  std::vector<BoundTermEstimates> est;
  std::string detail;
  for (double t : {100.0, 400.0, 1600.0}) {
    ms.t = t;
    est.push_back(estimate_bound_terms(ms, calibrate_v_t_exact(ms), reps, SeedSpec{1012, static_cast<std::uint64_t>(t)},
                                       workers));
    const auto &e = est.back();
    detail += fmt("t=%.0f stab=%.4f+-%.4f pair=%.3f+-%.3f c2=%.3f+-%.3f; ", t, e.stab_tail, e.stab_tail_se,
                  e.pair_close_mass, e.pair_close_mass_se, e.c2_like, e.c2_like_se);
  }
  bool ok = true;
  auto check = [&](double a, double sa, double b, double sb) { ok = ok && b <= a + 2.0 * std::hypot(sa, sb); };
  for (std::size_t i = 0; i + 1 < est.size(); ++i) {
    const auto &a = est[i];
    const auto &b = est[i + 1];
    check(a.stab_tail, a.stab_tail_se, b.stab_tail, b.stab_tail_se);
    check(a.pair_close_mass, a.pair_close_mass_se, b.pair_close_mass, b.pair_close_mass_se);
    check(a.c2_like, a.c2_like_se, b.c2_like, b.c2_like_se);
  }
  return {ok, detail + "(nonincreasing within 2 SE)"};
}

Outcome lemma_overlap()
{
  const OverlapReport rep = check_overlap_bound_delaunay(100000, SeedSpec{1013, 0});
  return {rep.checked == 100000 && rep.violations == 0,
          fmt("checked=%zu violations=%zu max ratio=%.4f eps=%.4f per l=%zu/%zu/%zu", rep.checked, rep.violations,
              rep.max_ratio, rep.epsilon, rep.per_ell[0], rep.per_ell[1], rep.per_ell[2])};
}

Outcome run_one(int id, unsigned workers)
{
  switch (id) {
    case 1:
      return knn_poisson_limit(workers);
    case 2:
      return intensity_identity();
    case 3:
      return lemma_xa();
    case 4:
      return mecke_identity();
    case 5:
      return blaschke_petkantschin();
    case 6:
      return delaunay_constants(workers);
    case 7:
      return rathie_law(workers);
    case 8:
      return voronoi_void_law(workers);
    case 9:
      return voronoi_gumbel(workers);
    case 10:
      return delaunay_gumbel(workers);
    case 11:
      return stabilization();
    case 12:
      return bound_term_trend(workers);
    case 13:
      return lemma_overlap();
    default:
      throw DomainError("no acceptance criterion " + std::to_string(id));
  }
}

}  // namespace

std::string acceptance_name(int id)
{
  if (id < 1 || id > kAcceptanceCriteria) {
    throw DomainError("no acceptance criterion " + std::to_string(id));
  }
  return kNames[id - 1];
}

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions &options,
                                            const std::function<void(const CriterionResult &)> &on_result)
{
  std::vector<int> ids = options.only;
  if (ids.empty()) {
    for (int i = 1; i <= kAcceptanceCriteria; ++i) {
      ids.push_back(i);
    }
  }
  std::vector<CriterionResult> results;
  for (int id : ids) {
    CriterionResult r;
    r.id = id;
    r.name = acceptance_name(id);
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const Outcome o = run_one(id, options.workers);
      r.pass = o.pass;
      r.detail = o.detail;
    }
    catch (const std::exception &e) {
      r.pass = false;
      r.detail = std::string("error: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const double budget = kBudget[static_cast<std::size_t>(id - 1)];
    if (budget > 0 && r.seconds > budget) {
      r.pass = false;
      r.detail += fmt(" [over budget: %.1f s > %.0f s]", r.seconds, budget);
    }
    if (on_result) {
      on_result(r);
    }
    results.push_back(std::move(r));
  }
  return results;
}

std::string format_criterion(const CriterionResult &r)
{
  return fmt("%s %2d %-22s %8.2fs  ", r.pass ? "PASS" : "FAIL", r.id, r.name.c_str(), r.seconds) + r.detail;
}

}  // namespace geoextremes

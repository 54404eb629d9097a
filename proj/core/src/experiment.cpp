#include "geoextremes/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "geoextremes/diagnostics.hpp"
#include "geoextremes/error.hpp"
#include "geoextremes/integral.hpp"
#include "geoextremes/knn.hpp"
#include "geoextremes/mosaic.hpp"
#include "geoextremes/numerics.hpp"
#include "geoextremes/parallel.hpp"

namespace geoextremes {

namespace {

using Json = nlohmann::ordered_json;

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class ParamType { real, integer, choice };

struct ParamDef {
  const char *key;
  const char *fallback;
  ParamType type;
  double lo = -kInf;
  double hi = kInf;
  bool lo_open = false;
  std::vector<std::string> choices = {};
  /// Workload size, rescaled by apply_scale.
  bool work = false;
};

const std::vector<ParamDef> &param_table(ExperimentKind kind)
{
  static const std::vector<ParamDef> knn{
      {"d", "2", ParamType::integer, 2, 3},
      {"k", "0", ParamType::integer, 0, 50},
      {"c", "1", ParamType::real, 0, kInf, true},
      {"s", "10000", ParamType::real, 3, 1e8},
      {"density", "uniform", ParamType::choice, 0, 0, false, {"uniform", "ramp"}},
      {"slope", "0.5", ParamType::real, -1.999, 1.999},
  };
  static const std::vector<ParamDef> voronoi{
      {"gamma", "1", ParamType::real, 0, kInf, true},
      {"t", "400", ParamType::real, 3, 1e7},
      {"c", "1", ParamType::real, 0, kInf, true},
      {"functional", "centered_inradius", ParamType::choice, 0, 0, false,
       {"centered_inradius", "volume", "intrinsic_v1"}},
      {"buffer_factor", "3", ParamType::real, 1, 10},
      {"calibration", "exact", ParamType::choice, 0, 0, false, {"exact", "empirical"}},
      {"typical_n", "0", ParamType::integer, 0, 1e8, false, {}, true},
      {"bound_terms", "0", ParamType::integer, 0, 1},
  };
  static const std::vector<ParamDef> delaunay{
      {"gamma", "1", ParamType::real, 0, kInf, true},
      {"t", "400", ParamType::real, 3, 1e7},
      {"c", "1", ParamType::real, 0, kInf, true},
      {"functional", "volume", ParamType::choice, 0, 0, false, {"volume", "inradius", "circumradius"}},
      {"buffer_factor", "3", ParamType::real, 1, 10},
      {"calibration", "exact", ParamType::choice, 0, 0, false, {"exact", "empirical"}},
      {"typical_n", "0", ParamType::integer, 0, 1e8, false, {}, true},
      {"bound_terms", "0", ParamType::integer, 0, 1},
  };
  static const std::vector<ParamDef> bp{
      {"d", "2", ParamType::integer, 2, 3},
      {"formula", "spherical", ParamType::choice, 0, 0, false, {"spherical", "linear", "subsphere"}},
      {"k", "1", ParamType::integer, 1, 3},
      {"m", "1", ParamType::integer, 1, 3},
      {"r0", "0", ParamType::real, 0, kInf},
      {"test_function", "all", ParamType::choice, 0, 0, false, {"gaussian", "cube", "all"}},
      {"n_mc", "1000000", ParamType::integer, 2, 1e9, false, {}, true},
  };
  static const std::vector<ParamDef> mecke{
      {"d", "2", ParamType::integer, 2, 3},
      {"gamma", "5", ParamType::real, 0, 1e6, true},
      {"function", "all", ParamType::choice, 0, 0, false, {"indicator", "isolated", "close_pair", "all"}},
      {"r", "0.2", ParamType::real, 0, 1},
      {"n_mc", "100000", ParamType::integer, 2, 1e9, false, {}, true},
  };
  static const std::vector<ParamDef> lemma{
      {"lemma", "xA", ParamType::choice, 0, 0, false, {"xA", "overlap"}},
      {"d", "2", ParamType::integer, 2, 3},
      {"samples", "10000", ParamType::integer, 1, 1e9, false, {}, true},
  };
  switch (kind) {
    case ExperimentKind::knn:
      return knn;
    case ExperimentKind::voronoi:
      return voronoi;
    case ExperimentKind::delaunay:
      return delaunay;
    case ExperimentKind::bp_check:
      return bp;
    case ExperimentKind::mecke_check:
      return mecke;
    case ExperimentKind::lemma_check:
      return lemma;
  }
  throw ConfigError("unknown experiment kind");
}

const ParamDef *find_param(ExperimentKind kind, const std::string &key)
{
  for (const auto &p : param_table(kind)) {
    if (key == p.key) {
      return &p;
    }
  }
  return nullptr;
}

std::string trim(const std::string &s)
{
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) {
    return {};
  }
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::optional<double> parse_double(const std::string &s)
{
  double v = 0.0;
  const char *first = s.data();
  const char *last = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last || s.empty()) {
    return std::nullopt;
  }
  return v;
}

/// Integer in [lo, hi]; accepts forms like 1e5.
std::uint64_t parse_count(const std::string &key, const std::string &value, double lo, double hi)
{
  const auto v = parse_double(value);
  if (!v || *v != std::floor(*v) || *v < lo || *v > hi) {
    throw ConfigError("'" + key + "' must be an integer in [" + std::to_string(static_cast<long long>(lo)) + ", " +
                      (std::isinf(hi) ? std::string("inf") : std::to_string(static_cast<long long>(hi))) +
                      "], got '" + value + "'");
  }
  return static_cast<std::uint64_t>(*v);
}

void check_param(const ParamDef &p, const std::string &value)
{
  const std::string key = p.key;
  switch (p.type) {
    case ParamType::choice:
      if (std::find(p.choices.begin(), p.choices.end(), value) == p.choices.end()) {
        std::string all;
        for (const auto &c : p.choices) {
          all += (all.empty() ? "" : ", ") + c;
        }
        throw ConfigError("'" + key + "' must be one of " + all + ", got '" + value + "'");
      }
      return;
    case ParamType::integer:
      parse_count(key, value, p.lo, p.hi);
      return;
    case ParamType::real: {
      const auto v = parse_double(value);
      if (!v || !std::isfinite(*v) || *v < p.lo || *v > p.hi || (p.lo_open && *v == p.lo)) {
        throw ConfigError("'" + key + "' out of range or not a number: '" + value + "'");
      }
      return;
    }
  }
}

std::string format_double(double v)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Short decimal form for spec files; exact round trip.
std::string format_param(double v)
{
  char buf[64];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) {
      break;
    }
  }
  return buf;
}

Json number_or_null(double v)
{
  return std::isfinite(v) ? Json(v) : Json(nullptr);
}

SizeKind size_kind_from_string(const std::string &name)
{
  if (name == "volume") {
    return SizeKind::volume;
  }
  if (name == "centered_inradius") {
    return SizeKind::centered_inradius;
  }
  if (name == "inradius") {
    return SizeKind::inradius;
  }
  if (name == "circumradius") {
    return SizeKind::circumradius;
  }
  if (name == "intrinsic_v1") {
    return SizeKind::intrinsic_v1;
  }
  throw ConfigError("unknown functional '" + name + "'");
}

KnnSpec knn_spec(const ExperimentSpec &spec)
{
  KnnSpec ks;
  ks.d = static_cast<int>(spec.count("d"));
  ks.k = static_cast<int>(spec.count("k"));
  ks.c = spec.number("c");
  ks.s = spec.number("s");
  ks.f = spec.text("density") == "ramp" ? Density::linear_ramp(ks.d, spec.number("slope")) : Density::uniform(ks.d);
  return ks;
}

MosaicSpec mosaic_spec(const ExperimentSpec &spec)
{
  MosaicSpec ms;
  ms.kind = spec.kind == ExperimentKind::voronoi ? MosaicKind::voronoi : MosaicKind::delaunay;
  ms.gamma = spec.number("gamma");
  ms.t = spec.number("t");
  ms.c = spec.number("c");
  ms.functional = size_kind_from_string(spec.text("functional"));
  ms.buffer_factor = spec.number("buffer_factor");
  return ms;
}

struct CsvTable {
  std::string header;
  std::vector<std::string> rows;
};

void write_text(const std::filesystem::path &path, const std::string &text)
{
  std::ofstream os(path, std::ios::binary);
  os << text;
  os.flush();
  if (!os) {
    throw ResourceError("cannot write " + path.string());
  }
}

void write_csv(const std::filesystem::path &path, const CsvTable &table)
{
  std::string text = table.header + "\n";
  for (const auto &r : table.rows) {
    text += r;
    text += '\n';
  }
  write_text(path, text);
}

std::string join(std::initializer_list<std::string> fields)
{
  std::string out;
  for (const auto &f : fields) {
    if (!out.empty()) {
      out += ',';
    }
    out += f;
  }
  return out;
}

// Pieces shared by the point process kinds.

struct ReplicateRecord {
  long count = 0;
  double max_value = 0.0;
  double statistic = 0.0;
  std::size_t extra = 0;
  std::size_t candidates = 0;
  std::vector<Point> scaled_centers;
  std::vector<Point> centers;
  std::vector<double> stabilization;
};

void add_count_diagnostics(Json &diag, Json &refs, std::vector<std::string> &notes,
                           const std::vector<ReplicateRecord> &records, double target_mean, int d)
{
  std::vector<long> counts;
  std::vector<double> stats;
  std::vector<Point> centers;
  for (const auto &r : records) {
    counts.push_back(r.count);
    stats.push_back(r.statistic);
    centers.insert(centers.end(), r.scaled_centers.begin(), r.scaled_centers.end());
  }
  const double n = static_cast<double>(counts.size());
  double mean = 0.0, m2 = 0.0, zeros = 0.0;
  for (long c : counts) {
    mean += static_cast<double>(c);
    m2 += static_cast<double>(c) * static_cast<double>(c);
    zeros += c == 0 ? 1.0 : 0.0;
  }
  mean /= n;
  diag["count_mean"] = mean;
  diag["count_variance"] = n > 1 ? (m2 - n * mean * mean) / (n - 1) : 0.0;
  diag["p_zero"] = zeros / n;
  diag["poisson_p_zero"] = std::exp(-target_mean);
  diag["target_mean"] = target_mean;
  try {
    diag["tv_counts"] = tv_counts_vs_poisson(CountSample{counts, target_mean});
  }
  catch (const InsufficientSample &e) {
    diag["tv_counts"] = nullptr;
    notes.emplace_back(e.what());
  }
  try {
    const double ks = gumbel_ks(stats);
    diag["ks_gumbel"] = ks;
    diag["ks_pvalue"] = kolmogorov_pvalue(ks, stats.size());
  }
  catch (const InsufficientSample &e) {
    diag["ks_gumbel"] = nullptr;
    diag["ks_pvalue"] = nullptr;
    notes.emplace_back(e.what());
  }
  diag["gumbel_neg_inf"] = std::count_if(stats.begin(), stats.end(), [](double v) { return v == -kInf; });
  try {
    const ChiSquareReport chi = spatial_uniformity(centers, d);
    diag["spatial"] = Json{{"statistic", chi.statistic}, {"dof", chi.dof},         {"p_value", chi.p_value},
                           {"bins_per_axis", chi.bins_per_axis}, {"n", chi.n}};
  }
  catch (const InsufficientSample &e) {
    diag["spatial"] = nullptr;
    notes.emplace_back(e.what());
  }

  const auto pmf = empirical_pmf(counts);
  const std::size_t top = std::max<std::size_t>(pmf.size(), static_cast<std::size_t>(target_mean + 6 * std::sqrt(target_mean) + 4));
  Json ks = Json::array(), pe = Json::array(), pp = Json::array();
  for (std::size_t k = 0; k < top; ++k) {
    ks.push_back(k);
    pe.push_back(k < pmf.size() ? pmf[k] : 0.0);
    pp.push_back(poisson_pmf(static_cast<int>(k), target_mean));
  }
  refs["pmf"] = Json{{"k", ks}, {"empirical", pe}, {"poisson", pp}};
  Json gx = Json::array(), gf = Json::array();
  for (int i = 0; i <= 120; ++i) {
    const double x = -4.0 + 0.1 * i;
    gx.push_back(x);
    gf.push_back(gumbel_cdf(x));
  }
  refs["gumbel_cdf"] = Json{{"x", gx}, {"F", gf}};
}

void write_centers(const std::filesystem::path &path, const std::vector<ReplicateRecord> &records)
{
  CsvTable t{"replicate_id,x,y,z", {}};
  for (std::size_t r = 0; r < records.size(); ++r) {
    for (const Point &p : records[r].scaled_centers) {
      t.rows.push_back(join({std::to_string(r), format_double(p.x), format_double(p.y), format_double(p.z)}));
    }
  }
  write_csv(path, t);
}

void run_knn(const ExperimentSpec &spec, CsvTable &csv, Json &summary, std::vector<std::string> &notes,
             std::vector<ReplicateRecord> &records)
{
  const KnnSpec ks = knn_spec(spec);
  csv.header = "replicate_id,seed,count,max_content,gumbel_statistic,points";
  records.resize(spec.replicates);
  parallel_for(spec.replicates, spec.workers, [&](std::size_t r) {
    const ExceedanceOutput out = build_knn_exceedance(ks, SeedSpec{spec.master_seed, r});
    ReplicateRecord &rec = records[r];
    rec.count = static_cast<long>(out.count);
    rec.max_value = out.max_content;
    rec.statistic = gumbel_statistic_knn(out, ks);
    rec.extra = out.points.size();
    rec.scaled_centers = out.centers;
  });
  for (std::size_t r = 0; r < records.size(); ++r) {
    const auto &rec = records[r];
    csv.rows.push_back(join({std::to_string(r), std::to_string(SeedSpec{spec.master_seed, r}.stream_seed()),
                             std::to_string(rec.count), format_double(rec.max_value), format_double(rec.statistic),
                             std::to_string(rec.extra)}));
  }
  summary["model"] = Json{{"threshold_a", threshold_a(ks)}, {"exact_mean_count", exact_mean_count(ks)}};
  if (!records.empty()) {
    Json diag, refs;
    add_count_diagnostics(diag, refs, notes, records, ks.c, ks.d);
    summary["diagnostics"] = diag;
    summary["references"] = refs;
  }
}

void run_mosaic(const ExperimentSpec &spec, CsvTable &csv, Json &summary, std::vector<std::string> &notes,
                std::vector<ReplicateRecord> &records)
{
  const MosaicSpec ms = mosaic_spec(spec);
  const bool empirical = spec.text("calibration") == "empirical";
  const SeedSpec typical_seed{spec.master_seed, std::numeric_limits<std::uint64_t>::max()};
  const double level = target_level(ms);

  std::size_t typical_n = spec.count("typical_n");
  if (empirical && typical_n == 0) {
    typical_n = static_cast<std::size_t>(std::ceil(100.0 / level));
  }
  std::unique_ptr<TypicalCellSample> typical;
  if (typical_n > 0) {
    const TypicalOptions opts{false, false, spec.workers};
    typical = std::make_unique<TypicalCellSample>(ms.kind == MosaicKind::voronoi
                                                      ? sample_typical_voronoi(ms, typical_n, typical_seed, opts)
                                                      : sample_typical_delaunay(ms, typical_n, typical_seed, opts));
  }
  const CalibratedThreshold threshold = empirical ? calibrate_v_t(ms, *typical) : calibrate_v_t_exact(ms);
  const auto survival = typical_survival(ms, typical.get());

  csv.header = "replicate_id,seed,count,candidates,max_sigma,gumbel_statistic,sampled_points";
  records.resize(spec.replicates);
  parallel_for(spec.replicates, spec.workers, [&](std::size_t r) {
    const CenterProcessOutput out = build_center_process(ms, threshold, SeedSpec{spec.master_seed, r});
    ReplicateRecord &rec = records[r];
    rec.count = static_cast<long>(out.count);
    rec.candidates = out.candidates;
    rec.max_value = out.max_sigma;
    rec.statistic = gumbel_statistic_mosaic(ms, out.max_sigma, survival);
    rec.extra = out.sampled_points;
    rec.scaled_centers = out.scaled_centers;
    rec.centers = out.centers;
    rec.stabilization = out.stabilization;
  });
  for (std::size_t r = 0; r < records.size(); ++r) {
    const auto &rec = records[r];
    csv.rows.push_back(join({std::to_string(r), std::to_string(SeedSpec{spec.master_seed, r}.stream_seed()),
                             std::to_string(rec.count), std::to_string(rec.candidates), format_double(rec.max_value),
                             format_double(rec.statistic), std::to_string(rec.extra)}));
  }

  Json model{{"mosaic", to_string(ms.kind)},
             {"functional", spec.text("functional")},
             {"cell_rate", cell_rate(ms)},
             {"b_t", b_t(ms)},
             {"tau", tau_constant(ms)},
             {"threshold_rate_limit", threshold_rate_limit(ms)}};
  model["threshold"] = Json{{"v_t", threshold.v_t},
                            {"mode", empirical ? "empirical" : "exact"},
                            {"target_level", threshold.target_level},
                            {"se", threshold.se},
                            {"n_typical", threshold.n_typical}};
  summary["model"] = model;

  Json refs, diag;
  if (typical) {
    Json t{{"n", typical->size()}};
    if (ms.kind == MosaicKind::delaunay) {
      t["beta_hat"] = typical->beta_hat;
      t["beta_se"] = typical->beta_se;
      t["beta_exact"] = beta_d(2, ms.gamma);
    }
    double m = 0.0, m2 = 0.0;
    for (double a : typical->area) {
      m += a;
      m2 += a * a;
    }
    const double n = static_cast<double>(typical->size());
    m /= n;
    t["mean_area"] = m;
    t["mean_area_se"] = std::sqrt(std::max(0.0, m2 / n - m * m) / n);
    t["mean_area_exact"] = 1.0 / cell_rate(ms);
    if (!empirical && has_exact_law(ms)) {
      try {
        const CalibratedThreshold emp = calibrate_v_t(ms, *typical);
        t["calibration_check"] = Json{{"v_exact", threshold.v_t},
                                      {"v_empirical", emp.v_t},
                                      {"se", emp.se},
                                      {"within_2se", std::abs(emp.v_t - threshold.v_t) <= 2.0 * emp.se}};
      }
      catch (const InsufficientSample &e) {
        notes.emplace_back(e.what());
      }
    }
    diag["typical"] = t;
  }
  if (has_exact_law(ms)) {
    const double top = -std::log(1e-4);
    // Grid up to the point where the exact survival drops below 1e-4.
    double vmax = 0.1;
    while (*typical_survival_exact(ms, vmax) > std::exp(-top) && vmax < 1e6) {
      vmax *= 1.25;
    }
    Json v = Json::array(), s = Json::array(), e = Json::array();
    std::vector<double> sorted;
    if (typical) {
      sorted = typical->sigma_values;
      std::sort(sorted.begin(), sorted.end());
    }
    for (int i = 0; i <= 80; ++i) {
      const double x = vmax * i / 80.0;
      v.push_back(x);
      s.push_back(*typical_survival_exact(ms, x));
      if (typical) {
        const auto above = sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), x);
        e.push_back(static_cast<double>(above) / static_cast<double>(sorted.size()));
      }
    }
    Json curve{{"v", v}, {"exact", s}};
    if (typical) {
      curve["empirical"] = e;
    }
    refs[ms.kind == MosaicKind::delaunay && ms.functional == SizeKind::volume ? "rathie_survival"
                                                                               : "typical_survival"] = curve;
  }
  if (!records.empty()) {
    add_count_diagnostics(diag, refs, notes, records, ms.c, 2);
    if (spec.count("bound_terms") == 1) {
      std::vector<CenterProcessOutput> outs(records.size());
      for (std::size_t r = 0; r < records.size(); ++r) {
        outs[r].centers = records[r].centers;
        outs[r].stabilization = records[r].stabilization;
        outs[r].count = records[r].centers.size();
      }
      const BoundTermEstimates b = estimate_bound_terms(ms, outs);
      diag["bound_terms"] = Json{{"stab_tail", b.stab_tail},
                                 {"stab_tail_se", b.stab_tail_se},
                                 {"pair_close_mass", b.pair_close_mass},
                                 {"pair_close_mass_se", b.pair_close_mass_se},
                                 {"c2_like", b.c2_like},
                                 {"c2_like_se", b.c2_like_se},
                                 {"b_t", b.b_t}};
    }
  }
  if (!diag.empty()) {
    summary["diagnostics"] = diag;
  }
  if (!refs.empty()) {
    summary["references"] = refs;
  }
}

struct CheckRow {
  std::string name;
  std::size_t samples = 0;
  double lhs = 0.0, lhs_se = 0.0, rhs = 0.0, rhs_se = 0.0;
  double exact = std::numeric_limits<double>::quiet_NaN();
  double z = std::numeric_limits<double>::quiet_NaN();
  std::size_t violations = 0;
};

CheckRow identity_row(std::string name, std::size_t n, const IdentityCheck &c)
{
  return {std::move(name), n, c.lhs, c.lhs_se, c.rhs, c.rhs_se, c.exact, c.z_score, std::abs(c.z_score) > 3 ? 1u : 0u};
}

std::vector<CheckRow> run_checks_once(const ExperimentSpec &spec, const SeedSpec &seed)
{
  std::vector<CheckRow> rows;
  const int d = static_cast<int>(spec.count("d"));
  switch (spec.kind) {
    case ExperimentKind::bp_check: {
      const std::string which = spec.text("test_function");
      const std::string formula = spec.text("formula");
      const std::size_t n = spec.count("n_mc");
      const int k = static_cast<int>(spec.count("k"));
      const int m = static_cast<int>(spec.count("m"));
      std::uint64_t j = 0;
      for (const char *name : {"gaussian", "cube"}) {
        if (which != "all" && which != name) {
          continue;
        }
        const TestFunction f = TestFunction::from_name(name);
        const SeedSpec s = seed.child(j++, 0);
        std::string label = formula + " d=" + std::to_string(d);
        IdentityCheck c;
        if (formula == "spherical") {
          c = verify_bp_spherical(d, f, n, s);
        }
        else if (formula == "linear") {
          label += " k=" + std::to_string(k);
          c = verify_bp_linear(d, k, f, n, s);
        }
        else {
          label += " k=" + std::to_string(k) + " m=" + std::to_string(m);
          c = verify_bp_subsphere(d, k, m, spec.number("r0"), f, n, s);
        }
        rows.push_back(identity_row(label + " " + name, n, c));
      }
      break;
    }
    case ExperimentKind::mecke_check: {
      const std::string which = spec.text("function");
      const std::size_t n = spec.count("n_mc");
      const IntensitySpec intensity = IntensitySpec::constant(spec.number("gamma"), d);
      std::uint64_t j = 0;
      for (auto [name, f] : {std::pair{"indicator", MeckeFunction::indicator_unit_cube},
                             std::pair{"isolated", MeckeFunction::isolated_in_unit_cube},
                             std::pair{"close_pair", MeckeFunction::close_pair}}) {
        const SeedSpec s = seed.child(j++, 0);
        if (which != "all" && which != name) {
          continue;
        }
        const MeckeReport rep = verify_mecke(intensity, f, spec.number("r"), n, s);
        CheckRow row{std::string("mecke ") + name, n, rep.lhs, rep.lhs_se, rep.rhs, rep.rhs_se, rep.rhs_exact};
        const double pooled = std::hypot(rep.lhs_se, rep.rhs_se);
        row.z = pooled > 0 ? (rep.lhs - rep.rhs) / pooled : 0.0;
        row.violations = std::abs(rep.lhs - rep.rhs) > 3 * pooled ? 1 : 0;
        rows.push_back(row);
      }
      break;
    }
    case ExperimentKind::lemma_check: {
      const std::size_t n = spec.count("samples");
      if (spec.text("lemma") == "xA") {
        const LemmaXAReport rep = verify_lemma_xA(d, n, seed.child(0, 0));
        CheckRow row{"lemma xA d=" + std::to_string(d), rep.samples, rep.min_ratio, 0.0, 1.0, 0.0};
        row.violations = rep.violations;
        rows.push_back(row);
      }
      else {
        const OverlapReport rep = check_overlap_bound_delaunay(n, seed.child(0, 0));
        CheckRow row{"lemma overlap", rep.checked, rep.max_ratio, 0.0, 1.0, 0.0, rep.epsilon};
        row.violations = rep.violations;
        rows.push_back(row);
      }
      break;
    }
    default:
      break;
  }
  return rows;
}

void run_checks(const ExperimentSpec &spec, CsvTable &csv, Json &summary)
{
  csv.header = "replicate_id,check,samples,lhs,lhs_se,rhs,rhs_se,exact,z_score,violations";
  std::vector<std::vector<CheckRow>> all(spec.replicates);
  parallel_for(spec.replicates, spec.workers,
               [&](std::size_t r) { all[r] = run_checks_once(spec, SeedSpec{spec.master_seed, r}); });
  Json checks = Json::array();
  std::size_t violations = 0;
  for (std::size_t r = 0; r < all.size(); ++r) {
    for (const auto &row : all[r]) {
      csv.rows.push_back(join({std::to_string(r), row.name, std::to_string(row.samples), format_double(row.lhs),
                               format_double(row.lhs_se), format_double(row.rhs), format_double(row.rhs_se),
                               format_double(row.exact), format_double(row.z), std::to_string(row.violations)}));
      checks.push_back(Json{{"replicate_id", r},
                            {"check", row.name},
                            {"samples", row.samples},
                            {"lhs", number_or_null(row.lhs)},
                            {"lhs_se", number_or_null(row.lhs_se)},
                            {"rhs", number_or_null(row.rhs)},
                            {"rhs_se", number_or_null(row.rhs_se)},
                            {"exact", number_or_null(row.exact)},
                            {"z_score", number_or_null(row.z)},
                            {"violations", row.violations}});
      violations += row.violations;
    }
  }
  if (!checks.empty()) {
    summary["diagnostics"] = Json{{"checks", checks}, {"violations", violations}};
  }
}

}  // namespace

const char *to_string(ExperimentKind kind)
{
  switch (kind) {
    case ExperimentKind::knn:
      return "knn";
    case ExperimentKind::voronoi:
      return "voronoi";
    case ExperimentKind::delaunay:
      return "delaunay";
    case ExperimentKind::bp_check:
      return "bp-check";
    case ExperimentKind::mecke_check:
      return "mecke-check";
    case ExperimentKind::lemma_check:
      return "lemma-check";
  }
  return "?";
}

ExperimentKind experiment_kind_from_string(const std::string &name)
{
  for (auto k : {ExperimentKind::knn, ExperimentKind::voronoi, ExperimentKind::delaunay, ExperimentKind::bp_check,
                 ExperimentKind::mecke_check, ExperimentKind::lemma_check}) {
    if (name == to_string(k)) {
      return k;
    }
  }
  throw ConfigError("unknown experiment kind '" + name + "'");
}

const char *to_string(Scale scale)
{
  switch (scale) {
    case Scale::smoke:
      return "smoke";
    case Scale::desk:
      return "desk";
    case Scale::full:
      return "full";
  }
  return "?";
}

Scale scale_from_string(const std::string &name)
{
  for (auto s : {Scale::smoke, Scale::desk, Scale::full}) {
    if (name == to_string(s)) {
      return s;
    }
  }
  throw ConfigError("unknown scale '" + name + "' (smoke, desk or full)");
}

double ExperimentSpec::number(const std::string &key) const
{
  const auto it = params.find(key);
  if (it == params.end()) {
    throw ConfigError("missing parameter '" + key + "'");
  }
  const auto v = parse_double(it->second);
  if (!v) {
    throw ConfigError("parameter '" + key + "' is not a number: '" + it->second + "'");
  }
  return *v;
}

std::size_t ExperimentSpec::count(const std::string &key) const
{
  const double v = number(key);
  if (v < 0 || v != std::floor(v)) {
    throw ConfigError("parameter '" + key + "' is not a nonnegative integer");
  }
  return static_cast<std::size_t>(v);
}

std::string ExperimentSpec::text(const std::string &key) const
{
  const auto it = params.find(key);
  if (it == params.end()) {
    throw ConfigError("missing parameter '" + key + "'");
  }
  return it->second;
}

void ExperimentSpec::validate() const
{
  for (const auto &[key, value] : params) {
    const ParamDef *p = find_param(kind, key);
    if (!p) {
      throw ConfigError("unknown key '" + key + "' for kind " + to_string(kind));
    }
    check_param(*p, value);
  }
  for (const auto &p : param_table(kind)) {
    if (!params.count(p.key)) {
      throw ConfigError(std::string("missing parameter '") + p.key + "'");
    }
  }
  if (kind == ExperimentKind::knn) {
    const KnnSpec ks = knn_spec(*this);
    if (ks.c * ks.s * ks.f.integral > 1e8) {
      throw ResourceError("knn: more than 1e8 expected points per replicate");
    }
  }
  if (kind == ExperimentKind::voronoi || kind == ExperimentKind::delaunay) {
    const MosaicSpec ms = mosaic_spec(*this);
    try {
      ms.validate();
    }
    catch (const DomainError &e) {
      throw ConfigError(e.what());
    }
    if (text("calibration") == "exact" && !has_exact_law(ms)) {
      throw ConfigError("calibration = exact needs a closed-form typical law; use calibration = empirical");
    }
    const double side = std::sqrt(ms.t) + 2.0 * ms.buffer_factor * b_t(ms);
    if (ms.gamma * side * side > 5e7) {
      throw ResourceError("mosaic: more than 5e7 expected points per replicate");
    }
  }
  if (kind == ExperimentKind::bp_check) {
    const int d = static_cast<int>(count("d"));
    const int k = static_cast<int>(count("k"));
    const int m = static_cast<int>(count("m"));
    const std::string formula = text("formula");
    if (formula != "spherical" && k > d) {
      throw ConfigError("bp-check: need k <= d");
    }
    if (formula == "subsphere" && m > k) {
      throw ConfigError("bp-check: need m <= k");
    }
    if (formula == "subsphere" && k == d && number("r0") != 0.0) {
      throw ConfigError("bp-check: r0 must be 0 when k = d");
    }
  }
  if (kind == ExperimentKind::lemma_check && text("lemma") == "overlap" && count("d") != 2) {
    throw ConfigError("lemma overlap is planar: d must be 2");
  }
}

ExperimentSpec parse_experiment(std::istream &is)
{
  std::map<std::string, std::pair<std::string, int>> raw;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) {
      line.erase(hash);
    }
    line = trim(line);
    if (line.empty()) {
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw ConfigError("line " + std::to_string(lineno) + ": empty key or value");
    }
    if (!raw.emplace(key, std::pair{value, lineno}).second) {
      throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    }
  }
  auto take = [&](const std::string &key) -> std::optional<std::string> {
    const auto it = raw.find(key);
    if (it == raw.end()) {
      return std::nullopt;
    }
    std::string v = it->second.first;
    raw.erase(it);
    return v;
  };

  ExperimentSpec spec;
  const auto kind = take("kind");
  if (!kind) {
    throw ConfigError("missing 'kind'");
  }
  spec.kind = experiment_kind_from_string(*kind);
  spec.id = take("id").value_or(to_string(spec.kind));
  if (const auto v = take("replicates")) {
    spec.replicates = parse_count("replicates", *v, 0, 1e9);
  }
  if (const auto v = take("seed")) {
    spec.master_seed = parse_count("seed", *v, 0, 9.007199254740992e15);
  }
  if (const auto v = take("workers")) {
    spec.workers = static_cast<unsigned>(parse_count("workers", *v, 0, 1024));
  }
  if (const auto v = take("scale")) {
    spec.scale = scale_from_string(*v);
  }
  for (const auto &[key, entry] : raw) {
    if (!find_param(spec.kind, key)) {
      throw ConfigError("line " + std::to_string(entry.second) + ": unknown key '" + key + "' for kind " +
                        to_string(spec.kind));
    }
    spec.params[key] = entry.first;
  }
  for (const auto &p : param_table(spec.kind)) {
    spec.params.emplace(p.key, p.fallback);
  }
  spec.validate();
  return spec;
}

ExperimentSpec parse_experiment(const std::string &text)
{
  std::istringstream is(text);
  return parse_experiment(is);
}

ExperimentSpec load_experiment(const std::filesystem::path &path)
{
  std::ifstream is(path);
  if (!is) {
    throw ConfigError("cannot open config file " + path.string());
  }
  return parse_experiment(is);
}

std::string serialize_experiment(const ExperimentSpec &spec)
{
  std::ostringstream os;
  os << "id = " << spec.id << "\n";
  os << "kind = " << to_string(spec.kind) << "\n";
  os << "replicates = " << spec.replicates << "\n";
  os << "seed = " << spec.master_seed << "\n";
  os << "workers = " << spec.workers << "\n";
  os << "scale = " << to_string(spec.scale) << "\n";
  for (const auto &p : param_table(spec.kind)) {
    os << p.key << " = " << spec.params.at(p.key) << "\n";
  }
  return os.str();
}

bool operator==(const ExperimentSpec &a, const ExperimentSpec &b)
{
  return a.id == b.id && a.kind == b.kind && a.replicates == b.replicates && a.master_seed == b.master_seed &&
         a.workers == b.workers && a.scale == b.scale && a.params == b.params;
}

ExperimentSpec apply_scale(const ExperimentSpec &spec, Scale scale)
{
  ExperimentSpec out = spec;
  out.scale = scale;
  if (scale == Scale::desk) {
    return out;
  }
  auto resize = [scale](double v, double smoke_cap) {
    return scale == Scale::smoke ? std::min(v, smoke_cap) : 5.0 * v;
  };
  const bool sampling = spec.kind == ExperimentKind::knn || spec.kind == ExperimentKind::voronoi ||
                        spec.kind == ExperimentKind::delaunay;
  out.replicates = static_cast<std::size_t>(resize(static_cast<double>(spec.replicates), sampling ? 200.0 : 1.0));
  for (const auto &p : param_table(spec.kind)) {
    if (!p.work) {
      continue;
    }
    const double cap = std::string(p.key) == "typical_n" ? 2000.0 : 10000.0;
    const double v = std::min(resize(spec.number(p.key), cap), p.hi);
    out.params[p.key] = format_param(v);
  }
  return out;
}

const std::vector<CatalogEntry> &experiment_catalog()
{
  static const std::vector<CatalogEntry> catalog{
      {"knn-gumbel-2d", "k-NN exceedances in [0,1]^2 with k = 0, c = 1, s = 10^4: counts vs Poisson(1), Gumbel maxima",
       "id = knn-gumbel-2d\nkind = knn\nreplicates = 2000\nseed = 1\nd = 2\nk = 0\nc = 1\ns = 10000\n"
       "density = uniform\n"},
      {"voronoi-inradius-gumbel",
       "Poisson-Voronoi centered inradius at t = 400: exceedance counts, scaled centers, Gumbel maxima",
       "id = voronoi-inradius-gumbel\nkind = voronoi\nreplicates = 1000\nseed = 2\ngamma = 1\nt = 400\nc = 1\n"
       "functional = centered_inradius\ncalibration = exact\n"},
      {"delaunay-rathie",
       "Poisson-Delaunay triangle area at t = 400: exceedances, Gumbel maxima, typical cells against the Rathie law",
       "id = delaunay-rathie\nkind = delaunay\nreplicates = 1000\nseed = 3\ngamma = 1\nt = 400\nc = 1\n"
       "functional = volume\ncalibration = exact\ntypical_n = 100000\n"},
      {"bp-spherical", "Spherical Blaschke-Petkantschin formula in the plane, Gaussian and unit cube integrands",
       "id = bp-spherical\nkind = bp-check\nreplicates = 1\nseed = 4\nd = 2\nformula = spherical\n"
       "test_function = all\nn_mc = 1000000\n"},
      {"mecke", "Mecke equation for three functionals of a planar Poisson process",
       "id = mecke\nkind = mecke-check\nreplicates = 1\nseed = 5\nd = 2\ngamma = 5\nfunction = all\nr = 0.2\n"
       "n_mc = 100000\n"},
      {"lemma-xA", "Lower bound on the area of B(o,1) minus B(x,1) for random x in the unit disk",
       "id = lemma-xA\nkind = lemma-check\nreplicates = 1\nseed = 6\nlemma = xA\nd = 2\nsamples = 10000\n"},
      {"lemma-overlap", "Lens area bound for circumdisks of near-regular Delaunay triangles",
       "id = lemma-overlap\nkind = lemma-check\nreplicates = 1\nseed = 7\nlemma = overlap\nd = 2\n"
       "samples = 100000\n"},
  };
  return catalog;
}

ExperimentSpec catalog_experiment(const std::string &id)
{
  for (const auto &e : experiment_catalog()) {
    if (e.id == id) {
      return parse_experiment(e.config);
    }
  }
  throw ConfigError("no catalog experiment '" + id + "'");
}

RunResult run_experiment(const ExperimentSpec &spec, const std::filesystem::path &output_dir)
{
  spec.validate();
  const auto start = std::chrono::steady_clock::now();
  std::error_code ec;
  std::filesystem::create_directories(output_dir, ec);
  if (ec || !std::filesystem::is_directory(output_dir)) {
    throw ResourceError("cannot create output directory " + output_dir.string());
  }
  write_text(output_dir / "spec.echo", serialize_experiment(spec));

  Json summary;
  summary["schema"] = 1;
  summary["id"] = spec.id;
  summary["kind"] = to_string(spec.kind);
  summary["scale"] = to_string(spec.scale);
  summary["master_seed"] = spec.master_seed;
  summary["replicates"] = spec.replicates;
  summary["workers"] = resolve_workers(spec.workers);
  summary["replicate_seed"] = "replicate r uses SeedSpec{master_seed, r}; the seed column is its stream seed";
  std::vector<std::string> notes;
  CsvTable csv;
  std::vector<ReplicateRecord> records;
  switch (spec.kind) {
    case ExperimentKind::knn:
      run_knn(spec, csv, summary, notes, records);
      break;
    case ExperimentKind::voronoi:
    case ExperimentKind::delaunay:
      run_mosaic(spec, csv, summary, notes, records);
      break;
    default:
      run_checks(spec, csv, summary);
      break;
  }
  write_csv(output_dir / "results.csv", csv);
  if (spec.kind == ExperimentKind::knn || spec.kind == ExperimentKind::voronoi ||
      spec.kind == ExperimentKind::delaunay) {
    write_centers(output_dir / "centers.csv", records);
  }
  if (csv.rows.empty()) {
    notes.insert(notes.begin(), "no data");
  }
  summary["status"] = csv.rows.empty() ? "no data" : "ok";
  summary["rows"] = csv.rows.size();
  summary["notes"] = notes;
  RunResult result;
  result.output_dir = output_dir;
  result.rows = csv.rows.size();
  result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  summary["wall_time_s"] = result.wall_seconds;
  result.summary = summary.dump(2) + "\n";
  write_text(output_dir / "summary.json", result.summary);
  return result;
}

}  // namespace geoextremes

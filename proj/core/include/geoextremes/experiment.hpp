#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace geoextremes {

enum class ExperimentKind { knn, voronoi, delaunay, bp_check, mecke_check, lemma_check };

const char *to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(const std::string &name);

/// Workload presets. desk runs the sizes used by the acceptance suite.
enum class Scale { smoke, desk, full };

const char *to_string(Scale scale);
Scale scale_from_string(const std::string &name);

/**
 * One experiment as a flat table of key = value pairs. Keys other than the
 * common ones (id, kind, replicates, seed, workers, scale) are pipeline
 * parameters; which ones are accepted depends on the kind.
 */
struct ExperimentSpec {
  std::string id;
  ExperimentKind kind = ExperimentKind::knn;
  std::size_t replicates = 1;
  std::uint64_t master_seed = 0;
  /// 0 means all hardware threads.
  unsigned workers = 0;
  Scale scale = Scale::desk;
  std::map<std::string, std::string> params;

  /// Checks every key and value against the kind; throws ConfigError.
  void validate() const;

  double number(const std::string &key) const;
  std::size_t count(const std::string &key) const;
  std::string text(const std::string &key) const;
};

/**
 * Parses the flat config format: one `key = value` per line, `#` starts a
 * comment, blank lines are ignored. Defaults of the kind are filled in for
 * missing parameters. Throws ConfigError with the line number on bad input.
 */
ExperimentSpec parse_experiment(std::istream &is);
ExperimentSpec parse_experiment(const std::string &text);
ExperimentSpec load_experiment(const std::filesystem::path &path);

/// Canonical text form; parse_experiment(serialize_experiment(s)) == s.
std::string serialize_experiment(const ExperimentSpec &spec);

bool operator==(const ExperimentSpec &a, const ExperimentSpec &b);

/// The workload sizes (replicates, n_mc, samples, typical_n) for a scale, relative to desk.
ExperimentSpec apply_scale(const ExperimentSpec &spec, Scale scale);

struct CatalogEntry {
  std::string id;
  std::string description;
  std::string config;
};

/// Built-in experiments of the acceptance suite, at desk scale.
const std::vector<CatalogEntry> &experiment_catalog();
/// Catalog entry parsed; ConfigError for an unknown id.
ExperimentSpec catalog_experiment(const std::string &id);

struct RunResult {
  std::filesystem::path output_dir;
  std::size_t rows = 0;
  double wall_seconds = 0.0;
  /// summary.json content.
  std::string summary;
};

/**
 * Runs the experiment and writes results.csv, summary.json, spec.echo and, for
 * the point-process kinds, centers.csv into `output_dir`. Rows are written in
 * replicate order and replicate r uses SeedSpec{master_seed, r}, so the CSV
 * files do not depend on the worker count.
 */
RunResult run_experiment(const ExperimentSpec &spec, const std::filesystem::path &output_dir);

}  // namespace geoextremes

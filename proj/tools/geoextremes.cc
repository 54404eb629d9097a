// geoextremes: run, list and check experiments.
//
// Exit codes: 0 success, 1 failed acceptance criteria, 2 config or usage error,
// 3 pipeline error, 4 insufficient resources.
#include <filesystem>
#include <iostream>
#include <new>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "geoextremes/acceptance.hpp"
#include "geoextremes/error.hpp"
#include "geoextremes/experiment.hpp"

namespace {

int report(const char *kind, const std::string &message, int code)
{
  std::cerr << nlohmann::json{{"error", kind}, {"message", message}, {"exit_code", code}}.dump() << std::endl;
  return code;
}

}  // namespace

int main(int argc, char **argv)
{
  using namespace geoextremes;
  CLI::App app{"Extremes of geometric point processes: experiments and acceptance checks"};
  app.require_subcommand(1);

  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> replicates;
  std::optional<unsigned> workers;
  std::optional<std::string> scale;
  std::string out;
  auto *run = app.add_subcommand("run", "Run an experiment from a config file or a catalog id");
  run->add_option("spec", config, "Config file (key = value lines) or catalog id")->required();
  run->add_option("--seed", seed, "Master seed");
  run->add_option("--replicates", replicates, "Number of replicates");
  run->add_option("--out", out, "Output directory (default: results/<id>)");
  run->add_option("--workers", workers, "Worker threads, 0 for all cores");
  run->add_option("--scale", scale, "Workload preset")->check(CLI::IsMember({"smoke", "desk", "full"}));

  app.add_subcommand("list", "List the built-in experiments");

  std::vector<int> only;
  unsigned check_workers = 0;
  auto *check = app.add_subcommand("check", "Run the acceptance suite and print a pass/fail table");
  check->add_option("--only", only, "Criterion ids to run")->check(CLI::Range(1, kAcceptanceCriteria));
  check->add_option("--workers", check_workers, "Worker threads, 0 for all cores");

  try {
    app.parse(argc, argv);
  }
  catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand("list")) {
      for (const auto &e : experiment_catalog()) {
        std::cout << e.id << "\t" << e.description << "\n";
      }
      return 0;
    }
    if (app.got_subcommand("check")) {
      AcceptanceOptions opts;
      opts.workers = check_workers;
      opts.only = only;
      const auto results =
          run_acceptance(opts, [](const CriterionResult &r) { std::cout << format_criterion(r) << std::endl; });
      std::size_t passed = 0;
      for (const auto &r : results) {
        passed += r.pass ? 1 : 0;
      }
      std::cout << passed << "/" << results.size() << " criteria passed" << std::endl;
      return passed == results.size() ? 0 : 1;
    }

    ExperimentSpec spec = std::filesystem::exists(config) ? load_experiment(config) : catalog_experiment(config);
    spec = apply_scale(spec, scale ? scale_from_string(*scale) : spec.scale);
    if (seed) {
      spec.master_seed = *seed;
    }
    if (replicates) {
      spec.replicates = *replicates;
    }
    if (workers) {
      spec.workers = *workers;
    }
    spec.validate();
    const std::filesystem::path dir = out.empty() ? std::filesystem::path("results") / spec.id : std::filesystem::path(out);
    const RunResult r = run_experiment(spec, dir);
    std::cout << spec.id << ": " << r.rows << " rows in " << r.wall_seconds << " s -> " << r.output_dir.string()
              << std::endl;
    return 0;
  }
  catch (const ConfigError &e) {
    return report("config", e.what(), 2);
  }
  catch (const ResourceError &e) {
    return report("resources", e.what(), 4);
  }
  catch (const std::bad_alloc &) {
    return report("resources", "out of memory", 4);
  }
  catch (const std::exception &e) {
    return report("pipeline", e.what(), 3);
  }
}

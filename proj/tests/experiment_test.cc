#include <gtest/gtest.h>

#include <chrono>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "geoextremes/error.hpp"
#include "geoextremes/experiment.hpp"

using namespace geoextremes;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path &p)
{
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

fs::path scratch(const std::string &name)
{
  const fs::path p = fs::temp_directory_path() / ("geoextremes_experiment_test_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST(ExperimentConfig, ParsesAndFillsDefaults)
{
  const ExperimentSpec s = parse_experiment("# comment\nkind = knn\n  s = 1e3   # inline\nreplicates=7\nseed = 9\n");
  EXPECT_EQ(s.kind, ExperimentKind::knn);
  EXPECT_EQ(s.id, "knn");
  EXPECT_EQ(s.replicates, 7u);
  EXPECT_EQ(s.master_seed, 9u);
  EXPECT_EQ(s.number("s"), 1000.0);
  EXPECT_EQ(s.count("k"), 0u);
  EXPECT_EQ(s.text("density"), "uniform");
}

TEST(ExperimentConfig, RejectsBadInput)
{
  EXPECT_THROW(parse_experiment("s = 3\n"), ConfigError);
  EXPECT_THROW(parse_experiment("kind = knn\njunk\n"), ConfigError);
  EXPECT_THROW(parse_experiment("kind = knn\nk = 1\nk = 2\n"), ConfigError);
  EXPECT_THROW(parse_experiment("kind = knn\ngamma = 1\n"), ConfigError);
  EXPECT_THROW(parse_experiment("kind = knn\nk = 0.5\n"), ConfigError);
  EXPECT_THROW(parse_experiment("kind = knn\nc = 0\n"), ConfigError);
  EXPECT_THROW(parse_experiment("kind = knn\nc = abc\n"), ConfigError);
  EXPECT_THROW(parse_experiment("kind = voronoi\nfunctional = inradius\n"), ConfigError);
  EXPECT_THROW(parse_experiment("kind = voronoi\nfunctional = volume\n"), ConfigError);
  EXPECT_NO_THROW(parse_experiment("kind = voronoi\nfunctional = volume\ncalibration = empirical\n"));
  EXPECT_THROW(parse_experiment("kind = delaunay\nfunctional = inradius\n"), ConfigError);
  EXPECT_THROW(parse_experiment("kind = bp-check\nformula = subsphere\nk = 1\nm = 2\n"), ConfigError);
  EXPECT_THROW(parse_experiment("kind = teleport\n"), ConfigError);
  EXPECT_THROW(parse_experiment("kind = knn\nscale = huge\n"), ConfigError);
  EXPECT_THROW(parse_experiment("kind = knn\nreplicates = -1\n"), ConfigError);
  EXPECT_THROW(parse_experiment("kind = voronoi\nt = 1e7\ngamma = 10\n"), ResourceError);
  EXPECT_THROW(load_experiment("/nonexistent/config.cfg"), ConfigError);
}

TEST(ExperimentCatalog, IdsAndRoundTrip)
{
  std::set<std::string> ids;
  for (const auto &e : experiment_catalog()) {
    ids.insert(e.id);
    const ExperimentSpec s = catalog_experiment(e.id);
    EXPECT_EQ(s.id, e.id);
    EXPECT_EQ(parse_experiment(serialize_experiment(s)), s) << e.id;
    const ExperimentSpec smoke = apply_scale(s, Scale::smoke);
    EXPECT_EQ(parse_experiment(serialize_experiment(smoke)), smoke) << e.id;
  }
  EXPECT_EQ(ids, (std::set<std::string>{"knn-gumbel-2d", "voronoi-inradius-gumbel", "delaunay-rathie", "bp-spherical",
                                        "mecke", "lemma-xA", "lemma-overlap"}));
  EXPECT_THROW(catalog_experiment("nope"), ConfigError);
}

TEST(ExperimentCatalog, ScaleRules)
{
  const ExperimentSpec s = catalog_experiment("delaunay-rathie");
  const ExperimentSpec smoke = apply_scale(s, Scale::smoke);
  EXPECT_EQ(smoke.replicates, 200u);
  EXPECT_EQ(smoke.count("typical_n"), 2000u);
  EXPECT_EQ(smoke.scale, Scale::smoke);
  const ExperimentSpec full = apply_scale(s, Scale::full);
  EXPECT_EQ(full.replicates, 5000u);
  EXPECT_EQ(full.count("typical_n"), 500000u);
  EXPECT_EQ(apply_scale(s, Scale::desk), s);
  EXPECT_EQ(apply_scale(catalog_experiment("bp-spherical"), Scale::smoke).count("n_mc"), 10000u);
}

TEST(RunExperiment, ZeroReplicatesGivesHeaderOnly)
{
  ExperimentSpec s = catalog_experiment("knn-gumbel-2d");
  s.replicates = 0;
  const fs::path out = scratch("zero");
  const RunResult r = run_experiment(s, out);
  EXPECT_EQ(r.rows, 0u);
  EXPECT_EQ(slurp(out / "results.csv"), "replicate_id,seed,count,max_content,gumbel_statistic,points\n");
  const auto j = nlohmann::json::parse(slurp(out / "summary.json"));
  EXPECT_EQ(j["schema"], 1);
  EXPECT_EQ(j["status"], "no data");
  EXPECT_EQ(j["notes"][0], "no data");
  EXPECT_EQ(parse_experiment(slurp(out / "spec.echo")), s);
  fs::remove_all(out);
}

TEST(RunExperiment, ByteIdenticalAcrossWorkerCounts)
{
  ExperimentSpec s = parse_experiment("kind = knn\ns = 2000\nreplicates = 120\nseed = 17\n");
  s.workers = 1;
  const fs::path a = scratch("a"), b = scratch("b");
  run_experiment(s, a);
  s.workers = 3;
  run_experiment(s, b);
  EXPECT_EQ(slurp(a / "results.csv"), slurp(b / "results.csv"));
  EXPECT_EQ(slurp(a / "centers.csv"), slurp(b / "centers.csv"));
  const auto j = nlohmann::json::parse(slurp(a / "summary.json"));
  EXPECT_EQ(j["schema"], 1);
  ASSERT_TRUE(j["diagnostics"].contains("tv_counts"));
  ASSERT_TRUE(j["diagnostics"].contains("ks_gumbel"));
  EXPECT_TRUE(j["diagnostics"]["tv_counts"].is_number());
  // 120 replicates are too few for the KS statistic.
  EXPECT_TRUE(j["diagnostics"]["ks_gumbel"].is_null());
  EXPECT_EQ(j["references"]["pmf"]["k"].size(), j["references"]["pmf"]["poisson"].size());
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(RunExperiment, UnwritableOutputIsResourceError)
{
  const fs::path blocker = scratch("blocker");
  std::ofstream(blocker) << "x";
  EXPECT_THROW(run_experiment(catalog_experiment("lemma-xA"), blocker / "sub"), ResourceError);
  fs::remove_all(blocker);
}

TEST(RunExperiment, EveryCatalogIdRunsAtSmokeScale)
{
  for (const auto &e : experiment_catalog()) {
    ExperimentSpec s = apply_scale(catalog_experiment(e.id), Scale::smoke);
    s.workers = 1;
    const fs::path out = scratch("smoke_" + e.id);
    const auto t0 = std::chrono::steady_clock::now();
    const RunResult r = run_experiment(s, out);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    EXPECT_LE(secs, 60.0) << e.id;
    EXPECT_GT(r.rows, 0u) << e.id;
    const auto j = nlohmann::json::parse(slurp(out / "summary.json"));
    EXPECT_EQ(j["status"], "ok") << e.id;
    EXPECT_TRUE(j.contains("diagnostics")) << e.id;
    if (e.id == "delaunay-rathie") {
      EXPECT_EQ(j["references"]["rathie_survival"]["v"].size(), j["references"]["rathie_survival"]["exact"].size());
      EXPECT_EQ(j["references"]["rathie_survival"]["v"].size(),
                j["references"]["rathie_survival"]["empirical"].size());
    }
    if (e.id == "lemma-xA" || e.id == "lemma-overlap") {
      EXPECT_EQ(j["diagnostics"]["violations"], 0) << e.id;
    }
    fs::remove_all(out);
  }
}

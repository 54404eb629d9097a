#include <benchmark/benchmark.h>

#include <vector>

#include "geoextremes/integral.hpp"
#include "geoextremes/mosaic.hpp"
#include "geoextremes/sampling.hpp"

using namespace geoextremes;

namespace {

void BM_PoissonSample(benchmark::State &state)
{
  const double side = static_cast<double>(state.range(0));
  const Box box = Box::cube(2, 0.0, side);
  std::uint64_t r = 0;
  for (auto _ : state) {
    const PointConfiguration config = sample_poisson(IntensitySpec::constant(1.0, 2), box, SeedSpec{1, r++});
    benchmark::DoNotOptimize(config.size());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(side * side));
}
BENCHMARK(BM_PoissonSample)->Arg(32)->Arg(100)->Arg(316);

void BM_VoronoiCell(benchmark::State &state)
{
  const PointConfiguration config = sample_poisson(IntensitySpec::constant(1.0, 2), Box::cube(2, 0.0, 60.0), SeedSpec{2, 0});
  const Box inner = Box::cube(2, 10.0, 50.0);
  std::vector<std::size_t> ids;
  for (std::size_t i = 0; i < config.size(); ++i) {
    if (inner.contains(config.points()[i])) {
      ids.push_back(i);
    }
  }
  std::size_t k = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(voronoi_cell(config, ids[k++ % ids.size()]));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_VoronoiCell);

void BM_DelaunayTriangulate(benchmark::State &state)
{
  const double side = static_cast<double>(state.range(0));
  const PointConfiguration config = sample_poisson(IntensitySpec::constant(1.0, 2), Box::cube(2, 0.0, side), SeedSpec{3, 0});
  const std::vector<Point> pts(config.points().begin(), config.points().end());
  for (auto _ : state) {
    benchmark::DoNotOptimize(delaunay_triangulate(pts));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(pts.size()));
}
BENCHMARK(BM_DelaunayTriangulate)->Arg(32)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_RathieSurvival(benchmark::State &state)
{
  double v = 0.5;
  for (auto _ : state) {
    benchmark::DoNotOptimize(rathie_survival(v, 1.0));
    v = v < 3.0 ? v + 0.25 : 0.5;
  }
}
BENCHMARK(BM_RathieSurvival)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

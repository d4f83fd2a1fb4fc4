#include <random>

#include <benchmark/benchmark.h>

#include "snowgrid/geodata.hpp"
#include "snowgrid/geometry.hpp"
#include "snowgrid/projection.hpp"
#include "snowgrid/render.hpp"
#include "snowgrid/spatial_stats.hpp"

using namespace snowgrid;

namespace {

const Dataset& dataset() {
    static const Dataset ds = load_dataset(SNOWGRID_BENCH_DATA_DIR);
    return ds;
}

void BM_Kde(benchmark::State& state) {
    const auto& ds = dataset();
    const double cell = static_cast<double>(state.range(0));
    const auto threads = static_cast<unsigned>(state.range(1));
    const double h = default_bandwidth(ds);
    for (auto _ : state) benchmark::DoNotOptimize(kde(ds, h, cell, ds.bbox, threads));
}
BENCHMARK(BM_Kde)->Args({10, 1})->Args({2, 1})->Args({2, 0})->Unit(benchmark::kMillisecond);

void BM_Voronoi(benchmark::State& state) {
    const auto& ds = dataset();
    for (auto _ : state) benchmark::DoNotOptimize(voronoi(ds.pumps, ds.extent()));
}
BENCHMARK(BM_Voronoi);

void BM_AssignCases(benchmark::State& state) {
    const auto& ds = dataset();
    for (auto _ : state) benchmark::DoNotOptimize(assign_cases(ds.cases, ds.pumps));
}
BENCHMARK(BM_AssignCases);

void BM_ClarkEvans(benchmark::State& state) {
    const auto& ds = dataset();
    for (auto _ : state) benchmark::DoNotOptimize(clark_evans(ds, ds.bbox));
}
BENCHMARK(BM_ClarkEvans);

void BM_GridToGeo(benchmark::State& state) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> e(kSohoStudyBox.min.easting, kSohoStudyBox.max.easting);
    std::uniform_real_distribution<double> n(kSohoStudyBox.min.northing, kSohoStudyBox.max.northing);
    std::vector<GridPoint> pts(1024);
    for (auto& p : pts) p = {e(rng), n(rng)};
    std::size_t i = 0;
    for (auto _ : state) benchmark::DoNotOptimize(grid_to_geo(pts[i++ & 1023]));
}
BENCHMARK(BM_GridToGeo);

void BM_RenderOverlay(benchmark::State& state) {
    const auto& ds = dataset();
    const MapStyle style{};
    const std::vector<Layer> layers{streets_layer(ds.streets), cases_layer(ds.cases), pumps_layer(ds.pumps)};
    for (auto _ : state) benchmark::DoNotOptimize(render_map(layers, ds.extent(), style));
}
BENCHMARK(BM_RenderOverlay);

void BM_RenderKde(benchmark::State& state) {
    const auto& ds = dataset();
    const MapStyle style{};
    const auto grid = kde(ds, default_bandwidth(ds), 10.0, ds.bbox);
    for (auto _ : state) {
        const std::vector<Layer> layers{render_kde(grid, style)};
        benchmark::DoNotOptimize(render_map(layers, ds.extent(), style));
    }
}
BENCHMARK(BM_RenderKde)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

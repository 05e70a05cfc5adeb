#include <benchmark/benchmark.h>

#include <random>

#include "nearcrash/spatial.hpp"

namespace {

using namespace nearcrash;

std::vector<RoadSegment> grid_segments(int count, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> lat(42.0, 42.5);
  std::uniform_real_distribution<double> lon(-84.0, -83.5);
  std::vector<RoadSegment> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    RoadSegment seg;
    seg.segment_id = i + 1;
    double a = lat(rng), o = lon(rng);
    seg.polyline = {{a, o}, {a + 0.002, o + 0.003}};
    out.push_back(std::move(seg));
  }
  return out;
}

void BM_IndexBuild(benchmark::State& state) {
  auto segments = grid_segments(static_cast<int>(state.range(0)), 7);
  for (auto _ : state) {
    SpatialIndex index = SpatialIndex::build(segments);
    benchmark::DoNotOptimize(index.segments().size());
  }
}
BENCHMARK(BM_IndexBuild)->Arg(1000)->Arg(10000);

void BM_IndexNearest(benchmark::State& state) {
  SpatialIndex index =
      SpatialIndex::build(grid_segments(static_cast<int>(state.range(0)), 11));
  std::mt19937 rng(13);
  std::uniform_real_distribution<double> lat(42.0, 42.5);
  std::uniform_real_distribution<double> lon(-84.0, -83.5);
  for (auto _ : state) {
    auto hit = index.nearest(LatLon{lat(rng), lon(rng)});
    benchmark::DoNotOptimize(hit.distance_m);
  }
}
BENCHMARK(BM_IndexNearest)->Arg(1000)->Arg(10000);

void BM_ExhaustiveNearest(benchmark::State& state) {
  auto segments = grid_segments(static_cast<int>(state.range(0)), 11);
  std::mt19937 rng(13);
  std::uniform_real_distribution<double> lat(42.0, 42.5);
  std::uniform_real_distribution<double> lon(-84.0, -83.5);
  for (auto _ : state) {
    LatLon p{lat(rng), lon(rng)};
    double best = 1e300;
    for (const RoadSegment& seg : segments)
      best = std::min(best, point_segment_distance(p, seg.polyline));
    benchmark::DoNotOptimize(best);
  }
}
BENCHMARK(BM_ExhaustiveNearest)->Arg(1000);

}  // namespace

#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "test_util.hpp"
#include "wacal/calibrate.hpp"
#include "wacal/simulate.hpp"

using namespace wacal;

namespace {

std::vector<Point3> sample_points(const CameraSpec& spec, size_t n) {
  std::mt19937 gen(12345);
  std::vector<Point3> pts;
  pts.reserve(n);
  for (size_t i = 0; i < n; ++i)
    pts.push_back(testutil::random_valid_point(spec, gen));
  return pts;
}

void BM_Project(benchmark::State& state) {
  const auto kind = static_cast<ModelKind>(state.range(0));
  const CameraSpec spec = testutil::make_spec(kind);
  const auto pts = sample_points(spec, 1024);
  size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(project(spec, pts[i++ & 1023]));
  }
  state.SetLabel(to_string(kind));
}

void BM_Unproject(benchmark::State& state) {
  const auto kind = static_cast<ModelKind>(state.range(0));
  const CameraSpec spec = testutil::make_spec(kind);
  const auto pts = sample_points(spec, 1024);
  std::vector<Pixel> pix;
  for (const auto& x : pts) pix.push_back(project(spec, x).pixel);
  size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(unproject(spec, pix[i++ & 1023]));
  }
  state.SetLabel(to_string(kind));
}

void BM_JacobianParams(benchmark::State& state) {
  const auto kind = static_cast<ModelKind>(state.range(0));
  const CameraSpec spec = testutil::make_spec(kind);
  const auto pts = sample_points(spec, 1024);
  size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(jacobian_params(spec, pts[i++ & 1023]));
  }
  state.SetLabel(to_string(kind));
}

void all_kinds_args(benchmark::internal::Benchmark* b) {
  for (ModelKind kind : testutil::all_kinds())
    b->Arg(static_cast<int>(kind));
}

BENCHMARK(BM_Project)->Apply(all_kinds_args);
BENCHMARK(BM_Unproject)->Apply(all_kinds_args);
BENCHMARK(BM_JacobianParams)->Apply(all_kinds_args);

void BM_Calibrate(benchmark::State& state) {
  const auto kind = static_cast<ModelKind>(state.range(0));
  const CameraSpec truth = testutil::make_spec(kind);
  const TargetLayout target =
      make_target(TargetKind::Checkerboard, 8, 11, 0.05);
  SimConfig sim;
  sim.frames = static_cast<int>(state.range(1));
  const SimResult data = simulate(truth, target, sim);
  CalibConfig calib;
  calib.model_kind = kind;
  for (auto _ : state) {
    benchmark::DoNotOptimize(calibrate(data.observations, target, truth.width,
                                       truth.height, calib));
  }
  state.SetLabel(to_string(kind) + "/" + std::to_string(sim.frames));
}

BENCHMARK(BM_Calibrate)
    ->Args({static_cast<int>(ModelKind::RadTan), 10})
    ->Args({static_cast<int>(ModelKind::RadTan), 40})
    ->Args({static_cast<int>(ModelKind::KB8), 40})
    ->Args({static_cast<int>(ModelKind::EUCM), 40})
    ->Args({static_cast<int>(ModelKind::Mei), 40})
    ->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

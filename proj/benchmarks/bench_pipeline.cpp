// Copyright 2026 The sphericam Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "sphericam/doa.hpp"
#include "sphericam/imaging.hpp"
#include "sphericam/laplacian.hpp"
#include "sphericam/metrics.hpp"
#include "sphericam/pipeline.hpp"
#include "sphericam/sigproc.hpp"
#include "sphericam/simulator.hpp"
#include "sphericam/upsampler.hpp"

namespace {

using namespace sphericam;

const Simulation& one_second_scene() {
  static const Simulation sim = [] {
    SceneSpec s;
    s.duration = 1.0;
    s.seed = 3;
    SourceSpec a, b;
    a.trajectory = {{0.0, 30.0, 10.0}};
    b.trajectory = {{0.0, -80.0, -15.0}};
    s.sources = {a, b};
    s.noise_snr_db = 20.0;
    return simulate(s, eigenmike_geometry());
  }();
  return sim;
}

void BM_BandCovariances(benchmark::State& state) {
  const auto& audio = one_second_scene().audio;
  const auto plan = default_band_plan(audio.sample_rate);
  for (auto _ : state) benchmark::DoNotOptimize(band_covariances(audio, plan, 1));
  state.SetItemsProcessed(state.iterations() * 10);
}
BENCHMARK(BM_BandCovariances)->Unit(benchmark::kMillisecond);

void BM_Backproject(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto tess = build_tessellation(n);
  const auto plan = default_band_plan(24000.0);
  const Eigen::MatrixXcd b = steering_matrix(eigenmike_geometry(), tess, plan.center_frequencies[4]);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  Eigen::MatrixXcd x(32, 32);
  for (auto& v : x.reshaped()) v = {g(rng), g(rng)};
  const Eigen::MatrixXcd cov = x * x.adjoint();
  for (auto _ : state) benchmark::DoNotOptimize(backproject(cov, b));
}
BENCHMARK(BM_Backproject)->Arg(242)->Arg(1002)->Unit(benchmark::kMillisecond);

void BM_LaplacianPolynomial(benchmark::State& state) {
  const auto tess = build_tessellation(242);
  const auto lap = build_graph_laplacian(tess, 8);
  const Eigen::VectorXd theta = Eigen::VectorXd::Constant(state.range(0) + 1, 0.1);
  const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(242, -1.0, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_laplacian_polynomial(lap, theta, x));
}
BENCHMARK(BM_LaplacianPolynomial)->Arg(3)->Arg(6);

void BM_ImagingFrame(benchmark::State& state) {
  const Pipeline pipeline{PipelineConfig{}};
  const auto frames = pipeline.covariances(one_second_scene().audio, 1);
  for (auto _ : state) benchmark::DoNotOptimize(pipeline.engine().forward(frames.front()));
}
BENCHMARK(BM_ImagingFrame)->Unit(benchmark::kMicrosecond);

void BM_ExtractDoas(benchmark::State& state) {
  const Pipeline pipeline{PipelineConfig{}};
  const auto maps = pipeline.image(one_second_scene().audio, 1);
  const Eigen::VectorXd x = aggregate_bands(maps.front());
  for (auto _ : state) benchmark::DoNotOptimize(extract_doas(x, pipeline.tessellation(), ExtractorConfig{}));
}
BENCHMARK(BM_ExtractDoas)->Unit(benchmark::kMicrosecond);

void BM_UpsampleFrame(benchmark::State& state) {
  PipelineConfig low;
  low.subset.assign(std::begin(kTetrahedralChannels), std::end(kTetrahedralChannels));
  low.normalize = "none";
  const Pipeline pipeline{low};
  const auto frames = pipeline.covariances(one_second_scene().audio, 1);
  UpsamplerOptions options;
  options.max_iterations = static_cast<std::size_t>(state.range(0));
  const NnlsUpsampler upsampler(pipeline.input_geometry(), eigenmike_geometry(), pipeline.tessellation(),
                                pipeline.band_plan(), options);
  for (auto _ : state) benchmark::DoNotOptimize(upsampler.upsample(frames.front().bands));
}
BENCHMARK(BM_UpsampleFrame)->Arg(500)->Arg(20000)->Unit(benchmark::kMillisecond);

void BM_Evaluate(benchmark::State& state) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g;
  Trajectory pred, gt;
  for (std::int64_t f = 0; f < 1000; ++f) {
    DoAFrame p{f, {}}, t{f, {}};
    for (int s = 0; s < 3; ++s) {
      const Vec3 d = Vec3(g(rng), g(rng), g(rng)).normalized();
      t.detections.push_back({d, 1.0, s});
      p.detections.push_back({(d + 0.05 * Vec3(g(rng), g(rng), g(rng))).normalized(), 1.0, 0});
    }
    pred.push_back(p);
    gt.push_back(t);
  }
  for (auto _ : state) benchmark::DoNotOptimize(evaluate(pred, gt, 20.0));
}
BENCHMARK(BM_Evaluate)->Unit(benchmark::kMillisecond);

void BM_LocalizeOneSecond(benchmark::State& state) {
  const Pipeline pipeline{PipelineConfig{}};
  const auto& audio = one_second_scene().audio;
  for (auto _ : state) benchmark::DoNotOptimize(pipeline.localize(audio, 1));
  state.SetItemsProcessed(state.iterations() * 10);
}
BENCHMARK(BM_LocalizeOneSecond)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

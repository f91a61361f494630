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

#include <gtest/gtest.h>

#include <random>

#include "sphericam/imaging.hpp"
#include "sphericam/pipeline.hpp"
#include "sphericam/simulator.hpp"
#include "test_support.hpp"

using namespace sphericam;

namespace {

SceneSpec static_scene(double az, double el, double duration = 2.0) {
  SceneSpec s;
  s.duration = duration;
  s.seed = 1;
  SourceSpec src;
  src.trajectory = {{0.0, az, el}};
  s.sources.push_back(src);
  return s;
}

double trace_power(const Audio& audio) {
  const auto frames = band_covariances(audio, default_band_plan(audio.sample_rate));
  double sum = 0.0;
  for (const auto& f : frames)
    for (const auto& b : f.bands) sum += b.trace().real();
  return sum;
}

}  // namespace

TEST(Simulate, StaticSourceAnnotations) {
  const auto sim = simulate(static_scene(0.0, 0.0), eigenmike_geometry());
  EXPECT_EQ(sim.audio.channel_count(), 32);
  EXPECT_EQ(sim.audio.frame_count(), 48000);
  ASSERT_EQ(sim.annotations.size(), 20u);
  for (std::size_t i = 0; i < 20; ++i) {
    EXPECT_EQ(sim.annotations[i].frame_index, static_cast<std::int64_t>(i));
    ASSERT_EQ(sim.annotations[i].detections.size(), 1u);
    EXPECT_LT((sim.annotations[i].detections[0].direction - Vec3::UnitX()).norm(), 1e-12);
  }
}

TEST(Simulate, StaticSourceRecoveredByPipeline) {
  const auto sim = simulate(static_scene(0.0, 0.0), eigenmike_geometry());
  const Pipeline pipeline(PipelineConfig{});
  const auto pred = pipeline.localize(sim.audio);
  ASSERT_EQ(pred.size(), 20u);
  int hits = 0;
  for (const auto& f : pred)
    for (const auto& d : f.detections)
      if (rad2deg(angle_between(d.direction, Vec3::UnitX())) <= 15.0) {
        ++hits;
        break;
      }
  EXPECT_GE(hits, 19);
}

TEST(Simulate, MovingSourceInterpolatesLinearly) {
  SceneSpec s = static_scene(0.0, 0.0, 10.0);
  s.sample_rate = 12000.0;
  s.sources[0].trajectory = {{0.0, 0.0, 0.0}, {10.0, 90.0, 0.0}};
  const auto sim = simulate(s, tetrahedral_subset(eigenmike_geometry(), kTetrahedralChannels));
  ASSERT_EQ(sim.annotations.size(), 100u);
  const Vec3 d = sim.annotations[50].detections[0].direction;
  EXPECT_NEAR(rad2deg(azimuth_of(d)), 45.0, 0.5);
  EXPECT_NEAR(rad2deg(elevation_of(d)), 0.0, 1e-9);
}

TEST(Trajectory, InterpolationUnwrapsAzimuth) {
  const std::vector<Breakpoint> t{{0.0, 170.0, 0.0}, {1.0, -170.0, 20.0}};
  const auto mid = interpolate_trajectory(t, 0.5);
  EXPECT_NEAR(std::abs(mid.azimuth_deg), 180.0, 1e-9);
  EXPECT_NEAR(mid.elevation_deg, 10.0, 1e-12);
  const auto before = interpolate_trajectory(t, -1.0);
  EXPECT_DOUBLE_EQ(before.azimuth_deg, 170.0);
  const auto after = interpolate_trajectory(t, 5.0);
  EXPECT_NEAR(after.azimuth_deg, -170.0, 1e-9);
  EXPECT_THROW(interpolate_trajectory({}, 0.0), std::invalid_argument);
}

TEST(Simulate, DeterministicForSeed) {
  SceneSpec s = static_scene(30.0, 10.0, 0.5);
  s.noise_snr_db = 10.0;
  const auto geom = eigenmike_geometry();
  const auto a = simulate(s, geom), b = simulate(s, geom);
  EXPECT_EQ(a.audio.samples, b.audio.samples);
  s.seed = 2;
  EXPECT_NE(simulate(s, geom).audio.samples, a.audio.samples);
}

TEST(Simulate, DoublingAmplitudeQuadruplesPower) {
  const auto geom = tetrahedral_subset(eigenmike_geometry(), kTetrahedralChannels);
  SceneSpec s = static_scene(-60.0, 20.0, 5.0);
  const double base = trace_power(simulate(s, geom).audio);
  s.sources[0].level_db = 20.0 * std::log10(2.0);
  const double doubled = trace_power(simulate(s, geom).audio);
  EXPECT_NEAR(doubled / base, 4.0, 0.04);
}

TEST(Simulate, SteeringConsistencyPerBand) {
  const auto tess = build_tessellation(242);
  const auto geom = eigenmike_geometry();
  const auto plan = default_band_plan(24000.0);
  for (std::size_t n : {12u, 97u, 200u}) {
    const Vec3 d = tess.directions[n];
    const auto sim = simulate(static_scene(rad2deg(azimuth_of(d)), rad2deg(elevation_of(d)), 0.3), geom);
    const auto frames = band_covariances(sim.audio, plan);
    ASSERT_FALSE(frames.empty());
    for (std::size_t b = 0; b < plan.band_count(); ++b) {
      const auto a = steering_matrix(geom, tess, plan.center_frequencies[b]);
      Eigen::Index best = 0;
      backproject(frames[1].bands[b], a).maxCoeff(&best);
      EXPECT_EQ(static_cast<std::size_t>(best), n) << "band " << b;
    }
  }
}

TEST(Simulate, NoiseAtRequestedSnr) {
  const auto geom = tetrahedral_subset(eigenmike_geometry(), kTetrahedralChannels);
  SceneSpec s = static_scene(0.0, 0.0, 2.0);
  const auto clean = simulate(s, geom);
  s.noise_snr_db = 10.0;
  const auto noisy = simulate(s, geom);
  const double signal = clean.audio.samples.squaredNorm();
  const double noise = (noisy.audio.samples - clean.audio.samples).squaredNorm();
  EXPECT_NEAR(10.0 * std::log10(signal / noise), 10.0, 0.1);
}

TEST(Simulate, OnsetGatesAnnotations) {
  SceneSpec s = static_scene(0.0, 0.0, 1.0);
  s.sources[0].onset = 0.3;
  s.sources[0].offset = 0.7;
  const auto sim = simulate(s, tetrahedral_subset(eigenmike_geometry(), kTetrahedralChannels));
  ASSERT_EQ(sim.annotations.size(), 10u);
  for (const auto& f : sim.annotations) {
    const double centre = (static_cast<double>(f.frame_index) + 0.5) * 0.1;
    EXPECT_EQ(f.detections.size(), centre >= 0.3 && centre < 0.7 ? 1u : 0u) << f.frame_index;
  }
  EXPECT_EQ(sim.audio.samples.leftCols(7000).cwiseAbs().maxCoeff(), 0.0);
}

TEST(SceneValidation, RejectsBadScenes) {
  SceneSpec s = static_scene(0.0, 0.0, 1.0);
  s.sources[0].trajectory = {{0.0, 0.0, 0.0}, {2.0, 10.0, 0.0}};
  try {
    s.validate();
    FAIL() << "expected rejection";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("outside scene duration"), std::string::npos) << e.what();
  }
  s = static_scene(0.0, 95.0);
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s = static_scene(0.0, 0.0);
  s.sources[0].signal.kind = SourceSignal::Kind::kFile;
  s.sources[0].signal.path = "/nonexistent/signal.wav";
  EXPECT_THROW(simulate(s, eigenmike_geometry()), std::invalid_argument);
  s = static_scene(0.0, 0.0);
  s.duration = 0.0;
  EXPECT_THROW(s.validate(), std::invalid_argument);
}

TEST(SceneJson, ParsesAllSignalKinds) {
  const auto s = parse_scene(R"({
    "duration": 1.5, "sample_rate": 16000, "seed": 9, "noise_snr_db": 15,
    "sources": [
      {"signal": "white", "trajectory": [[0, 10, 20]]},
      {"signal": "pink", "trajectory": [[0, -30, 0], [1.5, 30, 0]], "onset": 0.2, "offset": 1.0, "level_db": -6},
      {"signal": {"tone": 2000}, "trajectory": [[0, 0, 0]]}
    ]})");
  EXPECT_EQ(s.duration, 1.5);
  EXPECT_EQ(s.sample_rate, 16000.0);
  EXPECT_EQ(s.seed, 9u);
  EXPECT_EQ(*s.noise_snr_db, 15.0);
  ASSERT_EQ(s.sources.size(), 3u);
  EXPECT_EQ(s.sources[1].signal.kind, SourceSignal::Kind::kPink);
  EXPECT_EQ(*s.sources[1].offset, 1.0);
  EXPECT_EQ(s.sources[1].level_db, -6.0);
  EXPECT_EQ(s.sources[2].signal.kind, SourceSignal::Kind::kTone);
  EXPECT_EQ(s.sources[2].signal.frequency, 2000.0);
  EXPECT_THROW(parse_scene("{not json"), FormatError);
  EXPECT_THROW(parse_scene(R"({"duration": 1, "sources": [{"signal": "brown", "trajectory": [[0,0,0]]}]})"),
               std::exception);
}

TEST(Annotations, RoundTripHundredFrames) {
  std::mt19937_64 rng(81);
  std::uniform_real_distribution<double> az(-180.0, 180.0), el(-90.0, 90.0);
  Trajectory t;
  for (int f = 0; f < 100; ++f) {
    DoAFrame frame;
    frame.frame_index = f;
    for (int s = 0; s <= f % 3; ++s)
      frame.detections.push_back({unit_from_azel(deg2rad(az(rng)), deg2rad(el(rng))), 1.0, s});
    t.push_back(frame);
  }
  const auto back = parse_annotations(format_annotations(t));
  ASSERT_EQ(back.size(), t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    EXPECT_EQ(back[i].frame_index, t[i].frame_index);
    ASSERT_EQ(back[i].detections.size(), t[i].detections.size());
    for (std::size_t j = 0; j < t[i].detections.size(); ++j) {
      EXPECT_EQ(back[i].detections[j].source_id, t[i].detections[j].source_id);
      EXPECT_LT((back[i].detections[j].direction - t[i].detections[j].direction).norm(), 1e-12);
    }
  }
}

TEST(Annotations, ConfidenceColumnRoundTrips) {
  Trajectory t{DoAFrame{4, {{Vec3::UnitY(), 0.625, 0}}}};
  const auto text = format_annotations(t, true);
  EXPECT_EQ(text, "frame,source_id,azimuth_deg,elevation_deg,confidence\n4,0,90,0,0.625\n");
  EXPECT_EQ(parse_annotations(text)[0].detections[0].confidence, 0.625);
}

TEST(Annotations, BadElevationReportsLine) {
  try {
    parse_annotations("frame,source_id,azimuth_deg,elevation_deg\n0,0,10,20\n1,0,10,120\n");
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_annotations("frame,source_id,azimuth_deg,elevation_deg\n0,0,180,0\n"), FormatError);
  EXPECT_THROW(parse_annotations("frame,source_id,azimuth_deg,elevation_deg\n0,0,x,0\n"), FormatError);
  EXPECT_THROW(parse_annotations("a,b\n"), FormatError);
}

TEST(Annotations, HeaderOnlyIsEmpty) {
  EXPECT_TRUE(parse_annotations("frame,source_id,azimuth_deg,elevation_deg\n").empty());
}

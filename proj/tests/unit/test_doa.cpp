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

#include "sphericam/doa.hpp"
#include "test_support.hpp"

using namespace sphericam;

namespace {

const Tessellation& tess242() {
  static const Tessellation t = build_tessellation(242);
  return t;
}

IntensityMap map_of(std::vector<Eigen::VectorXd> bands, std::int64_t index = 0) {
  IntensityMap m;
  m.frame_index = index;
  m.bands = std::move(bands);
  return m;
}

double deg_between(const Vec3& a, const Vec3& b) { return rad2deg(angle_between(a, b)); }

}  // namespace

TEST(Aggregate, SingleBandIsClipped) {
  const Eigen::VectorXd v = (Eigen::VectorXd(4) << 0.5, -0.2, 0.0, 1.0).finished();
  const auto out = aggregate_bands(map_of({v}));
  EXPECT_EQ(out, (Eigen::VectorXd(4) << 0.5, 0.0, 0.0, 1.0).finished());
}

TEST(Aggregate, MeanBeforeClip) {
  const Eigen::VectorXd v = (Eigen::VectorXd(3) << 0.5, -0.2, 0.9).finished();
  EXPECT_TRUE(aggregate_bands(map_of({v, -v})).isZero(0.0));
  const Eigen::VectorXd w = (Eigen::VectorXd(3) << -0.1, 0.3, 0.0).finished();
  EXPECT_TRUE(aggregate_bands(map_of({v, w})).isApprox((Eigen::VectorXd(3) << 0.2, 0.05, 0.45).finished(), 1e-15));
}

TEST(Aggregate, UniformStaysUniform) {
  const auto out = aggregate_bands(map_of(std::vector<Eigen::VectorXd>(9, Eigen::VectorXd::Constant(242, 0.5))));
  EXPECT_LT((out.array() - 0.5).abs().maxCoeff(), 1e-15);
  EXPECT_THROW(aggregate_bands(IntensityMap{}), std::invalid_argument);
}

TEST(Taper, CentreEndpointsAndMidSlope) {
  EXPECT_DOUBLE_EQ(tukey_window(0.5, 0.8), 1.0);
  EXPECT_NEAR(tukey_window(0.0, 0.8), 0.0, 1e-15);
  EXPECT_NEAR(tukey_window(1.0, 0.8), 0.0, 1e-15);
  // elevation +45 deg -> u = 0.75
  EXPECT_NEAR(tukey_window(0.75, 0.8), 0.6913417161825449, 1e-12);
  EXPECT_NEAR(tukey_window(0.25, 0.8), 0.6913417161825449, 1e-12);
  EXPECT_DOUBLE_EQ(tukey_window(0.1, 0.0), 1.0);
  EXPECT_NEAR(tukey_window(0.25, 1.0), 0.5, 1e-12);
}

TEST(Taper, AppliedByElevation) {
  Tessellation t;
  t.directions = {unit_from_azel(0, 0), unit_from_azel(1, kPi / 2), unit_from_azel(2, -kPi / 2),
                  unit_from_azel(0.3, kPi / 4)};
  for (const auto& d : t.directions) {
    t.elevations.push_back(elevation_of(d));
    t.azimuths.push_back(azimuth_of(d));
  }
  const auto out = apply_elevation_taper(Eigen::VectorXd::Ones(4), t, 0.8);
  EXPECT_NEAR(out(0), 1.0, 1e-15);
  EXPECT_NEAR(out(1), 0.0, 1e-15);
  EXPECT_NEAR(out(2), 0.0, 1e-15);
  EXPECT_NEAR(out(3), 0.6913417161825449, 1e-12);
  EXPECT_THROW(apply_elevation_taper(Eigen::VectorXd::Ones(3), t, 0.8), std::invalid_argument);
}

TEST(Extract, SinglePixelGivesItsDirection) {
  const auto& t = tess242();
  for (std::size_t n : {0u, 100u, 241u}) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(242);
    x(static_cast<Eigen::Index>(n)) = 0.7;
    const auto frame = extract_doas(x, t, ExtractorConfig{});
    ASSERT_EQ(frame.detections.size(), 1u);
    EXPECT_LT(deg_between(frame.detections[0].direction, t.directions[n]), 1e-9);
    EXPECT_DOUBLE_EQ(frame.detections[0].confidence, 0.7);
  }
}

TEST(Extract, EmptyMapGivesEmptyFrame) {
  const auto frame = extract_doas(Eigen::VectorXd::Constant(242, -0.3), tess242(), ExtractorConfig{}, 12);
  EXPECT_EQ(frame.frame_index, 12);
  EXPECT_TRUE(frame.detections.empty());
}

TEST(Extract, BlobsNinetyDegreesApartGiveTwo) {
  const auto& t = tess242();
  const Vec3 a = unit_from_azel(deg2rad(-40.0), deg2rad(5.0));
  const Vec3 b = fixtures::offset_direction(a, deg2rad(90.0), 0.7);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(242);
  fixtures::add_blob(x, t, a, 13.0);
  fixtures::add_blob(x, t, b, 13.0);
  const auto frame = extract_doas(x, t, ExtractorConfig{});
  ASSERT_EQ(frame.detections.size(), 2u);
  const Vec3& p = frame.detections[0].direction;
  const Vec3& q = frame.detections[1].direction;
  const double straight = deg_between(p, a) + deg_between(q, b);
  const double swapped = deg_between(p, b) + deg_between(q, a);
  EXPECT_LE(std::max(deg_between(p, straight < swapped ? a : b), deg_between(q, straight < swapped ? b : a)),
            15.0);
}

TEST(Extract, BlobsTenDegreesApartMerge) {
  const auto& t = tess242();
  const Vec3 a = unit_from_azel(0.0, 0.0);
  const Vec3 b = unit_from_azel(deg2rad(10.0), 0.0);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(242);
  fixtures::add_blob(x, t, a, 13.0);
  fixtures::add_blob(x, t, b, 13.0);
  const auto frame = extract_doas(x, t, ExtractorConfig{});
  ASSERT_EQ(frame.detections.size(), 1u);
  const Vec3 mid = (a + b).normalized();
  EXPECT_LE(deg_between(frame.detections[0].direction, mid), 10.0);
}

TEST(Extract, PropertiesOnRandomMaps) {
  const auto& t = tess242();
  const ExtractorConfig cfg;
  std::mt19937_64 rng(61);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(242);
    const int blobs = 1 + trial % 3;
    for (int i = 0; i < blobs; ++i) fixtures::add_blob(x, t, fixtures::random_unit(rng), 10.0 + 15.0 * u(rng));
    const auto frame = extract_doas(x, t, cfg);
    EXPECT_LE(frame.detections.size(), 3u);

    // post-merge separation and unit norm
    for (std::size_t i = 0; i < frame.detections.size(); ++i) {
      EXPECT_NEAR(frame.detections[i].direction.norm(), 1.0, 1e-9);
      for (std::size_t j = i + 1; j < frame.detections.size(); ++j)
        EXPECT_GT(deg_between(frame.detections[i].direction, frame.detections[j].direction), cfg.merge_radius_deg);
    }

    // every estimate lies near one of the top pixels
    std::vector<Eigen::Index> idx(242);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index l, Eigen::Index r) { return x(l) > x(r); });
    for (const auto& d : frame.detections) {
      double nearest = 180.0;
      for (std::size_t k = 0; k < cfg.top_pixels; ++k)
        if (x(idx[k]) > 0.0) nearest = std::min(nearest, deg_between(d.direction, t.directions[static_cast<std::size_t>(idx[k])]));
      EXPECT_LE(nearest, cfg.reject_radius_deg);
    }

    // scale invariance and determinism
    const auto scaled = extract_doas(4.0 * x, t, cfg);
    const auto again = extract_doas(x, t, cfg);
    ASSERT_EQ(scaled.detections.size(), frame.detections.size());
    ASSERT_EQ(again.detections.size(), frame.detections.size());
    for (std::size_t i = 0; i < frame.detections.size(); ++i) {
      EXPECT_LT(deg_between(scaled.detections[i].direction, frame.detections[i].direction), 1e-9);
      EXPECT_EQ(again.detections[i].direction, frame.detections[i].direction);
    }
  }
}

TEST(Extract, ConfigValidation) {
  ExtractorConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.k = 0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.k = 16;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.reject_radius_deg = 180.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.taper_factor = 1.2;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(Localize, EmptyAndSingleFrame) {
  EXPECT_TRUE(localize_recording({}, tess242(), ExtractorConfig{}).empty());
  Eigen::VectorXd x = Eigen::VectorXd::Zero(242);
  x(50) = 1.0;
  const auto out = localize_recording({map_of({x}, 7)}, tess242(), ExtractorConfig{});
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].frame_index, 7);
}

TEST(Localize, StaticSourceIsStableAcrossFrames) {
  const auto& t = tess242();
  const Vec3 src = unit_from_azel(deg2rad(30.0), deg2rad(20.0));
  std::mt19937_64 rng(62);
  std::normal_distribution<double> g(0.0, 0.02);
  std::vector<IntensityMap> maps;
  for (int f = 0; f < 10; ++f) {
    std::vector<Eigen::VectorXd> bands;
    for (int b = 0; b < 9; ++b) {
      Eigen::VectorXd x = Eigen::VectorXd::Zero(242);
      fixtures::add_blob(x, t, src, 13.0);
      for (auto& v : x) v = v > 0 ? v + g(rng) : v;
      bands.push_back(x);
    }
    maps.push_back(map_of(bands, f));
  }
  const auto out = localize_recording(maps, t, ExtractorConfig{}, 3);
  ASSERT_EQ(out.size(), 10u);
  for (std::size_t i = 0; i < 10; ++i) {
    EXPECT_EQ(out[i].frame_index, static_cast<std::int64_t>(i));
    ASSERT_EQ(out[i].detections.size(), 1u);
    for (std::size_t j = 0; j < i; ++j)
      EXPECT_LT(deg_between(out[i].detections[0].direction, out[j].detections[0].direction), 5.0);
  }
}

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

#include <numeric>
#include <random>

#include <Eigen/Eigenvalues>

#include "sphericam/sigproc.hpp"
#include "test_support.hpp"

using namespace sphericam;

namespace {

Audio white_noise(Eigen::Index channels, double seconds, std::uint64_t seed, double rate = 24000.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Audio a;
  a.sample_rate = rate;
  a.samples.resize(channels, static_cast<Eigen::Index>(seconds * rate));
  for (Eigen::Index j = 0; j < a.samples.cols(); ++j)
    for (Eigen::Index i = 0; i < channels; ++i) a.samples(i, j) = g(rng);
  return a;
}

void expect_hermitian_psd(const Eigen::MatrixXcd& s) {
  const double scale = std::max(s.norm(), 1e-300);
  EXPECT_LE((s - s.adjoint()).norm() / scale, 1e-10);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(s);
  EXPECT_GE(es.eigenvalues().minCoeff(), -1e-8 * s.trace().real());
  EXPECT_GE(s.trace().real(), 0.0);
}

}  // namespace

TEST(BandPlanTest, DefaultCentres) {
  const auto plan = default_band_plan(24000.0);
  ASSERT_EQ(plan.band_count(), 9u);
  for (std::size_t i = 0; i < 9; ++i) EXPECT_NEAR(plan.center_frequencies[i], 1500.0 + 375.0 * i, 1e-9);
}

TEST(BandPlanTest, ConstantSpacingAndMidpointEdges) {
  const auto plan = default_band_plan(24000.0);
  for (std::size_t i = 1; i < 9; ++i) {
    EXPECT_NEAR(plan.center_frequencies[i] - plan.center_frequencies[i - 1], 375.0, 1e-9);
    EXPECT_NEAR(plan.band_edges[i].first, plan.band_edges[i - 1].second, 1e-9);
    EXPECT_NEAR(plan.band_edges[i].first,
                0.5 * (plan.center_frequencies[i] + plan.center_frequencies[i - 1]), 1e-9);
  }
  EXPECT_NEAR(plan.band_edges.front().first, 1312.5, 1e-9);
  EXPECT_NEAR(plan.band_edges.back().second, 4687.5, 1e-9);
  EXPECT_EQ(plan.frame_samples(), 2400u);
}

TEST(BandPlanTest, RejectsRateBelowNyquist) {
  try {
    default_band_plan(8000.0);
    FAIL() << "expected rejection";
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("band 4500 Hz"), std::string::npos) << msg;
    EXPECT_NE(msg.find("Nyquist 4000 Hz"), std::string::npos) << msg;
  }
  EXPECT_NO_THROW(default_band_plan(9400.0));
}

TEST(BandPlanTest, SingleBandSpansRange) {
  const auto plan = make_band_plan(1, 1000.0, 2000.0, 24000.0);
  ASSERT_EQ(plan.band_count(), 1u);
  EXPECT_DOUBLE_EQ(plan.band_edges[0].first, 1000.0);
  EXPECT_DOUBLE_EQ(plan.band_edges[0].second, 2000.0);
  EXPECT_THROW(make_band_plan(0, 1000.0, 2000.0, 24000.0), std::invalid_argument);
  EXPECT_THROW(make_band_plan(3, 2000.0, 1000.0, 24000.0), std::invalid_argument);
}

TEST(BandCovariances, OneSecondGivesTenFrames) {
  const auto plan = default_band_plan(24000.0);
  const auto frames = band_covariances(white_noise(4, 1.0, 1), plan);
  ASSERT_EQ(frames.size(), 10u);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    EXPECT_EQ(frames[i].frame_index, static_cast<std::int64_t>(i));
    ASSERT_EQ(frames[i].band_count(), 9u);
    for (const auto& s : frames[i].bands) {
      EXPECT_EQ(s.rows(), 4);
      EXPECT_EQ(s.cols(), 4);
    }
  }
}

TEST(BandCovariances, TrailingPartialFrameDropped) {
  const auto plan = default_band_plan(24000.0);
  EXPECT_EQ(band_covariances(white_noise(3, 0.25, 2), plan).size(), 2u);
  EXPECT_TRUE(band_covariances(white_noise(3, 0.05, 2), plan).empty());
}

TEST(BandCovariances, CoherentChannelsGiveRankOne) {
  Audio a = white_noise(1, 1.0, 3);
  a.samples = a.samples.replicate(6, 1).eval();
  for (const auto& f : band_covariances(a, default_band_plan(24000.0)))
    for (const auto& s : f.bands) {
      const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(s);
      const auto ev = es.eigenvalues();
      EXPECT_LT(ev(ev.size() - 2) / ev(ev.size() - 1), 1e-6);
    }
}

TEST(BandCovariances, IndependentNoiseIsNearlyDiagonal) {
  const auto frames = band_covariances(white_noise(8, 10.0, 4), default_band_plan(24000.0));
  ASSERT_EQ(frames.size(), 100u);
  for (std::size_t b = 0; b < 9; ++b) {
    Eigen::MatrixXcd mean = Eigen::MatrixXcd::Zero(8, 8);
    for (const auto& f : frames) mean += f.bands[b];
    mean /= 100.0;
    const double diag = mean.diagonal().real().mean();
    EXPECT_NEAR(diag, 1.0, 0.1) << "band " << b;
    for (Eigen::Index i = 0; i < 8; ++i)
      for (Eigen::Index j = 0; j < 8; ++j)
        if (i != j) {
          EXPECT_LT(std::abs(mean(i, j)), 0.1 * diag) << "band " << b;
        }
  }
}

TEST(BandCovariances, HermitianPsdProperty) {
  const auto plan = default_band_plan(24000.0);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Audio a = white_noise(5, 0.5, seed);
    a.samples.row(1) += 0.7 * a.samples.row(0);
    for (const auto& f : band_covariances(a, plan))
      for (const auto& s : f.bands) expect_hermitian_psd(s);
  }
}

TEST(BandCovariances, ScalesQuadratically) {
  const auto plan = default_band_plan(24000.0);
  Audio a = white_noise(4, 0.5, 5);
  const auto base = band_covariances(a, plan);
  a.samples *= 3.0;
  const auto scaled = band_covariances(a, plan);
  for (std::size_t f = 0; f < base.size(); ++f)
    for (std::size_t b = 0; b < 9; ++b)
      EXPECT_LT(fixtures::rel_error(scaled[f].bands[b], 9.0 * base[f].bands[b]), 1e-10);
}

TEST(BandCovariances, ChannelPermutationPermutesMatrix) {
  const auto plan = default_band_plan(24000.0);
  Audio a = white_noise(4, 0.3, 6);
  a.samples.row(2) += a.samples.row(0);
  const std::vector<int> perm{2, 0, 3, 1};
  Audio p = a;
  for (int i = 0; i < 4; ++i) p.samples.row(i) = a.samples.row(perm[static_cast<std::size_t>(i)]);
  const auto base = band_covariances(a, plan);
  const auto permuted = band_covariances(p, plan);
  for (std::size_t f = 0; f < base.size(); ++f)
    for (std::size_t b = 0; b < 9; ++b)
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
          EXPECT_NEAR(std::abs(permuted[f].bands[b](i, j) -
                               base[f].bands[b](perm[static_cast<std::size_t>(i)],
                                                perm[static_cast<std::size_t>(j)])),
                      0.0, 1e-10 * base[f].bands[b].norm());
}

TEST(BandCovariances, ThreadCountDoesNotChangeOutput) {
  const auto plan = default_band_plan(24000.0);
  const Audio a = white_noise(4, 1.0, 7);
  const auto one = band_covariances(a, plan, 1);
  const auto many = band_covariances(a, plan, 4);
  ASSERT_EQ(one.size(), many.size());
  for (std::size_t f = 0; f < one.size(); ++f) {
    EXPECT_EQ(one[f].frame_index, many[f].frame_index);
    for (std::size_t b = 0; b < 9; ++b) EXPECT_EQ(one[f].bands[b], many[f].bands[b]);
  }
}

TEST(BandCovariances, RejectsBadInput) {
  const auto plan = default_band_plan(24000.0);
  EXPECT_THROW(band_covariances(white_noise(1, 0.5, 8), plan), std::invalid_argument);
  EXPECT_THROW(band_covariances(white_noise(2, 0.5, 8, 16000.0), plan), std::invalid_argument);
  EXPECT_THROW(make_audio({{0.0, 1.0}, {0.0}}, 24000.0), std::invalid_argument);
  EXPECT_EQ(make_audio({{0.0, 1.0}, {2.0, 3.0}}, 24000.0).samples(1, 1), 3.0);
}

TEST(Normalization, TraceBecomesOne) {
  std::mt19937_64 rng(9);
  CovarianceFrame f;
  f.bands = {fixtures::random_psd(4, rng), Eigen::MatrixXcd::Zero(4, 4)};
  normalize_trace(f);
  EXPECT_NEAR(f.bands[0].trace().real(), 1.0, 1e-12);
  EXPECT_TRUE(f.bands[1].isZero(0.0));
}

TEST(Normalization, SpectralKneeSaturatesStrongComponents) {
  std::mt19937_64 rng(10);
  const Eigen::MatrixXcd q = fixtures::random_complex(4, 4, rng).householderQr().householderQ();
  const Eigen::Vector4d ev(10.0, 2.0, 0.25, 0.0);
  CovarianceFrame f;
  f.bands = {Eigen::MatrixXcd(q * ev.cast<std::complex<double>>().asDiagonal() * q.adjoint())};
  normalize_spectral(f, 1.0, 0.1);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(f.bands[0]);
  EXPECT_NEAR(es.eigenvalues()(3), 1.0, 1e-12);
  EXPECT_NEAR(es.eigenvalues()(2), 1.0, 1e-12);
  EXPECT_NEAR(es.eigenvalues()(1), 0.25, 1e-12);
  EXPECT_NEAR(es.eigenvalues()(0), 0.0, 1e-12);
  EXPECT_TRUE((f.bands[0] - f.bands[0].adjoint()).isZero(0.0));
}

TEST(Normalization, SpectralKneeOneIsLargestEigenvalueScaling) {
  std::mt19937_64 rng(11);
  const Eigen::MatrixXcd s = fixtures::random_psd(5, rng);
  CovarianceFrame f;
  f.bands = {s};
  normalize_spectral(f, 1.0, 1.0);
  const double top = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(s).eigenvalues().maxCoeff();
  EXPECT_LT(fixtures::rel_error(f.bands[0], s / top), 1e-10);
  EXPECT_THROW(normalize_spectral(f, 0.0), std::invalid_argument);
  EXPECT_THROW(normalize_spectral(f, 1.0, 1.5), std::invalid_argument);
}

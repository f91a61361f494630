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

#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "sphericam/wav.hpp"

namespace sphericam {

/// Frequency bands over which covariances are aggregated.
struct BandPlan {
  std::vector<double> center_frequencies;           // Hz, ascending
  std::vector<std::pair<double, double>> band_edges;  // Hz, [low, high)
  double sample_rate = 0.0;
  double frame_length = 0.1;       // seconds per covariance frame
  std::size_t window_size = 1024;  // STFT window, samples (periodic Hann)
  std::size_t hop_size = 512;      // STFT hop, samples

  std::size_t band_count() const { return center_frequencies.size(); }
  std::size_t frame_samples() const;
};

/// `bands` centres linearly spaced over [f_low, f_high]; edges halfway
/// between neighbouring centres, outer edges placed symmetrically. A single
/// band spans [f_low, f_high]. Throws std::invalid_argument when any edge
/// reaches Nyquist or the band layout is degenerate.
BandPlan make_band_plan(std::size_t bands, double f_low, double f_high, double sample_rate);

/// Nine bands, 1.5 kHz to 4.5 kHz.
BandPlan default_band_plan(double sample_rate);

/// Per-band M x M covariance for one 100 ms frame.
struct CovarianceFrame {
  std::int64_t frame_index = 0;
  std::vector<Eigen::MatrixXcd> bands;

  std::size_t band_count() const { return bands.size(); }
};

/// Splits audio into consecutive frames of plan.frame_samples() (trailing
/// partial frame dropped) and, per frame and band, averages s s^H over every
/// STFT snapshot inside the frame and every bin whose centre frequency lies
/// in the band. Spectra are scaled by 1/sqrt(sum w^2) so unit-variance white
/// noise has unit expected diagonal.
///
/// Frames are computed on up to `threads` workers (0 = auto) and returned in
/// frame order.
std::vector<CovarianceFrame> band_covariances(const Audio& audio, const BandPlan& plan,
                                              unsigned threads = 1);

/// Divides every band matrix by its trace; zero-trace bands are left alone.
void normalize_trace(CovarianceFrame& frame);

/// Reshapes the eigenvalues of every band matrix,
///   lambda -> min(1, (lambda / (knee * lambda_max))^exponent),
/// keeping the eigenvectors (negative eigenvalues clamped to 0). Every
/// component within `knee` of the strongest gets unit weight, weaker ones
/// roll off. knee = 1, exponent = 1 is plain largest-eigenvalue scaling.
/// Zero bands are left alone. Throws std::invalid_argument unless
/// exponent > 0 and 0 < knee <= 1.
void normalize_spectral(CovarianceFrame& frame, double exponent, double knee = 1.0);

/// Builds an Audio value from separate channel buffers. Throws
/// std::invalid_argument on channel-length mismatch.
Audio make_audio(const std::vector<std::vector<double>>& channels, double sample_rate);

}  // namespace sphericam

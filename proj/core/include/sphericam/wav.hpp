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

#include <filesystem>

#include <Eigen/Core>

namespace sphericam {

/// Multichannel audio, one row per channel, samples in [-1, 1] nominal.
struct Audio {
  double sample_rate = 0.0;
  Eigen::MatrixXd samples;  // channels x frames

  Eigen::Index channel_count() const { return samples.rows(); }
  Eigen::Index frame_count() const { return samples.cols(); }
  double duration() const { return sample_rate > 0 ? frame_count() / sample_rate : 0.0; }
};

/// Reads linear-PCM WAV: 16/24/32-bit integer or 32/64-bit IEEE float,
/// including WAVE_FORMAT_EXTENSIBLE headers. Throws FormatError.
Audio read_wav(const std::filesystem::path& path);

/// Writes 32-bit IEEE float WAV.
void write_wav_float(const std::filesystem::path& path, const Audio& audio);

}  // namespace sphericam

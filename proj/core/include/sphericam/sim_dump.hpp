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

#include <cstdint>
#include <filesystem>
#include <vector>

#include <Eigen/Core>

#include "sphericam/common.hpp"
#include "sphericam/imaging.hpp"
#include "sphericam/tessellation.hpp"

namespace sphericam {

/// Intensity-map dump, little-endian: "SIMD", u32 version = 1, u32 n_frames,
/// u32 F, u32 N, then n_frames * F * N float32 values, frame-major then
/// band-major.
struct SimDump {
  std::uint32_t bands = 0;
  std::uint32_t pixels = 0;
  std::vector<IntensityMap> frames;
};

void write_sim_dump(const std::filesystem::path& path, const SimDump& dump);
SimDump read_sim_dump(const std::filesystem::path& path);

/// 8-bit grayscale raster, row-major, row 0 at elevation +90.
struct GrayImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;
};

/// Equirectangular resampling of a per-pixel map: each raster cell takes the
/// value of its nearest tessellation point, scaled so the map maximum is 255
/// (negative values become 0). Each marker direction is painted as a 3x3
/// block of 255. Height is width / 2; columns run from azimuth -180 to +180.
GrayImage render_equirectangular(const Eigen::VectorXd& values, const Tessellation& tess,
                                 std::size_t width = 360, const std::vector<Vec3>& markers = {});

/// Binary portable graymap (P5, maxval 255).
void write_pgm(const std::filesystem::path& path, const GrayImage& image);

}  // namespace sphericam

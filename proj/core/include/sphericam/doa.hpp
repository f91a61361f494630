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
#include <vector>

#include <Eigen/Core>

#include "sphericam/common.hpp"
#include "sphericam/imaging.hpp"
#include "sphericam/tessellation.hpp"

namespace sphericam {

/// One direction in a frame: an estimate (confidence = cluster mean
/// intensity) or an annotation (source_id set, confidence unused).
struct Detection {
  Vec3 direction = Vec3::UnitX();
  double confidence = 0.0;
  int source_id = 0;
};

struct DoAFrame {
  std::int64_t frame_index = 0;
  std::vector<Detection> detections;
};

using Trajectory = std::vector<DoAFrame>;

struct ExtractorConfig {
  std::size_t k = 3;
  std::size_t top_pixels = 15;
  double taper_factor = 0.8;
  double reject_radius_deg = 15.0;
  double merge_radius_deg = 15.0;

  /// Throws std::invalid_argument unless 1 <= k <= top_pixels, taper in
  /// [0, 1] and both radii in (0, 180).
  void validate() const;
};

/// Mean over bands per pixel, then negatives clipped to zero.
Eigen::VectorXd aggregate_bands(const IntensityMap& map);

/// Tukey (tapered cosine) window on [0, 1]; alpha = 0 is rectangular,
/// alpha = 1 is Hann.
double tukey_window(double u, double alpha);

/// Multiplies each pixel by tukey_window((elevation + pi/2) / pi, taper).
Eigen::VectorXd apply_elevation_taper(const Eigen::VectorXd& x, const Tessellation& tess,
                                      double taper_factor);

/// Up to cfg.k directions from a (tapered, nonnegative) map:
///  1. the cfg.top_pixels largest positive pixels (ties to lower index);
///  2. intensity-weighted spherical K-means over their unit vectors, seeded
///     by farthest-point selection from the brightest pixel;
///  3. clusters with a member farther than reject_radius from the centroid
///     are dropped;
///  4. centroid pairs within merge_radius are merged (weighted) until none
///     remain.
/// Estimates are ordered by total cluster intensity, brightest first.
DoAFrame extract_doas(const Eigen::VectorXd& x, const Tessellation& tess,
                      const ExtractorConfig& cfg, std::int64_t frame_index = 0);

/// aggregate_bands -> apply_elevation_taper -> extract_doas, frame by frame.
Trajectory localize_recording(const std::vector<IntensityMap>& maps, const Tessellation& tess,
                              const ExtractorConfig& cfg, unsigned threads = 1);

}  // namespace sphericam

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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sphericam/common.hpp"

namespace sphericam {

/// Channel positions of a microphone array, in meters relative to the array
/// center. Immutable after construction.
class ArrayGeometry {
 public:
  /// Throws std::invalid_argument unless there are at least two finite,
  /// pairwise distinct positions and a positive speed of sound.
  ArrayGeometry(std::string name, std::vector<Vec3> positions,
                double speed_of_sound = kDefaultSpeedOfSound);

  const std::string& name() const { return name_; }
  const std::vector<Vec3>& positions() const { return positions_; }
  const Vec3& position(std::size_t channel) const { return positions_.at(channel); }
  std::size_t channel_count() const { return positions_.size(); }
  double speed_of_sound() const { return speed_of_sound_; }

  ArrayGeometry with_speed_of_sound(double c) const;

 private:
  std::string name_;
  std::vector<Vec3> positions_;
  double speed_of_sound_;
};

/// Parses a capsule table: one "index azimuth_deg elevation_deg radius_m"
/// line per channel, '#' comments and blank lines ignored. Indices must run
/// 1..M in order.
ArrayGeometry parse_capsule_table(std::string_view text, std::string name);

ArrayGeometry load_capsule_table(const std::filesystem::path& path);

/// The 32-capsule em32 spherical array, read from the bundled capsule table.
ArrayGeometry eigenmike_geometry();

/// Raw text of the bundled em32 capsule table.
std::string_view eigenmike_capsule_table();

/// Channel numbers (one-based) of the em32 capsules that form a tetrahedron.
inline constexpr int kTetrahedralChannels[4] = {6, 10, 22, 26};

/// Selects channels by one-based index, keeping the given order. The name
/// of the result records the mapping, e.g. "em32[6,10,22,26]".
/// Throws std::invalid_argument naming the offending index when an index is
/// out of range or repeated.
ArrayGeometry channel_subset(const ArrayGeometry& geom, std::span<const int> channel_indices);

/// channel_subset restricted to exactly four indices.
ArrayGeometry tetrahedral_subset(const ArrayGeometry& geom, std::span<const int> channel_indices);

}  // namespace sphericam

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
#include <vector>

#include "sphericam/common.hpp"

namespace sphericam {

/// Near-uniform sampling of the unit sphere; the pixel grid of an intensity
/// map.
struct Tessellation {
  std::vector<Vec3> directions;
  std::vector<double> elevations;  // radians, [-pi/2, pi/2]
  std::vector<double> azimuths;    // radians, [-pi, pi)

  std::size_t size() const { return directions.size(); }

  /// Index of the direction closest (great-circle) to v; lowest index on ties.
  std::size_t nearest(const Vec3& v) const;
};

/// Spherical Fibonacci lattice with n_points directions:
/// z_i = 1 - (2i + 1) / n, azimuth_i = i * golden angle.
/// Throws std::invalid_argument for n_points < 12.
Tessellation build_tessellation(std::size_t n_points);

/// Great-circle distance (radians) from each direction to its nearest
/// neighbour. O(N^2).
std::vector<double> nearest_neighbor_distances(const Tessellation& tess);

}  // namespace sphericam

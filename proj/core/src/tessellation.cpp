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

#include "sphericam/tessellation.hpp"

#include <limits>
#include <string>

namespace sphericam {

std::size_t Tessellation::nearest(const Vec3& v) const {
  std::size_t best = 0;
  double best_dot = -std::numeric_limits<double>::infinity();
  const Vec3 u = v.normalized();
  for (std::size_t i = 0; i < directions.size(); ++i) {
    const double d = directions[i].dot(u);
    if (d > best_dot) {
      best_dot = d;
      best = i;
    }
  }
  return best;
}

Tessellation build_tessellation(std::size_t n_points) {
  if (n_points < 12)
    throw std::invalid_argument("tessellation needs at least 12 points, got " +
                                std::to_string(n_points));
  const double golden_angle = kPi * (3.0 - std::sqrt(5.0));
  const double n = static_cast<double>(n_points);

  Tessellation tess;
  tess.directions.reserve(n_points);
  tess.elevations.reserve(n_points);
  tess.azimuths.reserve(n_points);
  for (std::size_t i = 0; i < n_points; ++i) {
    const double z = 1.0 - (2.0 * static_cast<double>(i) + 1.0) / n;
    const double az = wrap_pi(golden_angle * static_cast<double>(i));
    const double el = std::asin(z);
    Vec3 d = unit_from_azel(az, el);
    d.normalize();
    tess.directions.push_back(d);
    tess.elevations.push_back(el);
    tess.azimuths.push_back(az);
  }
  return tess;
}

std::vector<double> nearest_neighbor_distances(const Tessellation& tess) {
  const std::size_t n = tess.size();
  std::vector<double> out(n, std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) out[i] = std::min(out[i], angle_between(tess.directions[i], tess.directions[j]));
  return out;
}

}  // namespace sphericam

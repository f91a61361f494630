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

#include "sphericam/geometry.hpp"

#include <fstream>
#include <sstream>

namespace sphericam {

ArrayGeometry::ArrayGeometry(std::string name, std::vector<Vec3> positions,
                             double speed_of_sound)
    : name_(std::move(name)), positions_(std::move(positions)),
      speed_of_sound_(speed_of_sound) {
  if (positions_.size() < 2)
    throw std::invalid_argument("array geometry needs at least 2 channels, got " +
                                std::to_string(positions_.size()));
  if (!(speed_of_sound_ > 0.0) || !std::isfinite(speed_of_sound_))
    throw std::invalid_argument("speed of sound must be positive and finite");
  for (std::size_t i = 0; i < positions_.size(); ++i) {
    if (!positions_[i].allFinite())
      throw std::invalid_argument("channel " + std::to_string(i + 1) +
                                  " has a non-finite position");
    for (std::size_t j = 0; j < i; ++j) {
      if (positions_[i] == positions_[j])
        throw std::invalid_argument("channels " + std::to_string(j + 1) + " and " +
                                    std::to_string(i + 1) + " share a position");
    }
  }
}

ArrayGeometry ArrayGeometry::with_speed_of_sound(double c) const {
  return ArrayGeometry(name_, positions_, c);
}

ArrayGeometry parse_capsule_table(std::string_view text, std::string name) {
  std::vector<Vec3> positions;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    int index = 0;
    double az = 0.0, el = 0.0, radius = 0.0;
    if (!(fields >> index)) continue;  // blank
    if (!(fields >> az >> el >> radius))
      throw FormatError("capsule table line " + std::to_string(line_no) +
                        ": expected 'index azimuth_deg elevation_deg radius_m'");
    std::string extra;
    if (fields >> extra)
      throw FormatError("capsule table line " + std::to_string(line_no) +
                        ": trailing field '" + extra + "'");
    if (index != static_cast<int>(positions.size()) + 1)
      throw FormatError("capsule table line " + std::to_string(line_no) + ": index " +
                        std::to_string(index) + " out of sequence");
    if (el < -90.0 || el > 90.0 || !(radius >= 0.0))
      throw FormatError("capsule table line " + std::to_string(line_no) +
                        ": elevation or radius out of range");
    positions.push_back(radius * unit_from_azel(deg2rad(az), deg2rad(el)));
  }
  return ArrayGeometry(std::move(name), std::move(positions));
}

ArrayGeometry load_capsule_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open capsule table " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_capsule_table(buf.str(), path.stem().string());
}

ArrayGeometry eigenmike_geometry() {
  return parse_capsule_table(eigenmike_capsule_table(), "em32");
}

ArrayGeometry channel_subset(const ArrayGeometry& geom, std::span<const int> channel_indices) {
  const int m = static_cast<int>(geom.channel_count());
  std::vector<Vec3> positions;
  std::string label = geom.name() + "[";
  for (std::size_t i = 0; i < channel_indices.size(); ++i) {
    const int idx = channel_indices[i];
    if (idx < 1 || idx > m)
      throw std::invalid_argument("channel index " + std::to_string(idx) +
                                  " out of range 1.." + std::to_string(m));
    for (std::size_t j = 0; j < i; ++j)
      if (channel_indices[j] == idx)
        throw std::invalid_argument("duplicate channel index " + std::to_string(idx));
    positions.push_back(geom.position(static_cast<std::size_t>(idx - 1)));
    label += (i ? "," : "") + std::to_string(idx);
  }
  label += "]";
  return ArrayGeometry(std::move(label), std::move(positions), geom.speed_of_sound());
}

ArrayGeometry tetrahedral_subset(const ArrayGeometry& geom, std::span<const int> channel_indices) {
  if (channel_indices.size() != 4)
    throw std::invalid_argument("tetrahedral subset needs exactly 4 indices, got " +
                                std::to_string(channel_indices.size()));
  return channel_subset(geom, channel_indices);
}

}  // namespace sphericam

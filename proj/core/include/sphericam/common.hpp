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

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace sphericam {

using Vec3 = Eigen::Vector3d;

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or truncated file content.
class FormatError : public Error {
 public:
  using Error::Error;
};

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kDefaultSpeedOfSound = 343.0;
inline constexpr double kFrameSeconds = 0.1;

constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }

/// Great-circle angle in radians between two (not necessarily unit) vectors.
/// Uses atan2 of cross and dot, which stays accurate near 0 and pi.
inline double angle_between(const Vec3& a, const Vec3& b) {
  return std::atan2(a.cross(b).norm(), a.dot(b));
}

/// Unit vector for azimuth/elevation in radians. Azimuth is measured from +x
/// toward +y, elevation from the xy-plane toward +z.
inline Vec3 unit_from_azel(double azimuth, double elevation) {
  const double ce = std::cos(elevation);
  return {ce * std::cos(azimuth), ce * std::sin(azimuth), std::sin(elevation)};
}

/// Wraps an angle in radians to [-pi, pi).
inline double wrap_pi(double a) {
  double w = std::fmod(a + kPi, 2.0 * kPi);
  if (w < 0.0) w += 2.0 * kPi;
  return w - kPi;
}

/// Azimuth in [-pi, pi) of a direction.
inline double azimuth_of(const Vec3& v) {
  const double az = std::atan2(v.y(), v.x());
  return az >= kPi ? az - 2.0 * kPi : az;
}

/// Elevation in [-pi/2, pi/2] of a direction.
inline double elevation_of(const Vec3& v) {
  return std::atan2(v.z(), std::hypot(v.x(), v.y()));
}

}  // namespace sphericam

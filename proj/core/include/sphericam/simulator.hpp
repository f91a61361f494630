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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sphericam/doa.hpp"
#include "sphericam/geometry.hpp"
#include "sphericam/wav.hpp"

namespace sphericam {

struct Breakpoint {
  double time = 0.0;  // seconds
  double azimuth_deg = 0.0;
  double elevation_deg = 0.0;
};

struct SourceSignal {
  enum class Kind { kWhite, kPink, kTone, kFile };
  Kind kind = Kind::kWhite;
  double frequency = 1000.0;   // kTone
  std::filesystem::path path;  // kFile, mono (first channel used) at the scene rate
};

struct SourceSpec {
  SourceSignal signal;
  std::vector<Breakpoint> trajectory;  // time-sorted, at least one
  double onset = 0.0;                  // seconds
  std::optional<double> offset;        // seconds, default end of scene
  double level_db = 0.0;               // relative to unit RMS
};

struct SceneSpec {
  double duration = 1.0;  // seconds
  std::vector<SourceSpec> sources;
  std::optional<double> noise_snr_db;
  double sample_rate = 24000.0;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument naming the offending source/breakpoint.
  void validate() const;
};

/// Direction of a source trajectory at time t: linear in azimuth (unwrapped
/// across +-180) and elevation, held constant outside the breakpoints.
Breakpoint interpolate_trajectory(const std::vector<Breakpoint>& trajectory, double t);

/// Scene description as JSON:
/// { "duration": 2.0, "sample_rate": 24000, "seed": 7, "noise_snr_db": 20,
///   "sources": [ { "signal": "white" | "pink" | {"tone": 440} | {"file": "x.wav"},
///                  "trajectory": [[t, az, el], ...], "onset": 0, "offset": 2,
///                  "level_db": 0 } ] }
/// Relative file paths resolve against base_dir.
SceneSpec parse_scene(std::string_view json_text, const std::filesystem::path& base_dir = {});
SceneSpec load_scene(const std::filesystem::path& path);

struct Simulation {
  Audio audio;
  Trajectory annotations;  // one frame per complete 100 ms block
};

/// Free-field plane-wave rendering. Each source is generated at unit RMS,
/// scaled by its level, gated by onset/offset, and per 100 ms block its
/// spectrum is phased by exp(+j w <p_m, r> / c) for the block-centre
/// direction r, which makes the steering vectors of the imaging module the
/// exact array response. Optional white noise is added per channel at
/// noise_snr_db relative to the mean signal power. Deterministic for a seed.
Simulation simulate(const SceneSpec& spec, const ArrayGeometry& geom);

/// Annotation CSV: "frame,source_id,azimuth_deg,elevation_deg" with an
/// optional trailing ",confidence" column; one row per detection, LF line
/// endings.
std::string format_annotations(const Trajectory& frames, bool with_confidence = false);
void write_annotations(const Trajectory& frames, const std::filesystem::path& path,
                       bool with_confidence = false);

/// Throws FormatError with the 1-based line number of a malformed row.
/// Frames are returned in ascending frame order.
Trajectory parse_annotations(std::string_view text);
Trajectory read_annotations(const std::filesystem::path& path);

}  // namespace sphericam

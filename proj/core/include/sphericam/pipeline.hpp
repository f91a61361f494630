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
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sphericam/doa.hpp"
#include "sphericam/geometry.hpp"
#include "sphericam/imaging.hpp"
#include "sphericam/laplacian.hpp"
#include "sphericam/sigproc.hpp"
#include "sphericam/tessellation.hpp"
#include "sphericam/upsampler.hpp"
#include "sphericam/wav.hpp"

namespace sphericam {

/// An error tagged with the pipeline stage that raised it.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& message)
      : Error(stage + ": " + message), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

/// Runs fn(), rethrowing any std::exception as a StageError for `stage`.
template <typename Fn>
auto run_stage(const std::string& stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

/// Settings for the image/localize/evaluate chain.
///
/// Text form is one "key = value" per line, '#' starts a comment:
///   array = eigenmike            # or a capsule-table path
///   subset = 6,10,22,26          # optional one-based channel selection
///   sample_rate = 24000
///   bands = 9
///   f_low = 1500
///   f_high = 4500
///   tessellation = 242
///   k_neighbors = 8
///   params = analytic            # analytic (alias default) | dasb | DWPM file
///   bias_radius_deg = 13         # analytic bias radius
///   normalize = spectral         # spectral | trace | none
///   spectral_exponent = 1
///   spectral_knee = 0.05
///   upsample = false
///   upsample_target = eigenmike  # target array of the upsampler
///   upsample_iterations = 20000
///   k = 3
///   top_pixels = 15
///   taper = 0.8
///   reject_radius_deg = 15
///   merge_radius_deg = 15
///   threshold_deg = 20
///   speed_of_sound = 343
///   input = ...                  # optional default paths
///   output = ...
struct PipelineConfig {
  std::string array = "eigenmike";
  std::vector<int> subset;
  double sample_rate = 24000.0;
  std::size_t bands = 9;
  double f_low = 1500.0;
  double f_high = 4500.0;
  std::size_t tessellation = 242;
  std::size_t k_neighbors = 8;
  std::string params = "analytic";
  double bias_radius_deg = 13.0;
  std::string normalize = "spectral";
  double spectral_exponent = 1.0;
  double spectral_knee = 0.05;
  bool upsample = false;
  std::string upsample_target = "eigenmike";
  std::size_t upsample_iterations = UpsamplerOptions{}.max_iterations;
  ExtractorConfig extractor;
  double threshold_deg = 20.0;
  double speed_of_sound = kDefaultSpeedOfSound;
  std::string input;
  std::string output;
};

/// Throws FormatError (with line number) on syntax errors, unknown keys or
/// unparsable values, and std::invalid_argument on out-of-range values.
PipelineConfig parse_config(std::string_view text);
PipelineConfig load_config(const std::filesystem::path& path);

/// "eigenmike"/"em32" or a capsule-table path.
ArrayGeometry resolve_array(const std::string& spec, double speed_of_sound = kDefaultSpeedOfSound);

/// Fully resolved processing chain for one configuration. Immutable after
/// construction; image() and localize() may be called repeatedly.
class Pipeline {
 public:
  explicit Pipeline(const PipelineConfig& config);

  /// Covariances per frame after channel selection, optional upsampling and
  /// normalisation; matrices match the imaging geometry.
  std::vector<CovarianceFrame> covariances(const Audio& audio, unsigned threads = 1) const;

  std::vector<IntensityMap> image(const Audio& audio, unsigned threads = 1) const;
  Trajectory localize(const Audio& audio, unsigned threads = 1) const;
  Trajectory localize_maps(const std::vector<IntensityMap>& maps, unsigned threads = 1) const;

  const PipelineConfig& config() const { return config_; }
  const ArrayGeometry& input_geometry() const { return *input_geometry_; }
  const ArrayGeometry& imaging_geometry() const { return *imaging_geometry_; }
  const Tessellation& tessellation() const { return tessellation_; }
  const BandPlan& band_plan() const { return plan_; }
  const ImagingEngine& engine() const { return *engine_; }
  bool upsampling() const { return upsampler_ != nullptr; }

 private:
  Audio select_channels(const Audio& audio) const;

  PipelineConfig config_;
  std::optional<ArrayGeometry> full_geometry_;
  std::optional<ArrayGeometry> input_geometry_;
  std::optional<ArrayGeometry> imaging_geometry_;
  std::vector<int> subset_;
  Tessellation tessellation_;
  BandPlan plan_;
  std::unique_ptr<ImagingEngine> engine_;
  std::unique_ptr<CovarianceUpsampler> upsampler_;
};

}  // namespace sphericam

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

#include "sphericam/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "sphericam/parallel.hpp"

namespace sphericam {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_value(const std::string& text) {
  T v{};
  const char* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end) throw std::invalid_argument("bad number '" + text + "'");
  return v;
}

bool parse_bool(const std::string& text) {
  if (text == "true" || text == "on" || text == "yes" || text == "1") return true;
  if (text == "false" || text == "off" || text == "no" || text == "0") return false;
  throw std::invalid_argument("bad boolean '" + text + "'");
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) out.push_back(parse_value<int>(trim(item)));
  return out;
}

}  // namespace

PipelineConfig parse_config(std::string_view text) {
  PipelineConfig cfg;
  using Setter = std::function<void(const std::string&)>;
  const std::map<std::string, Setter> setters = {
      {"array", [&](const std::string& v) { cfg.array = v; }},
      {"subset", [&](const std::string& v) { cfg.subset = v.empty() ? std::vector<int>{} : parse_int_list(v); }},
      {"sample_rate", [&](const std::string& v) { cfg.sample_rate = parse_value<double>(v); }},
      {"bands", [&](const std::string& v) { cfg.bands = parse_value<std::size_t>(v); }},
      {"f_low", [&](const std::string& v) { cfg.f_low = parse_value<double>(v); }},
      {"f_high", [&](const std::string& v) { cfg.f_high = parse_value<double>(v); }},
      {"tessellation", [&](const std::string& v) { cfg.tessellation = parse_value<std::size_t>(v); }},
      {"k_neighbors", [&](const std::string& v) { cfg.k_neighbors = parse_value<std::size_t>(v); }},
      {"params", [&](const std::string& v) { cfg.params = v; }},
      {"bias_radius_deg", [&](const std::string& v) { cfg.bias_radius_deg = parse_value<double>(v); }},
      {"normalize", [&](const std::string& v) { cfg.normalize = v; }},
      {"spectral_knee", [&](const std::string& v) { cfg.spectral_knee = parse_value<double>(v); }},
      {"spectral_exponent", [&](const std::string& v) { cfg.spectral_exponent = parse_value<double>(v); }},
      {"upsample", [&](const std::string& v) { cfg.upsample = parse_bool(v); }},
      {"upsample_iterations", [&](const std::string& v) { cfg.upsample_iterations = parse_value<std::size_t>(v); }},
      {"upsample_target", [&](const std::string& v) { cfg.upsample_target = v; }},
      {"k", [&](const std::string& v) { cfg.extractor.k = parse_value<std::size_t>(v); }},
      {"top_pixels", [&](const std::string& v) { cfg.extractor.top_pixels = parse_value<std::size_t>(v); }},
      {"taper", [&](const std::string& v) { cfg.extractor.taper_factor = parse_value<double>(v); }},
      {"reject_radius_deg", [&](const std::string& v) { cfg.extractor.reject_radius_deg = parse_value<double>(v); }},
      {"merge_radius_deg", [&](const std::string& v) { cfg.extractor.merge_radius_deg = parse_value<double>(v); }},
      {"threshold_deg", [&](const std::string& v) { cfg.threshold_deg = parse_value<double>(v); }},
      {"speed_of_sound", [&](const std::string& v) { cfg.speed_of_sound = parse_value<double>(v); }},
      {"input", [&](const std::string& v) { cfg.input = v; }},
      {"output", [&](const std::string& v) { cfg.output = v; }},
  };

  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    const std::string where = "config line " + std::to_string(line_no) + ": ";
    if (eq == std::string::npos) throw FormatError(where + "expected 'key = value'");
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    const auto it = setters.find(key);
    if (it == setters.end()) throw FormatError(where + "unknown key '" + key + "'");
    try {
      it->second(value);
    } catch (const std::invalid_argument& e) {
      throw FormatError(where + key + ": " + e.what());
    }
  }

  if (!(cfg.sample_rate > 0.0)) throw std::invalid_argument("sample_rate must be positive");
  if (cfg.normalize != "spectral" && cfg.normalize != "trace" && cfg.normalize != "none")
    throw std::invalid_argument("normalize must be spectral, trace or none");
  if (!(cfg.spectral_exponent > 0.0)) throw std::invalid_argument("spectral_exponent must be positive");
  if (!(cfg.spectral_knee > 0.0 && cfg.spectral_knee <= 1.0))
    throw std::invalid_argument("spectral_knee must be in (0, 1]");
  if (!(cfg.bias_radius_deg > 0.0 && cfg.bias_radius_deg < 180.0))
    throw std::invalid_argument("bias_radius_deg must be in (0, 180)");
  if (cfg.upsample_iterations == 0) throw std::invalid_argument("upsample_iterations must be positive");
  if (cfg.threshold_deg < 0.0) throw std::invalid_argument("threshold_deg must be nonnegative");
  if (!(cfg.speed_of_sound > 0.0)) throw std::invalid_argument("speed_of_sound must be positive");
  cfg.extractor.validate();
  return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

ArrayGeometry resolve_array(const std::string& spec, double speed_of_sound) {
  if (spec == "eigenmike" || spec == "em32") return eigenmike_geometry().with_speed_of_sound(speed_of_sound);
  if (!std::filesystem::exists(spec))
    throw std::invalid_argument("array '" + spec + "' is neither a builtin name nor an existing file");
  return load_capsule_table(spec).with_speed_of_sound(speed_of_sound);
}

Pipeline::Pipeline(const PipelineConfig& config) : config_(config) {
  run_stage("geometry", [&] {
    full_geometry_ = resolve_array(config_.array, config_.speed_of_sound);
    subset_ = config_.subset;
    if (config_.upsample && subset_.empty() && full_geometry_->channel_count() == 32)
      subset_.assign(std::begin(kTetrahedralChannels), std::end(kTetrahedralChannels));
    input_geometry_ = subset_.empty() ? *full_geometry_ : channel_subset(*full_geometry_, subset_);
    imaging_geometry_ = config_.upsample
                            ? resolve_array(config_.upsample_target, config_.speed_of_sound)
                            : *input_geometry_;
    tessellation_ = build_tessellation(config_.tessellation);
  });
  run_stage("sigproc", [&] {
    plan_ = make_band_plan(config_.bands, config_.f_low, config_.f_high, config_.sample_rate);
  });
  if (config_.upsample) {
    run_stage("upsample", [&] {
      UpsamplerOptions options;
      options.max_iterations = config_.upsample_iterations;
      upsampler_ = std::make_unique<NnlsUpsampler>(*input_geometry_, *imaging_geometry_, tessellation_,
                                                   plan_, options);
    });
  }
  run_stage("imaging", [&] {
    DeepWaveParams params;
    if (config_.params == "analytic" || config_.params == "default")
      params = analytic_params(*imaging_geometry_, tessellation_, plan_, config_.bias_radius_deg);
    else if (config_.params == "dasb")
      params = default_params(*imaging_geometry_, tessellation_, plan_);
    else
      params = load_params(config_.params);
    if (params.band_count() != plan_.band_count() ||
        params.channel_count() != static_cast<Eigen::Index>(imaging_geometry_->channel_count()) ||
        params.pixel_count() != static_cast<Eigen::Index>(tessellation_.size()))
      throw std::invalid_argument("parameter file has F=" + std::to_string(params.band_count()) +
                                  " M=" + std::to_string(params.channel_count()) +
                                  " N=" + std::to_string(params.pixel_count()) + ", configuration needs F=" +
                                  std::to_string(plan_.band_count()) +
                                  " M=" + std::to_string(imaging_geometry_->channel_count()) +
                                  " N=" + std::to_string(tessellation_.size()));
    engine_ = std::make_unique<ImagingEngine>(std::move(params),
                                              build_graph_laplacian(tessellation_, config_.k_neighbors));
  });
}

Audio Pipeline::select_channels(const Audio& audio) const {
  const auto channels = static_cast<std::size_t>(audio.channel_count());
  if (channels == input_geometry_->channel_count()) return audio;
  if (!subset_.empty() && channels == full_geometry_->channel_count()) {
    Audio out;
    out.sample_rate = audio.sample_rate;
    out.samples.resize(static_cast<Eigen::Index>(subset_.size()), audio.frame_count());
    for (std::size_t i = 0; i < subset_.size(); ++i)
      out.samples.row(static_cast<Eigen::Index>(i)) = audio.samples.row(subset_[i] - 1);
    return out;
  }
  throw std::invalid_argument("audio has " + std::to_string(channels) + " channels, array '" +
                              input_geometry_->name() + "' has " +
                              std::to_string(input_geometry_->channel_count()));
}

std::vector<CovarianceFrame> Pipeline::covariances(const Audio& audio, unsigned threads) const {
  const Audio selected = run_stage("sigproc", [&] { return select_channels(audio); });
  auto frames = run_stage("sigproc", [&] { return band_covariances(selected, plan_, threads); });
  if (upsampler_) {
    run_stage("upsample", [&] {
      parallel_for(frames.size(), threads, [&](std::size_t i) {
        frames[i].bands = upsampler_->upsample(frames[i].bands).covariances;
      });
    });
  }
  if (config_.normalize == "spectral")
    for (auto& f : frames) normalize_spectral(f, config_.spectral_exponent, config_.spectral_knee);
  else if (config_.normalize == "trace")
    for (auto& f : frames) normalize_trace(f);
  return frames;
}

std::vector<IntensityMap> Pipeline::image(const Audio& audio, unsigned threads) const {
  const auto frames = covariances(audio, threads);
  return run_stage("imaging", [&] {
    std::vector<IntensityMap> maps(frames.size());
    parallel_for(frames.size(), threads, [&](std::size_t i) { maps[i] = engine_->forward(frames[i]); });
    return maps;
  });
}

Trajectory Pipeline::localize_maps(const std::vector<IntensityMap>& maps, unsigned threads) const {
  return run_stage("doa", [&] { return localize_recording(maps, tessellation_, config_.extractor, threads); });
}

Trajectory Pipeline::localize(const Audio& audio, unsigned threads) const {
  return localize_maps(image(audio, threads), threads);
}

}  // namespace sphericam

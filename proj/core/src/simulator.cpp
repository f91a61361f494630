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

#include "sphericam/simulator.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <complex>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>
#include <unsupported/Eigen/FFT>

namespace sphericam {
namespace {

double wrap180(double deg) { return rad2deg(wrap_pi(deg2rad(deg))); }

std::vector<double> unit_rms(std::vector<double> x) {
  double power = 0.0;
  for (double v : x) power += v * v;
  power /= static_cast<double>(std::max<std::size_t>(1, x.size()));
  if (power > 0.0) {
    const double g = 1.0 / std::sqrt(power);
    for (double& v : x) v *= g;
  }
  return x;
}

std::vector<double> generate_signal(const SourceSignal& sig, std::size_t length, double rate,
                                    std::mt19937_64& rng) {
  std::vector<double> x(length, 0.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  switch (sig.kind) {
    case SourceSignal::Kind::kWhite:
      for (double& v : x) v = normal(rng);
      return x;
    case SourceSignal::Kind::kPink: {
      // Paul Kellet's refined pink filter.
      double b0 = 0, b1 = 0, b2 = 0, b3 = 0, b4 = 0, b5 = 0, b6 = 0;
      for (double& v : x) {
        const double w = normal(rng);
        b0 = 0.99886 * b0 + w * 0.0555179;
        b1 = 0.99332 * b1 + w * 0.0750759;
        b2 = 0.96900 * b2 + w * 0.1538520;
        b3 = 0.86650 * b3 + w * 0.3104856;
        b4 = 0.55000 * b4 + w * 0.5329522;
        b5 = -0.7616 * b5 - w * 0.0168980;
        v = b0 + b1 + b2 + b3 + b4 + b5 + b6 + w * 0.5362;
        b6 = w * 0.115926;
      }
      return unit_rms(std::move(x));
    }
    case SourceSignal::Kind::kTone:
      for (std::size_t t = 0; t < length; ++t)
        x[t] = std::sqrt(2.0) * std::sin(2.0 * kPi * sig.frequency * static_cast<double>(t) / rate);
      return x;
    case SourceSignal::Kind::kFile: {
      const Audio a = read_wav(sig.path);
      if (a.sample_rate != rate)
        throw std::invalid_argument("signal file " + sig.path.string() + " is at " +
                                    std::to_string(a.sample_rate) + " Hz, scene is at " +
                                    std::to_string(rate) + " Hz");
      const auto n = std::min<std::size_t>(length, static_cast<std::size_t>(a.frame_count()));
      for (std::size_t t = 0; t < n; ++t) x[t] = a.samples(0, static_cast<Eigen::Index>(t));
      return unit_rms(std::move(x));
    }
  }
  return x;
}

std::string shortest(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

}  // namespace

void SceneSpec::validate() const {
  if (!(duration > 0.0) || !std::isfinite(duration))
    throw std::invalid_argument("scene duration must be positive");
  if (!(sample_rate > 0.0)) throw std::invalid_argument("scene sample rate must be positive");
  for (std::size_t s = 0; s < sources.size(); ++s) {
    const auto& src = sources[s];
    const std::string where = "source " + std::to_string(s) + ": ";
    if (src.trajectory.empty()) throw std::invalid_argument(where + "empty trajectory");
    for (std::size_t b = 0; b < src.trajectory.size(); ++b) {
      const auto& bp = src.trajectory[b];
      const std::string at = where + "breakpoint " + std::to_string(b) + ": ";
      if (bp.time < 0.0 || bp.time > duration)
        throw std::invalid_argument(at + "time " + shortest(bp.time) + " s outside scene duration " +
                                    shortest(duration) + " s");
      if (b > 0 && bp.time < src.trajectory[b - 1].time)
        throw std::invalid_argument(at + "breakpoints are not time-sorted");
      if (bp.elevation_deg < -90.0 || bp.elevation_deg > 90.0)
        throw std::invalid_argument(at + "elevation outside [-90, 90]");
      if (!std::isfinite(bp.azimuth_deg)) throw std::invalid_argument(at + "non-finite azimuth");
    }
    if (src.onset < 0.0 || (src.offset && *src.offset <= src.onset))
      throw std::invalid_argument(where + "onset/offset out of order");
    if (src.signal.kind == SourceSignal::Kind::kTone &&
        !(src.signal.frequency > 0.0 && src.signal.frequency < 0.5 * sample_rate))
      throw std::invalid_argument(where + "tone frequency must be in (0, Nyquist)");
    if (src.signal.kind == SourceSignal::Kind::kFile && !std::filesystem::exists(src.signal.path))
      throw std::invalid_argument(where + "signal file not found: " + src.signal.path.string());
  }
}

Breakpoint interpolate_trajectory(const std::vector<Breakpoint>& traj, double t) {
  if (traj.empty()) throw std::invalid_argument("empty trajectory");
  if (t <= traj.front().time) return {t, wrap180(traj.front().azimuth_deg), traj.front().elevation_deg};
  if (t >= traj.back().time) return {t, wrap180(traj.back().azimuth_deg), traj.back().elevation_deg};
  const auto hi = std::upper_bound(traj.begin(), traj.end(), t,
                                   [](double v, const Breakpoint& b) { return v < b.time; });
  const auto lo = hi - 1;
  const double span = hi->time - lo->time;
  const double a = span > 0.0 ? (t - lo->time) / span : 1.0;
  const double daz = wrap180(hi->azimuth_deg - lo->azimuth_deg);
  return {t, wrap180(lo->azimuth_deg + a * daz),
          lo->elevation_deg + a * (hi->elevation_deg - lo->elevation_deg)};
}

SceneSpec parse_scene(std::string_view json_text, const std::filesystem::path& base_dir) {
  SceneSpec spec;
  try {
    const auto j = nlohmann::json::parse(json_text);
    spec.duration = j.at("duration").get<double>();
    spec.sample_rate = j.value("sample_rate", 24000.0);
    spec.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("noise_snr_db") && !j["noise_snr_db"].is_null())
      spec.noise_snr_db = j["noise_snr_db"].get<double>();
    for (const auto& js : j.at("sources")) {
      SourceSpec src;
      const auto& sig = js.at("signal");
      if (sig.is_string()) {
        const auto name = sig.get<std::string>();
        if (name == "white") src.signal.kind = SourceSignal::Kind::kWhite;
        else if (name == "pink") src.signal.kind = SourceSignal::Kind::kPink;
        else throw std::invalid_argument("unknown builtin signal '" + name + "'");
      } else if (sig.contains("tone")) {
        src.signal.kind = SourceSignal::Kind::kTone;
        src.signal.frequency = sig["tone"].get<double>();
      } else if (sig.contains("file")) {
        src.signal.kind = SourceSignal::Kind::kFile;
        std::filesystem::path p = sig["file"].get<std::string>();
        src.signal.path = p.is_relative() ? base_dir / p : p;
      } else {
        throw std::invalid_argument("signal must be \"white\", \"pink\", {\"tone\": f} or {\"file\": path}");
      }
      for (const auto& bp : js.at("trajectory"))
        src.trajectory.push_back({bp.at(0).get<double>(), bp.at(1).get<double>(), bp.at(2).get<double>()});
      src.onset = js.value("onset", 0.0);
      if (js.contains("offset") && !js["offset"].is_null()) src.offset = js["offset"].get<double>();
      src.level_db = js.value("level_db", 0.0);
      spec.sources.push_back(std::move(src));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("scene file: ") + e.what());
  }
  spec.validate();
  return spec;
}

SceneSpec load_scene(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open scene file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scene(buf.str(), path.parent_path());
}

Simulation simulate(const SceneSpec& spec, const ArrayGeometry& geom) {
  spec.validate();
  const double rate = spec.sample_rate;
  const auto total = static_cast<std::size_t>(std::llround(spec.duration * rate));
  const auto block = static_cast<std::size_t>(std::llround(kFrameSeconds * rate));
  const std::size_t m = geom.channel_count();
  const double c = geom.speed_of_sound();

  Simulation sim;
  sim.audio.sample_rate = rate;
  sim.audio.samples = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(total));

  const std::size_t n_blocks = (total + block - 1) / block;
  const std::size_t n_frames = total / block;
  sim.annotations.resize(n_frames);
  for (std::size_t f = 0; f < n_frames; ++f) sim.annotations[f].frame_index = static_cast<std::int64_t>(f);

  Eigen::FFT<double> fft;
  std::vector<double> segment;
  std::vector<std::complex<double>> spectrum, shifted;
  std::vector<std::complex<double>> rendered;

  for (std::size_t s = 0; s < spec.sources.size(); ++s) {
    const SourceSpec& src = spec.sources[s];
    std::mt19937_64 rng(spec.seed * 0x9E3779B97F4A7C15ull + s + 1);
    std::vector<double> signal = generate_signal(src.signal, total, rate, rng);
    const double gain = std::pow(10.0, src.level_db / 20.0);
    const double offset = src.offset.value_or(spec.duration);
    for (std::size_t t = 0; t < total; ++t) {
      const double time = static_cast<double>(t) / rate;
      signal[t] = (time >= src.onset && time < offset) ? gain * signal[t] : 0.0;
    }

    for (std::size_t b = 0; b < n_blocks; ++b) {
      const std::size_t start = b * block;
      const std::size_t len = std::min(block, total - start);
      const double t_center = (static_cast<double>(start) + 0.5 * static_cast<double>(len)) / rate;
      const Breakpoint dir = interpolate_trajectory(src.trajectory, t_center);
      const Vec3 r = unit_from_azel(deg2rad(dir.azimuth_deg), deg2rad(dir.elevation_deg));
      if (b < n_frames && t_center >= src.onset && t_center < offset)
        sim.annotations[b].detections.push_back({r, 1.0, static_cast<int>(s)});

      segment.assign(signal.begin() + static_cast<std::ptrdiff_t>(start),
                     signal.begin() + static_cast<std::ptrdiff_t>(start + len));
      if (std::all_of(segment.begin(), segment.end(), [](double v) { return v == 0.0; })) continue;
      fft.fwd(spectrum, segment);  // full spectrum, length len
      for (std::size_t ch = 0; ch < m; ++ch) {
        // Advance of channel ch relative to the array centre.
        const double lead = geom.position(ch).dot(r) / c;
        shifted.resize(len);
        for (std::size_t k = 0; k < len; ++k) {
          const double signed_bin = k <= len / 2 ? static_cast<double>(k)
                                                 : static_cast<double>(k) - static_cast<double>(len);
          const double omega = 2.0 * kPi * signed_bin * rate / static_cast<double>(len);
          shifted[k] = (len % 2 == 0 && k == len / 2) ? std::complex<double>(0.0)
                                                      : spectrum[k] * std::polar(1.0, omega * lead);
        }
        fft.inv(rendered, shifted);
        for (std::size_t t = 0; t < len; ++t)
          sim.audio.samples(static_cast<Eigen::Index>(ch), static_cast<Eigen::Index>(start + t)) +=
              rendered[t].real();
      }
    }
  }

  if (spec.noise_snr_db && total > 0) {
    const double signal_power = sim.audio.samples.squaredNorm() / static_cast<double>(sim.audio.samples.size());
    const double sigma = std::sqrt(signal_power / std::pow(10.0, *spec.noise_snr_db / 10.0));
    std::mt19937_64 rng(spec.seed * 0x9E3779B97F4A7C15ull);
    std::normal_distribution<double> normal(0.0, sigma);
    for (Eigen::Index t = 0; t < sim.audio.samples.cols(); ++t)
      for (Eigen::Index ch = 0; ch < sim.audio.samples.rows(); ++ch) sim.audio.samples(ch, t) += normal(rng);
  }
  return sim;
}

std::string format_annotations(const Trajectory& frames, bool with_confidence) {
  std::string out = with_confidence ? "frame,source_id,azimuth_deg,elevation_deg,confidence\n"
                                    : "frame,source_id,azimuth_deg,elevation_deg\n";
  for (const auto& f : frames) {
    for (const auto& d : f.detections) {
      double az = rad2deg(azimuth_of(d.direction));
      if (az >= 180.0) az -= 360.0;
      const double el = std::clamp(rad2deg(elevation_of(d.direction)), -90.0, 90.0);
      out += std::to_string(f.frame_index) + "," + std::to_string(d.source_id) + "," + shortest(az) +
             "," + shortest(el);
      if (with_confidence) out += "," + shortest(d.confidence);
      out += "\n";
    }
  }
  return out;
}

void write_annotations(const Trajectory& frames, const std::filesystem::path& path,
                       bool with_confidence) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write annotations " + path.string());
  out << format_annotations(frames, with_confidence);
  if (!out) throw Error("write failed for " + path.string());
}

Trajectory parse_annotations(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  bool with_confidence = false;
  std::map<std::int64_t, DoAFrame> frames;

  const auto fail = [&](const std::string& why) {
    throw FormatError("annotations line " + std::to_string(line_no) + ": " + why);
  };
  const auto parse_number = [&](const std::string& field, auto& value, const char* what) {
    const char* end = field.data() + field.size();
    const auto res = std::from_chars(field.data(), end, value);
    if (res.ec != std::errc() || res.ptr != end) fail(std::string("bad ") + what + " '" + field + "'");
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1) {
      if (line == "frame,source_id,azimuth_deg,elevation_deg") continue;
      if (line == "frame,source_id,azimuth_deg,elevation_deg,confidence") {
        with_confidence = true;
        continue;
      }
      fail("unexpected header '" + line + "'");
    }
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    for (std::string field; std::getline(ss, field, ',');) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    const std::size_t expected = with_confidence ? 5 : 4;
    if (fields.size() != expected)
      fail("expected " + std::to_string(expected) + " fields, got " + std::to_string(fields.size()));
    std::int64_t frame = 0;
    int source = 0;
    double az = 0.0, el = 0.0, conf = 1.0;
    parse_number(fields[0], frame, "frame");
    parse_number(fields[1], source, "source_id");
    parse_number(fields[2], az, "azimuth");
    parse_number(fields[3], el, "elevation");
    if (with_confidence) parse_number(fields[4], conf, "confidence");
    if (frame < 0) fail("negative frame index");
    if (!(az >= -180.0 && az < 180.0)) fail("azimuth " + fields[2] + " outside [-180, 180)");
    if (!(el >= -90.0 && el <= 90.0)) fail("elevation " + fields[3] + " outside [-90, 90]");
    auto& f = frames[frame];
    f.frame_index = frame;
    f.detections.push_back({unit_from_azel(deg2rad(az), deg2rad(el)), conf, source});
  }
  if (line_no == 0) throw FormatError("annotations: missing header");

  Trajectory out;
  out.reserve(frames.size());
  for (auto& [_, f] : frames) out.push_back(std::move(f));
  return out;
}

Trajectory read_annotations(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open annotations " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_annotations(buf.str());
}

}  // namespace sphericam

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

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <system_error>
#include <vector>

#include <CLI11.hpp>

#include "sphericam/metrics.hpp"
#include "sphericam/pipeline.hpp"
#include "sphericam/sim_dump.hpp"
#include "sphericam/simulator.hpp"

namespace fs = std::filesystem;
using namespace sphericam;

namespace {

// Collects outputs under temporary names and renames them into place only
// when the whole command succeeded.
class OutputSet {
 public:
  ~OutputSet() {
    if (committed_) return;
    std::error_code ec;
    for (const auto& [tmp, final_path] : files_) fs::remove(tmp, ec);
  }

  fs::path add(const fs::path& final_path) {
    fs::path tmp = final_path;
    tmp += ".partial";
    files_.emplace_back(tmp, final_path);
    return tmp;
  }

  void commit() {
    for (const auto& [tmp, final_path] : files_) fs::rename(tmp, final_path);
    committed_ = true;
  }

 private:
  std::vector<std::pair<fs::path, fs::path>> files_;
  bool committed_ = false;
};

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
};

unsigned thread_count(const Common& common) {
  if (common.threads) return *common.threads;
  if (const char* env = std::getenv("SPHERICAM_THREADS")) {
    try {
      return static_cast<unsigned>(std::stoul(env));
    } catch (const std::exception&) {
      throw StageError("config", std::string("SPHERICAM_THREADS is not a number: '") + env + "'");
    }
  }
  return 0;
}

PipelineConfig pipeline_config(const Common& common) {
  return run_stage("config", [&] {
    return common.config_path.empty() ? PipelineConfig{} : load_config(common.config_path);
  });
}

std::string pick(const std::string& flag, const std::string& fallback, const char* what) {
  if (!flag.empty()) return flag;
  if (!fallback.empty()) return fallback;
  throw StageError("config", std::string("no ") + what + " given (flag or config key)");
}

Audio load_audio(const std::string& path) {
  return run_stage("io", [&] { return read_wav(path); });
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::string scene;
  std::string array = "eigenmike";
  std::string out_dir;
};

void cmd_simulate(const Common& common, const SimulateArgs& args) {
  SceneSpec scene = run_stage("config", [&] { return load_scene(args.scene); });
  if (common.seed) scene.seed = *common.seed;
  const ArrayGeometry geom = run_stage("geometry", [&] { return resolve_array(args.array); });
  const Simulation sim = run_stage("simulator", [&] { return simulate(scene, geom); });

  run_stage("io", [&] {
    fs::create_directories(args.out_dir);
    OutputSet outputs;
    write_wav_float(outputs.add(fs::path(args.out_dir) / "audio.wav"), sim.audio);
    write_annotations(sim.annotations, outputs.add(fs::path(args.out_dir) / "annotations.csv"));
    outputs.commit();
  });
  std::cout << "simulated " << sim.audio.frame_count() << " samples x " << sim.audio.channel_count()
            << " channels, " << sim.annotations.size() << " annotated frames\n";
}

struct ImageArgs {
  std::string input;
  std::string output;
  bool render = false;
  bool upsample = false;
  std::string annotations;
  std::size_t width = 360;
};

fs::path frame_image_path(const fs::path& dump, std::int64_t frame) {
  char suffix[32];
  std::snprintf(suffix, sizeof suffix, ".frame%05lld.pgm", static_cast<long long>(frame));
  fs::path p = dump;
  p.replace_extension();
  p += suffix;
  return p;
}

void cmd_image(const Common& common, const ImageArgs& args) {
  PipelineConfig cfg = pipeline_config(common);
  if (args.upsample) cfg.upsample = true;
  const std::string input = pick(args.input, cfg.input, "input");
  const std::string output = pick(args.output, cfg.output, "output");
  std::optional<Trajectory> truth;
  if (!args.annotations.empty())
    truth = run_stage("io", [&] { return read_annotations(args.annotations); });

  const Pipeline pipeline(cfg);
  const Audio audio = load_audio(input);
  SimDump dump;
  dump.bands = static_cast<std::uint32_t>(pipeline.band_plan().band_count());
  dump.pixels = static_cast<std::uint32_t>(pipeline.tessellation().size());
  dump.frames = pipeline.image(audio, thread_count(common));

  run_stage("io", [&] {
    OutputSet outputs;
    write_sim_dump(outputs.add(output), dump);
    if (args.render) {
      for (const auto& frame : dump.frames) {
        std::vector<Vec3> markers;
        if (truth)
          for (const auto& gt : *truth)
            if (gt.frame_index == frame.frame_index)
              for (const auto& d : gt.detections) markers.push_back(d.direction);
        const GrayImage img =
            render_equirectangular(aggregate_bands(frame), pipeline.tessellation(), args.width, markers);
        write_pgm(outputs.add(frame_image_path(output, frame.frame_index)), img);
      }
    }
    outputs.commit();
  });
  std::cout << "imaged " << dump.frames.size() << " frames\n";
}

struct LocalizeArgs {
  std::string input;
  std::string output;
  bool upsample = false;
};

void cmd_localize(const Common& common, const LocalizeArgs& args) {
  PipelineConfig cfg = pipeline_config(common);
  if (args.upsample) cfg.upsample = true;
  const std::string input = pick(args.input, cfg.input, "input");
  const std::string output = pick(args.output, cfg.output, "output");

  const Pipeline pipeline(cfg);
  const Audio audio = load_audio(input);
  const Trajectory pred = pipeline.localize(audio, thread_count(common));
  run_stage("io", [&] {
    OutputSet outputs;
    write_annotations(pred, outputs.add(output), true);
    outputs.commit();
  });
  std::size_t detections = 0;
  for (const auto& f : pred) detections += f.detections.size();
  std::cout << "localized " << detections << " detections in " << pred.size() << " frames\n";
}

struct EvaluateArgs {
  std::string pred;
  std::string gt;
  std::optional<double> threshold;
  std::string output;
};

void cmd_evaluate(const Common& common, const EvaluateArgs& args) {
  const PipelineConfig cfg = pipeline_config(common);
  const double threshold = args.threshold.value_or(cfg.threshold_deg);
  const Trajectory pred = run_stage("io", [&] { return read_annotations(args.pred); });
  const Trajectory gt = run_stage("io", [&] { return read_annotations(args.gt); });
  const EvalReport report = run_stage("metrics", [&] { return evaluate(pred, gt, threshold); });
  if (!args.output.empty()) {
    run_stage("io", [&] {
      OutputSet outputs;
      const fs::path tmp = outputs.add(args.output);
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      out << report_to_json(report) << '\n';
      out.close();
      if (!out) throw Error("write failed for " + args.output);
      outputs.commit();
    });
  }
  std::cout << report_to_text(report);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spherical microphone array imaging and source localization"};
  app.require_subcommand(1);

  Common common;
  app.add_option("--config", common.config_path, "Pipeline configuration file (key = value)")
      ->check(CLI::ExistingFile);
  app.add_option("--seed", common.seed, "Override the scene seed");
  app.add_option("--threads", common.threads, "Worker threads, 0 = auto (fallback: SPHERICAM_THREADS)");

  SimulateArgs sim_args;
  auto* sim = app.add_subcommand("simulate", "Render a scene to audio.wav and annotations.csv");
  sim->add_option("scene", sim_args.scene, "Scene JSON file")->required()->check(CLI::ExistingFile);
  sim->add_option("--array", sim_args.array, "Array name or capsule table")->capture_default_str();
  sim->add_option("-o,--out", sim_args.out_dir, "Output directory")->required();

  ImageArgs img_args;
  auto* img = app.add_subcommand("image", "Compute intensity maps and write a SIM dump");
  img->add_option("input", img_args.input, "Input WAV");
  img->add_option("-o,--out", img_args.output, "Output SIM dump");
  img->add_flag("--render", img_args.render, "Also write one PGM image per frame");
  img->add_flag("--upsample", img_args.upsample, "Force the 4 to 32 channel upsampling path");
  img->add_option("--annotations", img_args.annotations, "Ground-truth CSV drawn onto rendered images");
  img->add_option("--width", img_args.width, "Rendered image width")->capture_default_str();

  LocalizeArgs loc_args;
  auto* loc = app.add_subcommand("localize", "Estimate source directions and write a CSV");
  loc->add_option("input", loc_args.input, "Input WAV");
  loc->add_option("-o,--out", loc_args.output, "Output CSV");
  loc->add_flag("--upsample", loc_args.upsample, "Force the 4 to 32 channel upsampling path");

  EvaluateArgs eval_args;
  auto* ev = app.add_subcommand("evaluate", "Score predictions against ground truth");
  ev->add_option("pred", eval_args.pred, "Predicted CSV")->required();
  ev->add_option("gt", eval_args.gt, "Ground-truth CSV")->required();
  ev->add_option("--threshold", eval_args.threshold, "Match threshold in degrees");
  ev->add_option("-o,--out", eval_args.output, "Write the report as JSON");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) cmd_simulate(common, sim_args);
    if (*img) cmd_image(common, img_args);
    if (*loc) cmd_localize(common, loc_args);
    if (*ev) cmd_evaluate(common, eval_args);
  } catch (const StageError& e) {
    std::cerr << "sphericam: " << e.stage() << " stage failed: "
              << std::string(e.what()).substr(e.stage().size() + 2) << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "sphericam: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

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
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "sphericam/doa.hpp"

namespace sphericam {

struct Assignment {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (pred, gt), ascending pred
  std::vector<std::size_t> unmatched_preds;
  std::vector<std::size_t> unmatched_gts;
  double total_cost = 0.0;  // radians, summed over pairs in ascending pred order
};

/// Minimum-cost one-to-one assignment for a rectangular cost matrix
/// (Hungarian algorithm with potentials). Matches min(rows, cols) pairs.
std::vector<std::pair<std::size_t, std::size_t>> solve_assignment(const Eigen::MatrixXd& cost);

/// Optimal assignment of predicted to ground-truth directions under
/// great-circle angle cost.
Assignment match_frame(std::span<const Vec3> preds, std::span<const Vec3> gts);

struct MatchedPair {
  std::int64_t frame_index = 0;
  std::size_t pred = 0;
  std::size_t gt = 0;
  int source_id = 0;
  double angle_deg = 0.0;
  bool true_positive = false;
};

struct EvalReport {
  std::optional<double> localization_error_deg;  // absent without true positives
  std::optional<double> localization_recall_pct;  // absent without ground truth
  double threshold_deg = 20.0;
  std::size_t true_positives = 0;
  std::size_t gt_instances = 0;
  std::size_t predictions = 0;
  std::size_t frames = 0;
  std::vector<MatchedPair> pairs;
};

/// Per frame (keyed by frame_index; a frame missing from either side is
/// empty) runs match_frame and gates pairs at threshold_deg.
/// LE = mean angle over true positives, LR = 100 * TP / ground-truth count.
/// Throws std::invalid_argument on duplicate frame indices.
EvalReport evaluate(const Trajectory& preds, const Trajectory& gts, double threshold_deg = 20.0);

std::string report_to_text(const EvalReport& report);
std::string report_to_json(const EvalReport& report);

}  // namespace sphericam

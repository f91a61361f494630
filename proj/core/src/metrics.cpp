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

#include "sphericam/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

namespace sphericam {
namespace {

// Hungarian algorithm with row/column potentials; requires rows <= cols.
// Returns, for each row, its assigned column.
std::vector<std::size_t> hungarian(const Eigen::MatrixXd& cost) {
  const auto n = static_cast<std::size_t>(cost.rows());
  const auto m = static_cast<std::size_t>(cost.cols());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<bool> used(m + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = cost(static_cast<Eigen::Index>(i0 - 1), static_cast<Eigen::Index>(j - 1)) -
                           u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> row_to_col(n, 0);
  for (std::size_t j = 1; j <= m; ++j)
    if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

std::string format_optional(const std::optional<double>& v, const char* fmt) {
  if (!v) return "absent";
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, *v);
  return buf;
}

}  // namespace

std::vector<std::pair<std::size_t, std::size_t>> solve_assignment(const Eigen::MatrixXd& cost) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  if (cost.rows() == 0 || cost.cols() == 0) return pairs;
  if (cost.rows() <= cost.cols()) {
    const auto cols = hungarian(cost);
    for (std::size_t r = 0; r < cols.size(); ++r) pairs.emplace_back(r, cols[r]);
  } else {
    const auto rows = hungarian(cost.transpose());
    for (std::size_t c = 0; c < rows.size(); ++c) pairs.emplace_back(rows[c], c);
    std::sort(pairs.begin(), pairs.end());
  }
  return pairs;
}

Assignment match_frame(std::span<const Vec3> preds, std::span<const Vec3> gts) {
  Eigen::MatrixXd cost(static_cast<Eigen::Index>(preds.size()), static_cast<Eigen::Index>(gts.size()));
  for (std::size_t i = 0; i < preds.size(); ++i)
    for (std::size_t j = 0; j < gts.size(); ++j)
      cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = angle_between(preds[i], gts[j]);

  Assignment out;
  out.pairs = solve_assignment(cost);
  std::vector<bool> pred_used(preds.size(), false), gt_used(gts.size(), false);
  for (const auto& [i, j] : out.pairs) {
    out.total_cost += cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    pred_used[i] = true;
    gt_used[j] = true;
  }
  for (std::size_t i = 0; i < preds.size(); ++i)
    if (!pred_used[i]) out.unmatched_preds.push_back(i);
  for (std::size_t j = 0; j < gts.size(); ++j)
    if (!gt_used[j]) out.unmatched_gts.push_back(j);
  return out;
}

EvalReport evaluate(const Trajectory& preds, const Trajectory& gts, double threshold_deg) {
  if (!(threshold_deg >= 0.0)) throw std::invalid_argument("threshold must be nonnegative");
  const auto index = [](const Trajectory& t, const char* what) {
    std::map<std::int64_t, const DoAFrame*> out;
    for (const auto& f : t)
      if (!out.emplace(f.frame_index, &f).second)
        throw std::invalid_argument(std::string("duplicate frame index ") +
                                    std::to_string(f.frame_index) + " in " + what);
    return out;
  };
  const auto pred_by_frame = index(preds, "predictions");
  const auto gt_by_frame = index(gts, "ground truth");
  std::map<std::int64_t, std::pair<const DoAFrame*, const DoAFrame*>> frames;
  for (const auto& [k, f] : pred_by_frame) frames[k].first = f;
  for (const auto& [k, f] : gt_by_frame) frames[k].second = f;

  EvalReport report;
  report.threshold_deg = threshold_deg;
  report.frames = frames.size();
  double error_sum = 0.0;
  for (const auto& [frame_index, pg] : frames) {
    std::vector<Vec3> p, g;
    std::vector<int> ids;
    if (pg.first)
      for (const auto& d : pg.first->detections) p.push_back(d.direction);
    if (pg.second)
      for (const auto& d : pg.second->detections) {
        g.push_back(d.direction);
        ids.push_back(d.source_id);
      }
    report.predictions += p.size();
    report.gt_instances += g.size();
    const Assignment a = match_frame(p, g);
    for (const auto& [i, j] : a.pairs) {
      MatchedPair mp;
      mp.frame_index = frame_index;
      mp.pred = i;
      mp.gt = j;
      mp.source_id = ids[j];
      mp.angle_deg = rad2deg(angle_between(p[i], g[j]));
      mp.true_positive = mp.angle_deg <= threshold_deg;
      if (mp.true_positive) {
        ++report.true_positives;
        error_sum += mp.angle_deg;
      }
      report.pairs.push_back(mp);
    }
  }
  if (report.true_positives > 0)
    report.localization_error_deg = error_sum / static_cast<double>(report.true_positives);
  if (report.gt_instances > 0)
    report.localization_recall_pct =
        100.0 * static_cast<double>(report.true_positives) / static_cast<double>(report.gt_instances);
  return report;
}

std::string report_to_text(const EvalReport& r) {
  std::ostringstream out;
  out << "localization_error_deg: " << format_optional(r.localization_error_deg, "%.6f") << "\n"
      << "localization_recall_pct: " << format_optional(r.localization_recall_pct, "%.6f") << "\n"
      << "threshold_deg: " << r.threshold_deg << "\n"
      << "true_positives: " << r.true_positives << "\n"
      << "gt_instances: " << r.gt_instances << "\n"
      << "predictions: " << r.predictions << "\n"
      << "frames: " << r.frames << "\n"
      << "# frame pred gt source_id angle_deg tp\n";
  char line[128];
  for (const auto& p : r.pairs) {
    std::snprintf(line, sizeof line, "%lld %zu %zu %d %.6f %d\n", static_cast<long long>(p.frame_index),
                  p.pred, p.gt, p.source_id, p.angle_deg, p.true_positive ? 1 : 0);
    out << line;
  }
  return out.str();
}

std::string report_to_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["localization_error_deg"] = r.localization_error_deg ? nlohmann::ordered_json(*r.localization_error_deg)
                                                         : nlohmann::ordered_json(nullptr);
  j["localization_recall_pct"] = r.localization_recall_pct
                                     ? nlohmann::ordered_json(*r.localization_recall_pct)
                                     : nlohmann::ordered_json(nullptr);
  j["threshold_deg"] = r.threshold_deg;
  j["true_positives"] = r.true_positives;
  j["gt_instances"] = r.gt_instances;
  j["predictions"] = r.predictions;
  j["frames"] = r.frames;
  auto& pairs = j["pairs"] = nlohmann::ordered_json::array();
  for (const auto& p : r.pairs)
    pairs.push_back({{"frame", p.frame_index}, {"pred", p.pred}, {"gt", p.gt},
                     {"source_id", p.source_id}, {"angle_deg", p.angle_deg},
                     {"true_positive", p.true_positive}});
  return j.dump(2) + "\n";
}

}  // namespace sphericam

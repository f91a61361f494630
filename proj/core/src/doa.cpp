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

#include "sphericam/doa.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>

#include "sphericam/parallel.hpp"

namespace sphericam {
namespace {

struct Cluster {
  Vec3 centroid;
  std::vector<std::size_t> members;  // indices into the selected pixels
  double weight = 0.0;
};

Vec3 weighted_centroid(const std::vector<Vec3>& dirs, const std::vector<double>& weights,
                       const std::vector<std::size_t>& members, const Vec3& fallback) {
  Vec3 sum = Vec3::Zero();
  for (std::size_t i : members) sum += weights[i] * dirs[i];
  const double n = sum.norm();
  return n > 0.0 ? Vec3(sum / n) : fallback;
}

}  // namespace

void ExtractorConfig::validate() const {
  if (k < 1 || k > top_pixels)
    throw std::invalid_argument("extractor k must satisfy 1 <= k <= top_pixels");
  if (!(taper_factor >= 0.0 && taper_factor <= 1.0))
    throw std::invalid_argument("taper factor must be in [0, 1]");
  for (double r : {reject_radius_deg, merge_radius_deg})
    if (!(r > 0.0 && r < 180.0)) throw std::invalid_argument("extractor radii must be in (0, 180)");
}

Eigen::VectorXd aggregate_bands(const IntensityMap& map) {
  if (map.bands.empty()) throw std::invalid_argument("intensity map has no bands");
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(map.pixel_count());
  for (const auto& b : map.bands) {
    if (b.size() != mean.size()) throw std::invalid_argument("bands differ in pixel count");
    mean += b;
  }
  mean /= static_cast<double>(map.band_count());
  return mean.cwiseMax(0.0);
}

double tukey_window(double u, double alpha) {
  if (u < 0.0 || u > 1.0) return 0.0;
  if (alpha <= 0.0) return 1.0;
  const double half = 0.5 * alpha;
  if (u < half) return 0.5 * (1.0 + std::cos(kPi * (u / half - 1.0)));
  if (u > 1.0 - half) return 0.5 * (1.0 + std::cos(kPi * ((u - 1.0) / half + 1.0)));
  return 1.0;
}

Eigen::VectorXd apply_elevation_taper(const Eigen::VectorXd& x, const Tessellation& tess,
                                      double taper_factor) {
  if (x.size() != static_cast<Eigen::Index>(tess.size()))
    throw std::invalid_argument("map has " + std::to_string(x.size()) + " pixels, tessellation " +
                                std::to_string(tess.size()));
  Eigen::VectorXd out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double u = (tess.elevations[static_cast<std::size_t>(i)] + 0.5 * kPi) / kPi;
    out(i) = x(i) * tukey_window(u, taper_factor);
  }
  return out;
}

DoAFrame extract_doas(const Eigen::VectorXd& x, const Tessellation& tess,
                      const ExtractorConfig& cfg, std::int64_t frame_index) {
  cfg.validate();
  if (x.size() != static_cast<Eigen::Index>(tess.size()))
    throw std::invalid_argument("map has " + std::to_string(x.size()) + " pixels, tessellation " +
                                std::to_string(tess.size()));
  DoAFrame frame;
  frame.frame_index = frame_index;

  // 1. brightest positive pixels
  std::vector<std::size_t> order;
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (x(i) > 0.0) order.push_back(static_cast<std::size_t>(i));
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return x(static_cast<Eigen::Index>(a)) > x(static_cast<Eigen::Index>(b)); });
  if (order.size() > cfg.top_pixels) order.resize(cfg.top_pixels);
  if (order.empty()) return frame;

  std::vector<Vec3> dirs;
  std::vector<double> weights;
  for (std::size_t idx : order) {
    dirs.push_back(tess.directions[idx]);
    weights.push_back(x(static_cast<Eigen::Index>(idx)));
  }
  const std::size_t n = dirs.size();
  const std::size_t k = std::min(cfg.k, n);

  // 2. farthest-point seeding from the brightest pixel, then Lloyd iterations
  std::vector<Vec3> centroids{dirs[0]};
  std::vector<double> min_angle(n, std::numeric_limits<double>::infinity());
  while (centroids.size() < k) {
    std::size_t best = 0;
    double best_angle = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      min_angle[i] = std::min(min_angle[i], angle_between(dirs[i], centroids.back()));
      if (min_angle[i] > best_angle) {
        best_angle = min_angle[i];
        best = i;
      }
    }
    centroids.push_back(dirs[best]);
  }

  std::vector<std::size_t> assignment(n, k);
  for (int iter = 0; iter < 100; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t best = 0;
      double best_angle = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < k; ++c) {
        const double a = angle_between(dirs[i], centroids[c]);
        if (a < best_angle) {
          best_angle = a;
          best = c;
        }
      }
      if (assignment[i] != best) {
        assignment[i] = best;
        changed = true;
      }
    }
    if (!changed) break;
    for (std::size_t c = 0; c < k; ++c) {
      std::vector<std::size_t> members;
      for (std::size_t i = 0; i < n; ++i)
        if (assignment[i] == c) members.push_back(i);
      if (!members.empty()) centroids[c] = weighted_centroid(dirs, weights, members, centroids[c]);
    }
  }

  std::vector<Cluster> clusters;
  for (std::size_t c = 0; c < k; ++c) {
    Cluster cl{centroids[c], {}, 0.0};
    for (std::size_t i = 0; i < n; ++i)
      if (assignment[i] == c) {
        cl.members.push_back(i);
        cl.weight += weights[i];
      }
    if (cl.members.empty()) continue;
    // 3. reject spread-out clusters
    const double reject = deg2rad(cfg.reject_radius_deg);
    const bool compact = std::all_of(cl.members.begin(), cl.members.end(), [&](std::size_t i) {
      return angle_between(dirs[i], cl.centroid) <= reject;
    });
    if (compact) clusters.push_back(std::move(cl));
  }

  // 4. merge close centroids, closest pair first
  const double merge = deg2rad(cfg.merge_radius_deg);
  for (;;) {
    std::size_t a = 0, b = 0;
    double closest = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < clusters.size(); ++i)
      for (std::size_t j = i + 1; j < clusters.size(); ++j) {
        const double ang = angle_between(clusters[i].centroid, clusters[j].centroid);
        if (ang < closest) {
          closest = ang;
          a = i;
          b = j;
        }
      }
    if (!(closest <= merge)) break;
    Cluster& keep = clusters[a];
    Cluster& gone = clusters[b];
    const Vec3 sum = keep.weight * keep.centroid + gone.weight * gone.centroid;
    if (sum.norm() > 0.0) keep.centroid = sum.normalized();
    keep.weight += gone.weight;
    keep.members.insert(keep.members.end(), gone.members.begin(), gone.members.end());
    clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(b));
  }

  std::stable_sort(clusters.begin(), clusters.end(),
                   [](const Cluster& l, const Cluster& r) { return l.weight > r.weight; });
  for (const auto& cl : clusters)
    frame.detections.push_back(
        {cl.centroid, cl.weight / static_cast<double>(cl.members.size()), 0});
  return frame;
}

Trajectory localize_recording(const std::vector<IntensityMap>& maps, const Tessellation& tess,
                              const ExtractorConfig& cfg, unsigned threads) {
  cfg.validate();
  Trajectory out(maps.size());
  parallel_for(maps.size(), threads, [&](std::size_t i) {
    const Eigen::VectorXd x = apply_elevation_taper(aggregate_bands(maps[i]), tess, cfg.taper_factor);
    out[i] = extract_doas(x, tess, cfg, maps[i].frame_index);
  });
  return out;
}

}  // namespace sphericam

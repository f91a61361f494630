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

#include "sphericam/laplacian.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

namespace sphericam {

GraphLaplacian build_graph_laplacian(const Tessellation& tess, std::size_t k_neighbors) {
  const std::size_t n = tess.size();
  if (k_neighbors < 1 || k_neighbors >= n)
    throw std::invalid_argument("k_neighbors must be in [1, " + std::to_string(n) + "), got " +
                                std::to_string(k_neighbors));

  // k nearest neighbours of each node, ascending distance, index tiebreak.
  std::map<std::pair<std::size_t, std::size_t>, double> edges;  // i < j -> distance
  double distance_sum = 0.0;
  std::vector<std::size_t> order;
  std::vector<double> dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) dist[j] = angle_between(tess.directions[i], tess.directions[j]);
    order.resize(n);
    std::iota(order.begin(), order.end(), 0);
    std::erase(order, i);
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k_neighbors),
                      order.end(), [&](std::size_t a, std::size_t b) {
                        return dist[a] < dist[b] || (dist[a] == dist[b] && a < b);
                      });
    for (std::size_t r = 0; r < k_neighbors; ++r) {
      const std::size_t j = order[r];
      distance_sum += dist[j];
      edges[{std::min(i, j), std::max(i, j)}] = dist[j];
    }
  }

  GraphLaplacian lap;
  lap.node_count = n;
  lap.k_neighbors = k_neighbors;
  lap.bandwidth = distance_sum / static_cast<double>(n * k_neighbors);

  std::vector<Eigen::Triplet<double>> w_triplets;
  lap.degrees = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  std::vector<std::pair<std::pair<std::size_t, std::size_t>, double>> weighted;
  weighted.reserve(edges.size());
  for (const auto& [ij, d] : edges) {
    const double ratio = d / lap.bandwidth;
    const double w = std::exp(-ratio * ratio);
    weighted.push_back({ij, w});
    lap.degrees(static_cast<Eigen::Index>(ij.first)) += w;
    lap.degrees(static_cast<Eigen::Index>(ij.second)) += w;
  }

  std::vector<Eigen::Triplet<double>> l_triplets, n_triplets;
  for (const auto& [ij, w] : weighted) {
    const auto i = static_cast<Eigen::Index>(ij.first);
    const auto j = static_cast<Eigen::Index>(ij.second);
    const double wn = w / std::sqrt(lap.degrees(i) * lap.degrees(j));
    for (auto [a, b] : {std::pair{i, j}, std::pair{j, i}}) {
      w_triplets.emplace_back(a, b, w);
      l_triplets.emplace_back(a, b, -w);
      n_triplets.emplace_back(a, b, -wn);
    }
  }
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(n); ++i) {
    l_triplets.emplace_back(i, i, lap.degrees(i));
    n_triplets.emplace_back(i, i, 1.0);
  }

  const auto ni = static_cast<Eigen::Index>(n);
  lap.weights.resize(ni, ni);
  lap.weights.setFromTriplets(w_triplets.begin(), w_triplets.end());
  lap.combinatorial.resize(ni, ni);
  lap.combinatorial.setFromTriplets(l_triplets.begin(), l_triplets.end());
  lap.normalized.resize(ni, ni);
  lap.normalized.setFromTriplets(n_triplets.begin(), n_triplets.end());

  double bound = 0.0;
  for (Eigen::Index r = 0; r < ni; ++r) {
    double row = 0.0;
    for (SparseMatrix::InnerIterator it(lap.normalized, r); it; ++it) row += std::abs(it.value());
    bound = std::max(bound, row);
  }
  lap.lambda_bound = bound;

  SparseMatrix identity(ni, ni);
  identity.setIdentity();
  lap.rescaled = (2.0 / bound) * lap.normalized - identity;
  lap.rescaled.makeCompressed();
  return lap;
}

}  // namespace sphericam

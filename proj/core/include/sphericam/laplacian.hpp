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

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "sphericam/tessellation.hpp"

namespace sphericam {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Neighbourhood graph on a tessellation.
///
/// The graph is the union of each point's k nearest neighbours (great-circle
/// distance) with Gaussian weights exp(-(d / sigma)^2), sigma being the mean
/// k-NN distance. Three matrices are kept:
///   combinatorial  L = D - W
///   normalized     I - D^-1/2 W D^-1/2       (spectrum in [0, 2])
///   rescaled       2 * normalized / lambda_bound - I   (spectrum in [-1, 1])
/// where lambda_bound is the Gershgorin bound on the normalized spectrum.
/// All three are exactly symmetric.
struct GraphLaplacian {
  std::size_t node_count = 0;
  std::size_t k_neighbors = 0;
  double bandwidth = 0.0;     // sigma, radians
  double lambda_bound = 0.0;  // Gershgorin bound on the normalized Laplacian
  SparseMatrix weights;
  Eigen::VectorXd degrees;
  SparseMatrix combinatorial;
  SparseMatrix normalized;
  SparseMatrix rescaled;
};

/// Throws std::invalid_argument unless 1 <= k_neighbors < tess.size().
GraphLaplacian build_graph_laplacian(const Tessellation& tess, std::size_t k_neighbors = 8);

}  // namespace sphericam

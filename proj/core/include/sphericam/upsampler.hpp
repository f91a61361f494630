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
#include <memory>
#include <vector>

#include <Eigen/Core>

#include "sphericam/geometry.hpp"
#include "sphericam/sigproc.hpp"
#include "sphericam/tessellation.hpp"

namespace sphericam {

struct UpsampleRequest {
  std::vector<Eigen::MatrixXcd> low_res;  // one M_low x M_low matrix per band
  ArrayGeometry low_geometry;
  ArrayGeometry target_geometry;
  Tessellation tessellation;
  BandPlan plan;
};

struct BandSolveInfo {
  std::size_t iterations = 0;
  bool converged = false;
  double objective = 0.0;          // 0.5 ||A diag(p) A^H - cov||_F^2
  double residual_power = 0.0;     // per-channel power re-injected as diagonal loading
};

struct UpsampleResult {
  std::vector<Eigen::MatrixXcd> covariances;  // one M_target x M_target matrix per band
  std::vector<BandSolveInfo> bands;

  /// False if any band hit the iteration cap before meeting the tolerance.
  bool converged() const;
};

struct UpsamplerOptions {
  std::size_t max_iterations = 20000;
  double relative_tolerance = 1e-8;  // on the per-iteration objective decrease
  double diagonal_loading = 1.0;     // epsilon, scales the re-injected residual power
};

/// Interface for 4ch -> 32ch style covariance super-resolution. Implementations
/// are bound to a fixed pair of geometries, tessellation and band plan.
class CovarianceUpsampler {
 public:
  virtual ~CovarianceUpsampler() = default;
  virtual UpsampleResult upsample(const std::vector<Eigen::MatrixXcd>& low_res) const = 0;
  virtual std::size_t target_channel_count() const = 0;
};

/// Reference upsampler: per band, fits a nonnegative source-power map p over
/// the tessellation to the low-resolution covariance,
///   min_p>=0  0.5 || A_low diag(p) A_low^H - cov_low ||_F^2,
/// by accelerated projected gradient descent from p = 0 (step 1 / lambda_max
/// of the Hessian |A_low^H A_low|^2, momentum reset whenever the objective
/// rises), then resynthesises
///   A_target diag(p) A_target^H + eps * max(0, residual trace / M_low) * I.
/// Steering columns are unit-modulus (a plane wave of power 1 has unit
/// per-channel power on either array).
class NnlsUpsampler final : public CovarianceUpsampler {
 public:
  NnlsUpsampler(const ArrayGeometry& low_geometry, const ArrayGeometry& target_geometry,
                const Tessellation& tess, const BandPlan& plan, UpsamplerOptions options = {});

  UpsampleResult upsample(const std::vector<Eigen::MatrixXcd>& low_res) const override;
  std::size_t target_channel_count() const override { return target_channels_; }

  /// Power map fitted for one band (exposed for diagnostics and tests).
  Eigen::VectorXd fit_power_map(std::size_t band, const Eigen::MatrixXcd& low_res,
                                BandSolveInfo* info = nullptr) const;

 private:
  struct BandOperators {
    Eigen::MatrixXcd low;     // M_low x N, unit modulus
    Eigen::MatrixXcd target;  // M_target x N, unit modulus
    Eigen::MatrixXd kr;       // [Re; Im] of conj(A_low) o A_low, 2 M_low^2 x N
    double step = 0.0;        // 1 / lambda_max(kr^T kr)
  };

  std::size_t low_channels_;
  std::size_t target_channels_;
  UpsamplerOptions options_;
  std::vector<BandOperators> bands_;
};

/// One-shot form of NnlsUpsampler::upsample. Throws std::invalid_argument if
/// the request is inconsistent (band count, shapes, non-Hermitian input, or
/// low-res channel count not below the target's).
UpsampleResult upsample_covariance(const UpsampleRequest& req, UpsamplerOptions options = {});

struct CovarianceError {
  double magnitude = 0.0;  // mean | |est_ij| - |true_ij| |
  double phase = 0.0;      // mean wrapped |arg est_ij - arg true_ij| over |true_ij| > 1e-12, radians
};

/// Entry-wise magnitude and phase error between two matrices of equal shape.
CovarianceError covariance_error(const Eigen::MatrixXcd& estimate, const Eigen::MatrixXcd& truth);

/// Per-band form. Throws std::invalid_argument on band-count or shape mismatch.
std::vector<CovarianceError> covariance_error(const std::vector<Eigen::MatrixXcd>& estimate,
                                              const std::vector<Eigen::MatrixXcd>& truth);

}  // namespace sphericam

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
#include <filesystem>
#include <vector>

#include <Eigen/Core>

#include "sphericam/geometry.hpp"
#include "sphericam/laplacian.hpp"
#include "sphericam/sigproc.hpp"
#include "sphericam/tessellation.hpp"

namespace sphericam {

/// Far-field steering matrix, M x N:
///   A(m, n) = exp(+j * 2 pi f / c * <p_m, r_n>) / sqrt(M)
/// Every column has unit norm. Throws std::invalid_argument unless f > 0.
Eigen::MatrixXcd steering_matrix(const ArrayGeometry& geom, const Tessellation& tess,
                                 double frequency);

/// Khatri-Rao product conj(B) o B, M^2 x N; column n is conj(b_n) kron b_n.
Eigen::MatrixXcd khatri_rao_conj(const Eigen::MatrixXcd& beamformer);

/// Maps a channel covariance onto the tessellation. Caches the Khatri-Rao
/// operator of one beamforming matrix so repeated frames cost one M^2 x N
/// matrix-vector product.
class Backprojector {
 public:
  explicit Backprojector(const Eigen::MatrixXcd& beamformer);

  /// Re([conj(B) o B]^H vec(cov)), equal to b_n^H cov b_n per column.
  /// Throws std::invalid_argument on shape mismatch or non-Hermitian input.
  Eigen::VectorXd apply(const Eigen::MatrixXcd& cov) const;

  Eigen::Index channel_count() const { return channels_; }
  Eigen::Index pixel_count() const { return operator_adj_.rows(); }

 private:
  Eigen::Index channels_;
  Eigen::MatrixXcd operator_adj_;  // N x M^2
};

/// One-shot backprojection; see Backprojector::apply.
Eigen::VectorXd backproject(const Eigen::MatrixXcd& cov, const Eigen::MatrixXcd& beamformer);

/// sum_k theta_k T_k(rescaled Laplacian) x via the Chebyshev three-term
/// recurrence (sparse mat-vecs only). Throws std::invalid_argument for an
/// empty theta or size mismatch.
Eigen::VectorXd evaluate_laplacian_polynomial(const GraphLaplacian& lap,
                                              const Eigen::VectorXd& theta,
                                              const Eigen::VectorXd& x);

/// Parameters of one frequency band of the imaging recurrence.
struct BandParams {
  Eigen::MatrixXcd beamformer;  // M x N
  Eigen::VectorXd theta;        // K + 1 Chebyshev coefficients
  Eigen::VectorXd tau;          // N biases
};

/// Parameters of the backprojection + deblurring network, shared across
/// iterations.
struct DeepWaveParams {
  std::vector<BandParams> bands;
  std::uint32_t iterations = 5;  // L
  std::uint32_t degree = 4;      // K

  std::size_t band_count() const { return bands.size(); }
  Eigen::Index channel_count() const { return bands.empty() ? 0 : bands.front().beamformer.rows(); }
  Eigen::Index pixel_count() const { return bands.empty() ? 0 : bands.front().beamformer.cols(); }

  /// Throws std::invalid_argument if shapes disagree across bands, theta has
  /// the wrong length, L < 1, or a beamformer column is zero or non-finite.
  void validate() const;
};

/// Analytic delay-and-sum initialisation: B_f = steering_matrix at each band
/// centre, theta = 0, tau = 0, L = 5, K = 4.
DeepWaveParams default_params(const ArrayGeometry& geom, const Tessellation& tess,
                              const BandPlan& plan);

/// Mean of |a(u)^H a(v)|^2 over direction pairs separated by `angle`
/// radians, with unit-norm steering vectors at `frequency`. Equals 1 at
/// angle 0 and decays with the array's beam width.
double point_spread(const ArrayGeometry& geom, double frequency, double angle);

/// default_params with a per-band bias tau_f = point_spread(f, radius): a
/// single source whose covariance has unit largest eigenvalue then drives only
/// pixels within about `bias_radius_deg` of it positive in every band.
/// Throws std::invalid_argument unless 0 < bias_radius_deg < 180.
DeepWaveParams analytic_params(const ArrayGeometry& geom, const Tessellation& tess,
                               const BandPlan& plan, double bias_radius_deg);

/// Per-band intensity over the tessellation for one frame.
struct IntensityMap {
  std::int64_t frame_index = 0;
  std::vector<Eigen::VectorXd> bands;

  std::size_t band_count() const { return bands.size(); }
  Eigen::Index pixel_count() const { return bands.empty() ? 0 : bands.front().size(); }
};

/// Evaluates
///   y = backproject(cov_f, B_f);  x^0 = 0;
///   x^l = tanh(y + P_theta(L) x^(l-1) - tau),  l = 1..L
/// per band. Holds per-band Backprojectors so the same engine can be reused
/// across frames; forward() is const and safe to call concurrently.
class ImagingEngine {
 public:
  ImagingEngine(DeepWaveParams params, GraphLaplacian laplacian);

  /// Throws std::invalid_argument on band/channel mismatch and Error when a
  /// non-finite value appears (message names band and iteration).
  IntensityMap forward(const CovarianceFrame& frame) const;

  /// Backprojection only (no squashing, no deblurring).
  IntensityMap backprojection(const CovarianceFrame& frame) const;

  const DeepWaveParams& params() const { return params_; }
  const GraphLaplacian& laplacian() const { return laplacian_; }

 private:
  void check_frame(const CovarianceFrame& frame) const;

  DeepWaveParams params_;
  GraphLaplacian laplacian_;
  std::vector<Backprojector> backprojectors_;
};

IntensityMap deepwave_forward(const CovarianceFrame& frame, const DeepWaveParams& params,
                              const GraphLaplacian& lap);

/// Binary parameter file, little-endian: "DWPM", u32 version = 1, u32 F, M,
/// N, K, L, then per band B (2 M N f64, interleaved re/im, column-major),
/// theta (K + 1 f64), tau (N f64).
void save_params(const DeepWaveParams& params, const std::filesystem::path& path);

/// Throws FormatError on bad magic, unsupported version, or a size that does
/// not match the header (message carries expected and actual byte counts).
DeepWaveParams load_params(const std::filesystem::path& path);

}  // namespace sphericam

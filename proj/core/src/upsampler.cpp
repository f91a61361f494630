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

#include "sphericam/upsampler.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>

#include "sphericam/imaging.hpp"

namespace sphericam {

bool UpsampleResult::converged() const {
  return std::all_of(bands.begin(), bands.end(), [](const BandSolveInfo& b) { return b.converged; });
}

NnlsUpsampler::NnlsUpsampler(const ArrayGeometry& low_geometry,
                             const ArrayGeometry& target_geometry, const Tessellation& tess,
                             const BandPlan& plan, UpsamplerOptions options)
    : low_channels_(low_geometry.channel_count()),
      target_channels_(target_geometry.channel_count()),
      options_(options) {
  if (low_channels_ >= target_channels_)
    throw std::invalid_argument("upsampling needs fewer low-res channels (" +
                                std::to_string(low_channels_) + ") than target channels (" +
                                std::to_string(target_channels_) + ")");
  if (options_.max_iterations == 0) throw std::invalid_argument("max_iterations must be positive");
  for (double f : plan.center_frequencies) {
    BandOperators ops;
    // steering_matrix normalises columns to unit norm; undo it for unit modulus.
    ops.low = steering_matrix(low_geometry, tess, f) * std::sqrt(static_cast<double>(low_channels_));
    ops.target = steering_matrix(target_geometry, tess, f) *
                 std::sqrt(static_cast<double>(target_channels_));
    const Eigen::Index m2 = static_cast<Eigen::Index>(low_channels_ * low_channels_);
    const Eigen::MatrixXcd kr = khatri_rao_conj(ops.low);
    ops.kr.resize(2 * m2, kr.cols());
    ops.kr.topRows(m2) = kr.real();
    ops.kr.bottomRows(m2) = kr.imag();
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(ops.kr * ops.kr.transpose(),
                                                             Eigen::EigenvaluesOnly);
    ops.step = 1.0 / eig.eigenvalues().maxCoeff();
    bands_.push_back(std::move(ops));
  }
}

Eigen::VectorXd NnlsUpsampler::fit_power_map(std::size_t band, const Eigen::MatrixXcd& low_res,
                                             BandSolveInfo* info) const {
  const BandOperators& ops = bands_.at(band);
  const auto m = static_cast<Eigen::Index>(low_channels_);
  if (low_res.rows() != m || low_res.cols() != m)
    throw std::invalid_argument("band " + std::to_string(band) + ": low-res covariance must be " +
                                std::to_string(m) + "x" + std::to_string(m));
  if ((low_res - low_res.adjoint()).norm() > 1e-8 * std::max(1.0, low_res.norm()))
    throw std::invalid_argument("band " + std::to_string(band) + ": covariance is not Hermitian");

  // f(p) = 0.5 ||R p - s||^2 with R the real-stacked Khatri-Rao operator and s = vec(cov).
  const Eigen::Index m2 = m * m;
  Eigen::VectorXd target(2 * m2);
  target.head(m2) = low_res.reshaped().real();
  target.tail(m2) = low_res.reshaped().imag();
  const auto half_sq = [](const Eigen::VectorXd& r) { return 0.5 * r.squaredNorm(); };

  // Accelerated projected gradient with function-value restart. Residuals are
  // tracked alongside iterates since the momentum step is linear.
  const Eigen::Index n = ops.kr.cols();
  Eigen::VectorXd p = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd y = p;
  Eigen::VectorXd res_p = -target;
  Eigen::VectorXd res_y = res_p;
  double t = 1.0;
  double f_prev = half_sq(res_p);
  BandSolveInfo local;
  local.objective = f_prev;
  if (f_prev == 0.0) {
    local.converged = true;
  } else {
    for (std::size_t it = 1; it <= options_.max_iterations; ++it) {
      Eigen::VectorXd next = (y - ops.step * (ops.kr.transpose() * res_y)).cwiseMax(0.0);
      Eigen::VectorXd res_next = ops.kr * next - target;
      double f = half_sq(res_next);
      if (f > f_prev) {
        // momentum overshoot: take a plain step from p instead
        next = (p - ops.step * (ops.kr.transpose() * res_p)).cwiseMax(0.0);
        res_next = ops.kr * next - target;
        f = half_sq(res_next);
        t = 1.0;
      }
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      const double beta = (t - 1.0) / t_next;
      y = next + beta * (next - p);
      res_y = res_next + beta * (res_next - res_p);
      t = t_next;
      const double decrease = f_prev - f;
      p = std::move(next);
      res_p = std::move(res_next);
      local.iterations = it;
      local.objective = f;
      if (f == 0.0 || decrease <= options_.relative_tolerance * f_prev) {
        local.converged = true;
        break;
      }
      f_prev = f;
    }
  }
  if (info) *info = local;
  return p;
}

UpsampleResult NnlsUpsampler::upsample(const std::vector<Eigen::MatrixXcd>& low_res) const {
  if (low_res.size() != bands_.size())
    throw std::invalid_argument("got " + std::to_string(low_res.size()) + " bands, expected " +
                                std::to_string(bands_.size()));
  UpsampleResult result;
  for (std::size_t b = 0; b < bands_.size(); ++b) {
    BandSolveInfo info;
    const Eigen::VectorXd p = fit_power_map(b, low_res[b], &info);
    const BandOperators& ops = bands_[b];
    const double modeled_trace = static_cast<double>(low_channels_) * p.sum();
    info.residual_power =
        std::max(0.0, (low_res[b].trace().real() - modeled_trace) / static_cast<double>(low_channels_));

    Eigen::MatrixXcd out = ops.target * p.asDiagonal() * ops.target.adjoint();
    out = (0.5 * (out + out.adjoint())).eval();
    out.diagonal().array() += options_.diagonal_loading * info.residual_power;
    result.covariances.push_back(std::move(out));
    result.bands.push_back(info);
  }
  return result;
}

UpsampleResult upsample_covariance(const UpsampleRequest& req, UpsamplerOptions options) {
  if (req.low_res.size() != req.plan.band_count())
    throw std::invalid_argument("request has " + std::to_string(req.low_res.size()) +
                                " bands, plan has " + std::to_string(req.plan.band_count()));
  return NnlsUpsampler(req.low_geometry, req.target_geometry, req.tessellation, req.plan, options)
      .upsample(req.low_res);
}

CovarianceError covariance_error(const Eigen::MatrixXcd& estimate, const Eigen::MatrixXcd& truth) {
  if (estimate.rows() != truth.rows() || estimate.cols() != truth.cols())
    throw std::invalid_argument("covariance_error: shape mismatch");
  CovarianceError err;
  if (truth.size() == 0) return err;
  double phase_sum = 0.0;
  std::size_t phase_count = 0;
  for (Eigen::Index j = 0; j < truth.cols(); ++j) {
    for (Eigen::Index i = 0; i < truth.rows(); ++i) {
      err.magnitude += std::abs(std::abs(estimate(i, j)) - std::abs(truth(i, j)));
      if (std::abs(truth(i, j)) > 1e-12) {
        phase_sum += std::abs(wrap_pi(std::arg(estimate(i, j)) - std::arg(truth(i, j))));
        ++phase_count;
      }
    }
  }
  err.magnitude /= static_cast<double>(truth.size());
  err.phase = phase_count ? phase_sum / static_cast<double>(phase_count) : 0.0;
  return err;
}

std::vector<CovarianceError> covariance_error(const std::vector<Eigen::MatrixXcd>& estimate,
                                              const std::vector<Eigen::MatrixXcd>& truth) {
  if (estimate.size() != truth.size())
    throw std::invalid_argument("covariance_error: band count mismatch");
  std::vector<CovarianceError> out;
  for (std::size_t b = 0; b < truth.size(); ++b) out.push_back(covariance_error(estimate[b], truth[b]));
  return out;
}

}  // namespace sphericam

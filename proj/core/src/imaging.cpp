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

#include "sphericam/imaging.hpp"

#include <cmath>
#include <complex>
#include <string>

#include "binary_io.hpp"

namespace sphericam {
namespace {

void require_hermitian(const Eigen::MatrixXcd& cov) {
  const double scale = std::max(1.0, cov.norm());
  if ((cov - cov.adjoint()).norm() > 1e-8 * scale)
    throw std::invalid_argument("covariance matrix is not Hermitian");
}

}  // namespace

Eigen::MatrixXcd steering_matrix(const ArrayGeometry& geom, const Tessellation& tess,
                                 double frequency) {
  if (!(frequency > 0.0)) throw std::invalid_argument("steering frequency must be positive");
  const auto m = static_cast<Eigen::Index>(geom.channel_count());
  const auto n = static_cast<Eigen::Index>(tess.size());
  const double wavenumber = 2.0 * kPi * frequency / geom.speed_of_sound();
  const double norm = 1.0 / std::sqrt(static_cast<double>(m));
  Eigen::MatrixXcd a(m, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < m; ++i)
      a(i, j) = std::polar(norm, wavenumber * geom.position(static_cast<std::size_t>(i))
                                                  .dot(tess.directions[static_cast<std::size_t>(j)]));
  return a;
}

Eigen::MatrixXcd khatri_rao_conj(const Eigen::MatrixXcd& b) {
  const Eigen::Index m = b.rows();
  Eigen::MatrixXcd out(m * m, b.cols());
  for (Eigen::Index n = 0; n < b.cols(); ++n)
    for (Eigen::Index j = 0; j < m; ++j)
      for (Eigen::Index i = 0; i < m; ++i) out(j * m + i, n) = std::conj(b(j, n)) * b(i, n);
  return out;
}

Backprojector::Backprojector(const Eigen::MatrixXcd& beamformer)
    : channels_(beamformer.rows()), operator_adj_(khatri_rao_conj(beamformer).adjoint()) {}

Eigen::VectorXd Backprojector::apply(const Eigen::MatrixXcd& cov) const {
  if (cov.rows() != channels_ || cov.cols() != channels_)
    throw std::invalid_argument("covariance is " + std::to_string(cov.rows()) + "x" +
                                std::to_string(cov.cols()) + ", beamformer expects " +
                                std::to_string(channels_) + " channels");
  require_hermitian(cov);
  const Eigen::Map<const Eigen::VectorXcd> vec(cov.data(), cov.size());
  return (operator_adj_ * vec).real();
}

Eigen::VectorXd backproject(const Eigen::MatrixXcd& cov, const Eigen::MatrixXcd& beamformer) {
  return Backprojector(beamformer).apply(cov);
}

Eigen::VectorXd evaluate_laplacian_polynomial(const GraphLaplacian& lap,
                                              const Eigen::VectorXd& theta,
                                              const Eigen::VectorXd& x) {
  if (theta.size() == 0) throw std::invalid_argument("polynomial needs at least one coefficient");
  if (x.size() != static_cast<Eigen::Index>(lap.node_count))
    throw std::invalid_argument("signal length " + std::to_string(x.size()) +
                                " does not match graph size " + std::to_string(lap.node_count));
  Eigen::VectorXd prev = x;
  Eigen::VectorXd out = theta(0) * x;
  if (theta.size() == 1) return out;
  Eigen::VectorXd cur = lap.rescaled * x;
  out += theta(1) * cur;
  for (Eigen::Index k = 2; k < theta.size(); ++k) {
    Eigen::VectorXd next = 2.0 * (lap.rescaled * cur) - prev;
    out += theta(k) * next;
    prev = std::move(cur);
    cur = std::move(next);
  }
  return out;
}

void DeepWaveParams::validate() const {
  if (bands.empty()) throw std::invalid_argument("parameters have no bands");
  if (iterations < 1) throw std::invalid_argument("iteration count L must be at least 1");
  const Eigen::Index m = channel_count(), n = pixel_count();
  for (std::size_t f = 0; f < bands.size(); ++f) {
    const auto& b = bands[f];
    const std::string where = "band " + std::to_string(f) + ": ";
    if (b.beamformer.rows() != m || b.beamformer.cols() != n)
      throw std::invalid_argument(where + "beamformer shape differs from band 0");
    if (b.theta.size() != static_cast<Eigen::Index>(degree) + 1)
      throw std::invalid_argument(where + "theta length " + std::to_string(b.theta.size()) +
                                  " != K + 1 = " + std::to_string(degree + 1));
    if (b.tau.size() != n) throw std::invalid_argument(where + "tau length must equal N");
    for (Eigen::Index j = 0; j < n; ++j) {
      const double cn = b.beamformer.col(j).norm();
      if (!std::isfinite(cn) || cn == 0.0)
        throw std::invalid_argument(where + "beamformer column " + std::to_string(j) +
                                    " has zero or non-finite norm");
    }
    if (!b.theta.allFinite() || !b.tau.allFinite())
      throw std::invalid_argument(where + "non-finite theta or tau");
  }
}

DeepWaveParams default_params(const ArrayGeometry& geom, const Tessellation& tess,
                              const BandPlan& plan) {
  DeepWaveParams params;
  const auto n = static_cast<Eigen::Index>(tess.size());
  for (double f : plan.center_frequencies) {
    params.bands.push_back({steering_matrix(geom, tess, f),
                            Eigen::VectorXd::Zero(params.degree + 1), Eigen::VectorXd::Zero(n)});
  }
  return params;
}

double point_spread(const ArrayGeometry& geom, double frequency, double angle) {
  if (!(frequency > 0.0)) throw std::invalid_argument("frequency must be positive");
  constexpr int kSpins = 8;
  const Tessellation centres = build_tessellation(64);
  Tessellation pair;
  pair.directions.resize(2);
  double acc = 0.0;
  for (const Vec3& u : centres.directions) {
    const Vec3 axis = std::abs(u.z()) < 0.9 ? Vec3::UnitZ() : Vec3::UnitX();
    const Vec3 e1 = u.cross(axis).normalized();
    const Vec3 e2 = u.cross(e1);
    for (int s = 0; s < kSpins; ++s) {
      const double phi = 2.0 * kPi * s / kSpins;
      pair.directions[0] = u;
      pair.directions[1] = std::cos(angle) * u + std::sin(angle) * (std::cos(phi) * e1 + std::sin(phi) * e2);
      const Eigen::MatrixXcd a = steering_matrix(geom, pair, frequency);
      acc += std::norm(a.col(0).dot(a.col(1)));
    }
  }
  return acc / static_cast<double>(centres.size() * kSpins);
}

DeepWaveParams analytic_params(const ArrayGeometry& geom, const Tessellation& tess,
                               const BandPlan& plan, double bias_radius_deg) {
  if (!(bias_radius_deg > 0.0 && bias_radius_deg < 180.0))
    throw std::invalid_argument("bias radius must be in (0, 180) degrees");
  DeepWaveParams params = default_params(geom, tess, plan);
  for (std::size_t f = 0; f < params.band_count(); ++f)
    params.bands[f].tau.setConstant(point_spread(geom, plan.center_frequencies[f], deg2rad(bias_radius_deg)));
  return params;
}

ImagingEngine::ImagingEngine(DeepWaveParams params, GraphLaplacian laplacian)
    : params_(std::move(params)), laplacian_(std::move(laplacian)) {
  params_.validate();
  if (static_cast<Eigen::Index>(laplacian_.node_count) != params_.pixel_count())
    throw std::invalid_argument("graph has " + std::to_string(laplacian_.node_count) +
                                " nodes but parameters have " +
                                std::to_string(params_.pixel_count()) + " pixels");
  backprojectors_.reserve(params_.band_count());
  for (const auto& b : params_.bands) backprojectors_.emplace_back(b.beamformer);
}

void ImagingEngine::check_frame(const CovarianceFrame& frame) const {
  if (frame.band_count() != params_.band_count())
    throw std::invalid_argument("frame has " + std::to_string(frame.band_count()) +
                                " bands, parameters have " + std::to_string(params_.band_count()));
}

IntensityMap ImagingEngine::backprojection(const CovarianceFrame& frame) const {
  check_frame(frame);
  IntensityMap map;
  map.frame_index = frame.frame_index;
  for (std::size_t f = 0; f < frame.band_count(); ++f)
    map.bands.push_back(backprojectors_[f].apply(frame.bands[f]));
  return map;
}

IntensityMap ImagingEngine::forward(const CovarianceFrame& frame) const {
  check_frame(frame);
  IntensityMap map;
  map.frame_index = frame.frame_index;
  for (std::size_t f = 0; f < frame.band_count(); ++f) {
    const BandParams& bp = params_.bands[f];
    const Eigen::VectorXd drive = backprojectors_[f].apply(frame.bands[f]) - bp.tau;
    const bool zero_theta = (bp.theta.array() == 0.0).all();
    Eigen::VectorXd x = Eigen::VectorXd::Zero(drive.size());
    for (std::uint32_t l = 1; l <= params_.iterations; ++l) {
      // x^0 = 0, and with theta = 0 the deblurring term vanishes.
      Eigen::VectorXd pre = drive;
      if (!zero_theta && l > 1) pre += evaluate_laplacian_polynomial(laplacian_, bp.theta, x);
      x = pre.array().tanh().matrix();
      if (!x.allFinite())
        throw Error("non-finite intensity in band " + std::to_string(f) + " at iteration " +
                    std::to_string(l));
    }
    map.bands.push_back(std::move(x));
  }
  return map;
}

IntensityMap deepwave_forward(const CovarianceFrame& frame, const DeepWaveParams& params,
                              const GraphLaplacian& lap) {
  return ImagingEngine(params, lap).forward(frame);
}

void save_params(const DeepWaveParams& params, const std::filesystem::path& path) {
  params.validate();
  detail::ByteWriter w;
  w.bytes("DWPM", 4);
  w.u32(1);
  w.u32(static_cast<std::uint32_t>(params.band_count()));
  w.u32(static_cast<std::uint32_t>(params.channel_count()));
  w.u32(static_cast<std::uint32_t>(params.pixel_count()));
  w.u32(params.degree);
  w.u32(params.iterations);
  for (const auto& b : params.bands) {
    for (Eigen::Index j = 0; j < b.beamformer.cols(); ++j)
      for (Eigen::Index i = 0; i < b.beamformer.rows(); ++i) {
        w.f64(b.beamformer(i, j).real());
        w.f64(b.beamformer(i, j).imag());
      }
    for (Eigen::Index k = 0; k < b.theta.size(); ++k) w.f64(b.theta(k));
    for (Eigen::Index k = 0; k < b.tau.size(); ++k) w.f64(b.tau(k));
  }
  detail::write_file_bytes(path.string(), w.data());
}

DeepWaveParams load_params(const std::filesystem::path& path) {
  const auto bytes = detail::read_file_bytes(path.string());
  detail::ByteReader r(bytes, path.string());
  r.expect_magic("DWPM");
  const std::uint32_t version = r.u32();
  if (version != 1)
    throw FormatError(path.string() + ": unsupported parameter file version " +
                      std::to_string(version));
  const std::uint64_t f = r.u32(), m = r.u32(), n = r.u32();
  DeepWaveParams params;
  params.degree = r.u32();
  params.iterations = r.u32();
  const std::uint64_t per_band = 2 * m * n + (params.degree + 1ull) + n;
  const std::uint64_t expected = r.position() + 8 * f * per_band;
  if (bytes.size() != expected)
    throw FormatError(path.string() + ": " + (bytes.size() < expected ? "truncated" : "oversized") +
                      " parameter file, expected " + std::to_string(expected) + " bytes, got " +
                      std::to_string(bytes.size()));
  const auto mi = static_cast<Eigen::Index>(m), ni = static_cast<Eigen::Index>(n);
  for (std::uint64_t b = 0; b < f; ++b) {
    BandParams bp{Eigen::MatrixXcd(mi, ni), Eigen::VectorXd(params.degree + 1),
                  Eigen::VectorXd(ni)};
    for (Eigen::Index j = 0; j < ni; ++j)
      for (Eigen::Index i = 0; i < mi; ++i) {
        const double re = r.f64();
        const double im = r.f64();
        bp.beamformer(i, j) = {re, im};
      }
    for (Eigen::Index k = 0; k < bp.theta.size(); ++k) bp.theta(k) = r.f64();
    for (Eigen::Index k = 0; k < ni; ++k) bp.tau(k) = r.f64();
    params.bands.push_back(std::move(bp));
  }
  params.validate();
  return params;
}

}  // namespace sphericam

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

#include "sphericam/sigproc.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>
#include <string>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/FFT>

#include "sphericam/common.hpp"
#include "sphericam/parallel.hpp"

namespace sphericam {

std::size_t BandPlan::frame_samples() const {
  return static_cast<std::size_t>(std::llround(frame_length * sample_rate));
}

BandPlan make_band_plan(std::size_t bands, double f_low, double f_high, double sample_rate) {
  if (bands == 0) throw std::invalid_argument("band plan needs at least one band");
  if (!(sample_rate > 0.0)) throw std::invalid_argument("sample rate must be positive");
  if (!(f_low > 0.0) || f_high < f_low || (bands == 1 && f_high == f_low))
    throw std::invalid_argument("band range must satisfy 0 < f_low < f_high");

  BandPlan plan;
  plan.sample_rate = sample_rate;
  if (bands == 1) {
    plan.center_frequencies.push_back(0.5 * (f_low + f_high));
    plan.band_edges.emplace_back(f_low, f_high);
  } else {
    const double spacing = (f_high - f_low) / static_cast<double>(bands - 1);
    for (std::size_t b = 0; b < bands; ++b) {
      const double c = f_low + spacing * static_cast<double>(b);
      plan.center_frequencies.push_back(c);
      plan.band_edges.emplace_back(c - 0.5 * spacing, c + 0.5 * spacing);
    }
  }

  const double nyquist = 0.5 * sample_rate;
  for (std::size_t b = bands; b-- > 0;) {
    const auto [lo, hi] = plan.band_edges[b];
    if (hi >= nyquist) {
      std::ostringstream msg;
      msg << "band " << plan.center_frequencies[b] << " Hz (upper edge " << hi
          << " Hz) above Nyquist " << nyquist << " Hz";
      throw std::invalid_argument(msg.str());
    }
    if (lo <= 0.0) throw std::invalid_argument("lowest band edge must be above 0 Hz");
  }
  return plan;
}

BandPlan default_band_plan(double sample_rate) {
  return make_band_plan(9, 1500.0, 4500.0, sample_rate);
}

Audio make_audio(const std::vector<std::vector<double>>& channels, double sample_rate) {
  Audio audio;
  audio.sample_rate = sample_rate;
  const std::size_t len = channels.empty() ? 0 : channels.front().size();
  audio.samples.resize(static_cast<Eigen::Index>(channels.size()), static_cast<Eigen::Index>(len));
  for (std::size_t c = 0; c < channels.size(); ++c) {
    if (channels[c].size() != len)
      throw std::invalid_argument("channel " + std::to_string(c + 1) + " has " +
                                  std::to_string(channels[c].size()) + " samples, expected " +
                                  std::to_string(len));
    for (std::size_t t = 0; t < len; ++t)
      audio.samples(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(t)) = channels[c][t];
  }
  return audio;
}

std::vector<CovarianceFrame> band_covariances(const Audio& audio, const BandPlan& plan,
                                              unsigned threads) {
  const Eigen::Index m = audio.channel_count();
  if (m < 2) throw std::invalid_argument("covariance needs at least 2 channels");
  if (audio.sample_rate != plan.sample_rate) {
    std::ostringstream msg;
    msg << "audio sample rate " << audio.sample_rate << " Hz differs from band plan rate "
        << plan.sample_rate << " Hz";
    throw std::invalid_argument(msg.str());
  }
  const std::size_t frame_len = plan.frame_samples();
  const std::size_t win = plan.window_size;
  if (win == 0 || plan.hop_size == 0 || win > frame_len)
    throw std::invalid_argument("STFT window must be non-empty and fit inside one frame");

  // Bin ranges per band. Bin k has centre k * rate / win.
  const double bin_hz = plan.sample_rate / static_cast<double>(win);
  std::vector<std::pair<std::size_t, std::size_t>> bins;  // [first, last)
  for (const auto& [lo, hi] : plan.band_edges) {
    const auto first = static_cast<std::size_t>(std::ceil(lo / bin_hz));
    auto last = static_cast<std::size_t>(std::ceil(hi / bin_hz));
    if (last <= first) {
      std::ostringstream msg;
      msg << "band [" << lo << ", " << hi << ") Hz contains no STFT bin";
      throw std::invalid_argument(msg.str());
    }
    bins.emplace_back(first, last);
  }

  Eigen::VectorXd window(static_cast<Eigen::Index>(win));
  for (std::size_t n = 0; n < win; ++n)
    window(static_cast<Eigen::Index>(n)) = 0.5 - 0.5 * std::cos(2.0 * kPi * n / win);
  const double scale = 1.0 / window.norm();

  std::vector<std::size_t> starts;
  for (std::size_t s = 0; s + win <= frame_len; s += plan.hop_size) starts.push_back(s);

  const std::size_t n_frames = static_cast<std::size_t>(audio.frame_count()) / frame_len;
  std::vector<CovarianceFrame> frames(n_frames);

  parallel_for(n_frames, threads, [&](std::size_t f) {
    Eigen::FFT<double> fft;
    std::vector<double> segment(win);
    std::vector<std::complex<double>> spectrum;
    // spectra[b]: M x (snapshots * bins in band)
    std::vector<Eigen::MatrixXcd> spectra(plan.band_count());
    for (std::size_t b = 0; b < bins.size(); ++b)
      spectra[b].resize(m, static_cast<Eigen::Index>(starts.size() * (bins[b].second - bins[b].first)));

    for (std::size_t s = 0; s < starts.size(); ++s) {
      const std::size_t offset = f * frame_len + starts[s];
      for (Eigen::Index c = 0; c < m; ++c) {
        for (std::size_t n = 0; n < win; ++n)
          segment[n] = audio.samples(c, static_cast<Eigen::Index>(offset + n)) *
                       window(static_cast<Eigen::Index>(n));
        fft.fwd(spectrum, segment);
        for (std::size_t b = 0; b < bins.size(); ++b) {
          const auto [first, last] = bins[b];
          const std::size_t width = last - first;
          for (std::size_t k = first; k < last; ++k)
            spectra[b](c, static_cast<Eigen::Index>(s * width + (k - first))) = spectrum[k] * scale;
        }
      }
    }

    CovarianceFrame& out = frames[f];
    out.frame_index = static_cast<std::int64_t>(f);
    out.bands.reserve(plan.band_count());
    for (const auto& s : spectra) {
      Eigen::MatrixXcd cov = s * s.adjoint() / static_cast<double>(s.cols());
      // Exact Hermitian symmetry; the product is Hermitian up to rounding.
      cov = 0.5 * (cov + cov.adjoint()).eval();
      out.bands.push_back(std::move(cov));
    }
  });
  return frames;
}

void normalize_trace(CovarianceFrame& frame) {
  for (auto& cov : frame.bands) {
    const double tr = cov.trace().real();
    if (tr > 0.0) cov /= tr;
  }
}

void normalize_spectral(CovarianceFrame& frame, double exponent, double knee) {
  if (!(exponent > 0.0)) throw std::invalid_argument("spectral exponent must be positive");
  if (!(knee > 0.0 && knee <= 1.0)) throw std::invalid_argument("spectral knee must be in (0, 1]");
  for (auto& cov : frame.bands) {
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(cov);
    if (es.info() != Eigen::Success) throw Error("covariance eigendecomposition failed");
    Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
    const double top = ev.maxCoeff();
    if (!(top > 0.0)) continue;
    for (Eigen::Index i = 0; i < ev.size(); ++i) ev(i) = std::min(1.0, std::pow(ev(i) / (knee * top), exponent));
    const Eigen::MatrixXcd out = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
    cov = 0.5 * (out + out.adjoint());
  }
}

}  // namespace sphericam

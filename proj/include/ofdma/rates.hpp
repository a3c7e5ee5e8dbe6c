/*
 * Copyright 2026 The ofdma-maxmin Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cmath>
#include <cstddef>
#include <string>

#include "ofdma/error.hpp"
#include "ofdma/matrix.hpp"

namespace ofdma {

// Per-user, per-bin channel description. All three arrays are N x K; constant
// masks or noise floors are broadcast by the parsers before they get here.
struct ChannelRealization {
  Matrix gain;      // |h_nn(k)|^2, linear power gain
  Matrix psd_mask;  // p_n(k)
  Matrix noise;     // sigma_n^2(k)

  std::size_t n_users() const noexcept { return gain.rows(); }
  std::size_t n_bins() const noexcept { return gain.cols(); }

  void validate() const {
    if (gain.rows() == 0 || gain.cols() == 0) {
      throw InputError("gain", "channel must have at least one user and one bin");
    }
    if (!psd_mask.same_shape(gain)) {
      throw InputError("psd_mask", "shape differs from gain");
    }
    if (!noise.same_shape(gain)) {
      throw InputError("noise", "shape differs from gain");
    }
    for (std::size_t i = 0; i < gain.data().size(); ++i) {
      const double g = gain.data()[i];
      const double p = psd_mask.data()[i];
      const double s = noise.data()[i];
      if (!(g >= 0.0) || !std::isfinite(g)) {
        throw InputError("gain", "entries must be finite and >= 0");
      }
      if (!(p >= 0.0) || !std::isfinite(p)) {
        throw InputError("psd_mask", "entries must be finite and >= 0");
      }
      if (!(s > 0.0) || !std::isfinite(s)) {
        throw InputError("noise", "entries must be finite and > 0");
      }
    }
  }
};

// Achievable rate R_nk of user n on bin k, in bits per channel use with unit
// subcarrier bandwidth. Construction validates: entries finite and >= 0.
class RateMatrix {
 public:
  RateMatrix() = default;
  explicit RateMatrix(Matrix values) : values_(std::move(values)) {
    if (values_.rows() == 0 || values_.cols() == 0) {
      throw InputError("rates", "rate matrix must be at least 1 x 1");
    }
    for (double v : values_.data()) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw InputError("rates", "entries must be finite and >= 0");
      }
    }
  }

  std::size_t n_users() const noexcept { return values_.rows(); }
  std::size_t n_bins() const noexcept { return values_.cols(); }
  double operator()(std::size_t n, std::size_t k) const { return values_(n, k); }
  const Matrix& values() const noexcept { return values_; }

 private:
  Matrix values_;
};

inline double snr_db_to_linear(double snr_db) { return std::pow(10.0, snr_db / 10.0); }

// R_nk = log2(1 + gain * mask / noise). No SNR gap is applied.
inline RateMatrix compute_rate_matrix(const ChannelRealization& ch) {
  ch.validate();
  Matrix r(ch.n_users(), ch.n_bins());
  for (std::size_t n = 0; n < ch.n_users(); ++n) {
    for (std::size_t k = 0; k < ch.n_bins(); ++k) {
      const double snr = ch.gain(n, k) * ch.psd_mask(n, k) / ch.noise(n, k);
      r(n, k) = snr == 0.0 ? 0.0 : std::log2(1.0 + snr);
    }
  }
  return RateMatrix(std::move(r));
}

}  // namespace ofdma

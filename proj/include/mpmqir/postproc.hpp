// Copyright 2026 The mpmqir Authors.

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Classical halves of the codec: pixel normalization, the probability to
// image rescale (mean/std match, clip, reshape), the MSE loss and the
// vector-Jacobian product of the rescale map.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "mpmqir/error.hpp"

namespace mpmqir {

/// W x H x C pixels, row-major with interleaved channels:
/// value(row, col, ch) = values[(row * W + col) * C + ch].
/// `std::uint8_t` holds bytes in [0, 255], `double` holds unit values in [0, 1].
template <typename T>
struct ImageTensor {
  static_assert(std::is_same_v<T, std::uint8_t> || std::is_same_v<T, double>);

  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t channels = 0;
  std::vector<T> values;

  ImageTensor() = default;
  ImageTensor(std::size_t w, std::size_t h, std::size_t c, std::vector<T> v)
      : width(w), height(h), channels(c), values(std::move(v)) {
    if (c != 1 && c != 3) throw ContractError("images have 1 or 3 channels, got " + std::to_string(c));
    if (values.size() != w * h * c)
      throw ContractError("image buffer holds " + std::to_string(values.size()) + " values, expected " +
                          std::to_string(w * h * c));
    if constexpr (std::is_same_v<T, double>) {
      for (double x : values)
        if (!(x >= 0.0 && x <= 1.0)) throw ContractError("unit image value outside [0, 1]");
    }
  }

  std::size_t pixels() const noexcept { return width * height; }

  T& at(std::size_t row, std::size_t col, std::size_t ch = 0) { return values[(row * width + col) * channels + ch]; }
  const T& at(std::size_t row, std::size_t col, std::size_t ch = 0) const {
    return values[(row * width + col) * channels + ch];
  }

  /// Flattened plane of one channel, row-major.
  std::vector<T> channel(std::size_t ch) const {
    if (ch >= channels) throw ContractError("channel index out of range");
    std::vector<T> out(pixels());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = values[i * channels + ch];
    return out;
  }

  static ImageTensor from_channels(std::size_t w, std::size_t h, const std::vector<std::vector<T>>& planes) {
    const std::size_t c = planes.size();
    std::vector<T> v(w * h * c);
    for (std::size_t ch = 0; ch < c; ++ch) {
      if (planes[ch].size() != w * h) throw ContractError("channel plane size does not match geometry");
      for (std::size_t i = 0; i < w * h; ++i) v[i * c + ch] = planes[ch][i];
    }
    return ImageTensor(w, h, c, std::move(v));
  }

  friend bool operator==(const ImageTensor&, const ImageTensor&) = default;
};

using ByteImage = ImageTensor<std::uint8_t>;
using UnitImage = ImageTensor<double>;

struct ChannelStats {
  double mu = 0.0;
  double sigma = 0.0;

  friend bool operator==(const ChannelStats&, const ChannelStats&) = default;
};

inline constexpr double kSpreadEpsilon = 1e-12;

inline UnitImage normalize(const ByteImage& img) {
  std::vector<double> v(img.values.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = img.values[i] / 255.0;
  return UnitImage(img.width, img.height, img.channels, std::move(v));
}

/// Round-half-up quantization to bytes.
inline std::uint8_t to_byte(double unit) noexcept {
  const double scaled = std::floor(std::clamp(unit, 0.0, 1.0) * 255.0 + 0.5);
  return static_cast<std::uint8_t>(scaled);
}

inline ByteImage denormalize(const UnitImage& img) {
  std::vector<std::uint8_t> v(img.values.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = to_byte(img.values[i]);
  return ByteImage(img.width, img.height, img.channels, std::move(v));
}

/// Mean and population standard deviation.
inline ChannelStats channel_stats(std::span<const double> x) {
  if (x.empty()) throw ContractError("channel_stats of an empty channel");
  if (std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; })) return {x[0], 0.0};
  const double n = static_cast<double>(x.size());
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  return {mean, std::sqrt(var / n)};
}

inline void check_stats(const ChannelStats& s) {
  if (!(s.sigma >= 0.0) || !std::isfinite(s.sigma) || !std::isfinite(s.mu))
    throw ContractError("invalid channel statistics");
}

/// Takes the first `n` probabilities, matches their mean/std to `stats` and
/// clips into [0, 1].
inline std::vector<double> rescale_probs(std::span<const double> probs, std::size_t n, const ChannelStats& stats) {
  if (n == 0) throw ContractError("rescale_probs needs at least one pixel");
  if (n > probs.size())
    throw ContractError("pixel count " + std::to_string(n) + " exceeds " + std::to_string(probs.size()) +
                        " basis states");
  check_stats(stats);
  const auto head = probs.first(n);
  const ChannelStats ps = channel_stats(head);
  std::vector<double> out(n);
  if (ps.sigma <= kSpreadEpsilon) {
    std::fill(out.begin(), out.end(), std::clamp(stats.mu, 0.0, 1.0));
    return out;
  }
  const double scale = stats.sigma / ps.sigma;
  for (std::size_t i = 0; i < n; ++i) out[i] = std::clamp((head[i] - ps.mu) * scale + stats.mu, 0.0, 1.0);
  return out;
}

inline double mse_loss(std::span<const double> recon, std::span<const double> target) {
  if (recon.size() != target.size())
    throw ContractError("mse_loss length mismatch: " + std::to_string(recon.size()) + " vs " +
                        std::to_string(target.size()));
  if (recon.empty()) throw ContractError("mse_loss of empty vectors");
  double s = 0.0;
  for (std::size_t i = 0; i < recon.size(); ++i) {
    const double d = recon[i] - target[i];
    s += d * d;
  }
  return s / static_cast<double>(recon.size());
}

/// dL/dr of the MSE loss: 2 (r - t) / N.
inline std::vector<double> mse_grad(std::span<const double> recon, std::span<const double> target) {
  if (recon.size() != target.size()) throw ContractError("mse_grad length mismatch");
  std::vector<double> g(recon.size());
  const double k = 2.0 / static_cast<double>(recon.size());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = k * (recon[i] - target[i]);
  return g;
}

/// Pulls `upstream` = dL/dr back through rescale_probs to dL/dp' for the
/// probability sub-vector `head`. Clipped outputs pass no gradient; the
/// zero-spread branch has an all-zero Jacobian.
inline std::vector<double> rescale_jacobian_vjp(std::span<const double> head, const ChannelStats& stats,
                                                std::span<const double> upstream) {
  if (head.size() != upstream.size())
    throw ContractError("rescale_jacobian_vjp length mismatch: " + std::to_string(head.size()) + " vs " +
                        std::to_string(upstream.size()));
  const std::size_t n = head.size();
  std::vector<double> out(n, 0.0);
  if (n == 0) return out;
  const ChannelStats ps = channel_stats(head);
  if (ps.sigma <= kSpreadEpsilon) return out;

  const double scale = stats.sigma / ps.sigma;
  const double inv_n = 1.0 / static_cast<double>(n);
  double g_sum = 0.0, gc_sum = 0.0;
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double z = (head[i] - ps.mu) * scale + stats.mu;
    g[i] = (z >= 0.0 && z <= 1.0) ? upstream[i] : 0.0;
    g_sum += g[i];
    gc_sum += g[i] * (head[i] - ps.mu);
  }
  const double g_mean = g_sum * inv_n;
  const double cov_term = gc_sum * inv_n / (ps.sigma * ps.sigma);
  for (std::size_t j = 0; j < n; ++j) out[j] = scale * (g[j] - g_mean - (head[j] - ps.mu) * cov_term);
  return out;
}

/// Area-weighted resampling to `w` x `h`; each output pixel averages the
/// source pixels it covers, weighted by overlap.
inline UnitImage resize_area(const UnitImage& src, std::size_t w, std::size_t h) {
  if (w == 0 || h == 0) throw ConfigError("resize target must be non-empty");
  if (w == src.width && h == src.height) return src;
  auto weights = [](std::size_t from, std::size_t to) {
    // weights[o] = list of (source index, overlap fraction)
    std::vector<std::vector<std::pair<std::size_t, double>>> wt(to);
    const double ratio = static_cast<double>(from) / static_cast<double>(to);
    for (std::size_t o = 0; o < to; ++o) {
      const double lo = o * ratio, hi = (o + 1) * ratio;
      for (auto s = static_cast<std::size_t>(std::floor(lo)); s < from && s < hi; ++s) {
        const double overlap = std::min(hi, s + 1.0) - std::max(lo, static_cast<double>(s));
        if (overlap > 0.0) wt[o].emplace_back(s, overlap / ratio);
      }
    }
    return wt;
  };
  const auto wx = weights(src.width, w), wy = weights(src.height, h);
  std::vector<double> v(w * h * src.channels, 0.0);
  for (std::size_t r = 0; r < h; ++r)
    for (std::size_t c = 0; c < w; ++c)
      for (std::size_t ch = 0; ch < src.channels; ++ch) {
        double acc = 0.0;
        for (auto [sy, fy] : wy[r])
          for (auto [sx, fx] : wx[c]) acc += fy * fx * src.at(sy, sx, ch);
        v[(r * w + c) * src.channels + ch] = std::clamp(acc, 0.0, 1.0);
      }
  return UnitImage(w, h, src.channels, std::move(v));
}

}  // namespace mpmqir

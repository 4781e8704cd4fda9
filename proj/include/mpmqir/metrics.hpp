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

// Reconstruction quality: PSNR (MAX = 1), Gaussian-window SSIM over the valid
// region, and the parameter compression ratio.

#include <cmath>
#include <cstddef>
#include <cstdio>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mpmqir/error.hpp"
#include "mpmqir/postproc.hpp"

namespace mpmqir {

struct SsimConfig {
  std::size_t window = 11;
  double sigma = 1.5;
  double dynamic_range = 1.0;
  double k1 = 0.01;
  double k2 = 0.03;

  double c1() const { return (k1 * dynamic_range) * (k1 * dynamic_range); }
  double c2() const { return (k2 * dynamic_range) * (k2 * dynamic_range); }

  /// Normalized 1-D Gaussian taps; the 2-D window is their outer product.
  std::vector<double> taps() const {
    if (window % 2 == 0 || window == 0) throw ConfigError("SSIM window size must be odd");
    std::vector<double> w(window);
    const double r = static_cast<double>(window / 2);
    double sum = 0.0;
    for (std::size_t i = 0; i < window; ++i) {
      const double x = static_cast<double>(i) - r;
      w[i] = std::exp(-0.5 * x * x / (sigma * sigma));
      sum += w[i];
    }
    for (double& v : w) v /= sum;
    return w;
  }
};

namespace detail {

inline void check_same_shape(const UnitImage& x, const UnitImage& y) {
  if (x.width != y.width || x.height != y.height || x.channels != y.channels)
    throw ContractError("image shapes differ: " + std::to_string(x.width) + "x" + std::to_string(x.height) + "x" +
                        std::to_string(x.channels) + " vs " + std::to_string(y.width) + "x" +
                        std::to_string(y.height) + "x" + std::to_string(y.channels));
}

}  // namespace detail

inline double psnr_db(double mse) {
  if (mse <= 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / mse);
}

/// PSNR in dB over all values of two unit-domain images; +inf when identical.
inline double psnr(const UnitImage& x, const UnitImage& y) {
  detail::check_same_shape(x, y);
  return psnr_db(mse_loss(x.values, y.values));
}

/// Mean SSIM of two single-channel planes of `width` x `height`, using only
/// window positions that lie fully inside the image.
inline double ssim_plane(std::span<const double> x, std::span<const double> y, std::size_t width,
                         std::size_t height, const SsimConfig& cfg = {}) {
  if (x.size() != width * height || y.size() != width * height) throw ContractError("ssim plane size mismatch");
  const std::size_t win = cfg.window;
  if (width < win || height < win)
    throw ContractError("image " + std::to_string(width) + "x" + std::to_string(height) +
                        " is smaller than the SSIM window " + std::to_string(win));
  const std::vector<double> w = cfg.taps();
  const double c1 = cfg.c1(), c2 = cfg.c2();
  const std::size_t out_w = width - win + 1, out_h = height - win + 1;

  // Horizontal pass then vertical pass over the five moment planes.
  auto blur = [&](auto value) {
    std::vector<double> horiz(height * out_w);
    for (std::size_t r = 0; r < height; ++r)
      for (std::size_t c = 0; c < out_w; ++c) {
        double acc = 0.0;
        for (std::size_t k = 0; k < win; ++k) acc += w[k] * value(r * width + c + k);
        horiz[r * out_w + c] = acc;
      }
    std::vector<double> out(out_h * out_w);
    for (std::size_t r = 0; r < out_h; ++r)
      for (std::size_t c = 0; c < out_w; ++c) {
        double acc = 0.0;
        for (std::size_t k = 0; k < win; ++k) acc += w[k] * horiz[(r + k) * out_w + c];
        out[r * out_w + c] = acc;
      }
    return out;
  };
  const auto mx = blur([&](std::size_t i) { return x[i]; });
  const auto my = blur([&](std::size_t i) { return y[i]; });
  const auto mxx = blur([&](std::size_t i) { return x[i] * x[i]; });
  const auto myy = blur([&](std::size_t i) { return y[i] * y[i]; });
  const auto mxy = blur([&](std::size_t i) { return x[i] * y[i]; });

  double total = 0.0;
  for (std::size_t i = 0; i < mx.size(); ++i) {
    const double vx = mxx[i] - mx[i] * mx[i];
    const double vy = myy[i] - my[i] * my[i];
    const double cxy = mxy[i] - mx[i] * my[i];
    total += ((2.0 * mx[i] * my[i] + c1) * (2.0 * cxy + c2)) /
             ((mx[i] * mx[i] + my[i] * my[i] + c1) * (vx + vy + c2));
  }
  return total / static_cast<double>(mx.size());
}

/// Mean over channels of the per-channel SSIM.
inline double ssim(const UnitImage& x, const UnitImage& y, const SsimConfig& cfg = {}) {
  detail::check_same_shape(x, y);
  double s = 0.0;
  for (std::size_t ch = 0; ch < x.channels; ++ch) s += ssim_plane(x.channel(ch), y.channel(ch), x.width, x.height, cfg);
  return s / static_cast<double>(x.channels);
}

/// Trainable parameters per channel over pixels per channel.
inline double pcr(std::size_t n_theta, std::size_t width, std::size_t height) {
  if (n_theta == 0 || width == 0 || height == 0) throw ContractError("pcr needs positive inputs");
  return static_cast<double>(n_theta) / static_cast<double>(width * height);
}

struct ChannelQuality {
  double psnr_db = 0.0;
  std::optional<double> ssim;  // absent when the image is smaller than the window
};

struct QualityReport {
  std::vector<ChannelQuality> channels;
  double mean_psnr_db = 0.0;
  std::optional<double> mean_ssim;
  std::optional<std::size_t> n_theta;
  std::optional<double> pcr;
  std::size_t width = 0;
  std::size_t height = 0;

  bool identical() const { return std::isinf(mean_psnr_db); }
};

/// Averages per-channel PSNR and SSIM. Any infinite channel PSNR makes the mean infinite.
inline QualityReport multichannel_report(std::span<const ChannelQuality> per_channel, std::size_t width,
                                         std::size_t height, std::optional<std::size_t> n_theta = std::nullopt) {
  if (per_channel.empty()) throw ContractError("quality report needs at least one channel");
  QualityReport r;
  r.channels.assign(per_channel.begin(), per_channel.end());
  r.width = width;
  r.height = height;
  double ps = 0.0, ss = 0.0;
  bool all_ssim = true;
  for (const auto& c : per_channel) {
    ps += c.psnr_db;
    if (c.ssim) ss += *c.ssim;
    else all_ssim = false;
  }
  const double n = static_cast<double>(per_channel.size());
  r.mean_psnr_db = ps / n;
  if (all_ssim) r.mean_ssim = ss / n;
  if (n_theta) {
    r.n_theta = n_theta;
    r.pcr = pcr(*n_theta, width, height);
  }
  return r;
}

/// Per-channel PSNR and SSIM of `recon` against `original`.
inline QualityReport evaluate(const UnitImage& original, const UnitImage& recon,
                              std::optional<std::size_t> n_theta = std::nullopt, const SsimConfig& cfg = {}) {
  detail::check_same_shape(original, recon);
  std::vector<ChannelQuality> per;
  for (std::size_t ch = 0; ch < original.channels; ++ch) {
    const auto a = original.channel(ch), b = recon.channel(ch);
    ChannelQuality q;
    q.psnr_db = psnr_db(mse_loss(a, b));
    if (original.width >= cfg.window && original.height >= cfg.window)
      q.ssim = ssim_plane(a, b, original.width, original.height, cfg);
    per.push_back(q);
  }
  return multichannel_report(per, original.width, original.height, n_theta);
}

inline std::string fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

/// Full-precision values plus two-decimal display strings. Infinite PSNR is
/// written as null with "identical": true.
inline nlohmann::json to_json(const QualityReport& r) {
  using nlohmann::json;
  auto psnr_value = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  auto psnr_display = [](double v) { return std::isfinite(v) ? json(fixed2(v)) : json("inf"); };
  json channels = json::array();
  for (const auto& c : r.channels) {
    json jc = {{"psnr_db", psnr_value(c.psnr_db)}, {"psnr_display", psnr_display(c.psnr_db)}};
    jc["ssim"] = c.ssim ? json(*c.ssim) : json(nullptr);
    if (c.ssim) jc["ssim_display"] = fixed2(*c.ssim);
    channels.push_back(jc);
  }
  json j = {{"width", r.width},
            {"height", r.height},
            {"channels", channels},
            {"psnr_db", psnr_value(r.mean_psnr_db)},
            {"psnr_display", psnr_display(r.mean_psnr_db)},
            {"identical", r.identical()}};
  j["ssim"] = r.mean_ssim ? json(*r.mean_ssim) : json(nullptr);
  if (r.mean_ssim) j["ssim_display"] = fixed2(*r.mean_ssim);
  if (r.n_theta) j["n_theta"] = *r.n_theta;
  if (r.pcr) {
    j["pcr"] = *r.pcr;
    j["pcr_display"] = fixed2(*r.pcr);
  }
  return j;
}

}  // namespace mpmqir

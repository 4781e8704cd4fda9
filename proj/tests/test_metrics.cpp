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

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <random>

#include "mpmqir/dataio.hpp"
#include "mpmqir/metrics.hpp"
#include "oracles.hpp"

using namespace mpmqir;

TEST(Psnr, FormulaPoints) {
  EXPECT_EQ(psnr_db(0.01), 20.0);
  EXPECT_EQ(psnr_db(0.001), 30.0);
  EXPECT_TRUE(std::isinf(psnr_db(0.0)));
}

TEST(Psnr, IdenticalImagesAreInfinite) {
  const UnitImage a(2, 1, 1, {0.1, 0.9});
  EXPECT_TRUE(std::isinf(psnr(a, a)));
  EXPECT_THROW(psnr(a, UnitImage(1, 2, 1, {0.1, 0.9})), ContractError);
}

TEST(Ssim, SelfSimilarityIsOne) {
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t c : {1u, 3u}) {
    std::vector<double> v(20 * 13 * c);
    for (auto& x : v) x = u(gen);
    const UnitImage a(20, 13, c, v);
    EXPECT_NEAR(ssim(a, a), 1.0, 1e-12);
  }
}

TEST(Ssim, Symmetric) {
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(16 * 16), w(16 * 16);
  for (auto& x : v) x = u(gen);
  for (auto& x : w) x = u(gen);
  const UnitImage a(16, 16, 1, v), b(16, 16, 1, w);
  EXPECT_EQ(ssim(a, b), ssim(b, a));
}

TEST(Ssim, SmallerThanWindow) {
  const UnitImage a(4, 4, 1, std::vector<double>(16, 0.5));
  EXPECT_THROW(ssim(a, a), ContractError);
  const auto r = evaluate(a, a);
  EXPECT_FALSE(r.mean_ssim.has_value());
}

TEST(Ssim, TapsNormalized) {
  const auto t = SsimConfig{}.taps();
  double s = 0;
  for (double v : t) s += v;
  EXPECT_EQ(t.size(), 11u);
  EXPECT_NEAR(s, 1.0, 1e-15);
  EXPECT_EQ(t[0], t[10]);
  SsimConfig even;
  even.window = 10;
  EXPECT_THROW(even.taps(), ConfigError);
}

TEST(Ssim, GoldenPairs) {
  std::ifstream in(fixtures::data("ssim_golden.json"));
  ASSERT_TRUE(in) << "missing ssim_golden.json";
  const auto golden = nlohmann::json::parse(in);
  ASSERT_EQ(golden.size(), 5u);
  for (const auto& [name, entry] : golden.items()) {
    const auto a = normalize(read_pnm(fixtures::data(entry["a"].get<std::string>().c_str())));
    const auto b = normalize(read_pnm(fixtures::data(entry["b"].get<std::string>().c_str())));
    EXPECT_NEAR(ssim(a, b), entry["ssim"].get<double>(), 1e-6) << name;
  }
}

TEST(Pcr, TableRatios) {
  EXPECT_EQ(fixed2(pcr(540, 28, 28)), "0.69");
  EXPECT_EQ(fixed2(pcr(864, 32, 32)), "0.84");
  EXPECT_EQ(pcr(864, 32, 32), 0.84375);
  EXPECT_EQ(pcr(784, 28, 28), 1.0);
  EXPECT_THROW(pcr(0, 28, 28), ContractError);
}

TEST(MultichannelReport, MeanOfChannels) {
  const std::vector<ChannelQuality> three = {{30.0, 0.8}, {32.0, 0.9}, {34.0, 1.0}};
  const auto r = multichannel_report(three, 32, 32, 864);
  EXPECT_EQ(r.mean_psnr_db, 32.0);
  EXPECT_NEAR(*r.mean_ssim, 0.9, 1e-15);
  EXPECT_EQ(*r.pcr, 0.84375);
}

TEST(MultichannelReport, SingleChannelPassthrough) {
  const std::vector<ChannelQuality> one = {{27.5, 0.61}};
  const auto r = multichannel_report(one, 28, 28);
  EXPECT_EQ(r.mean_psnr_db, 27.5);
  EXPECT_EQ(*r.mean_ssim, 0.61);
  EXPECT_FALSE(r.pcr.has_value());
}

TEST(MultichannelReport, RgbHandComputed) {
  // Channel c of `b` differs from `a` by a constant offset d_c, so MSE_c = d_c^2.
  const std::size_t w = 12, h = 12;
  std::vector<double> av(w * h * 3), bv(w * h * 3);
  const double d[3] = {0.1, 0.01, 0.001};
  for (std::size_t i = 0; i < w * h; ++i)
    for (std::size_t c = 0; c < 3; ++c) {
      av[i * 3 + c] = 0.5;
      bv[i * 3 + c] = 0.5 + d[c];
    }
  const auto r = evaluate(UnitImage(w, h, 3, av), UnitImage(w, h, 3, bv));
  EXPECT_NEAR(r.channels[0].psnr_db, 20.0, 1e-9);
  EXPECT_NEAR(r.channels[1].psnr_db, 40.0, 1e-9);
  EXPECT_NEAR(r.channels[2].psnr_db, 60.0, 1e-9);
  EXPECT_NEAR(r.mean_psnr_db, 40.0, 1e-9);
}

TEST(ReportJson, InfiniteFlaggedIdentical) {
  const UnitImage a(11, 11, 1, std::vector<double>(121, 0.25));
  const auto j = to_json(evaluate(a, a, 540));
  EXPECT_TRUE(j["psnr_db"].is_null());
  EXPECT_TRUE(j["identical"].get<bool>());
  EXPECT_EQ(j["psnr_display"], "inf");
  EXPECT_EQ(j["ssim"].get<double>(), 1.0);
  EXPECT_EQ(j["n_theta"], 540);
}

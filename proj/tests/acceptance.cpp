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

// Acceptance gate. Prints one PASS/FAIL line per criterion and exits non-zero
// if any gating criterion fails. Criterion 6 is a report and never gates.
//
// MPMQIR_ACCEPTANCE_GRADIENT=parameter-shift|adjoint picks the gradient
// backend for the full-scale runs (criteria 5 and 6); default adjoint.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fuzz.hpp"
#include "mpmqir/ansatz.hpp"
#include "mpmqir/codec.hpp"
#include "mpmqir/dataio.hpp"
#include "mpmqir/gradient.hpp"
#include "mpmqir/metrics.hpp"
#include "mpmqir/train.hpp"
#include "oracles.hpp"

using namespace mpmqir;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void verdict(int id, const char* title, bool pass, const std::string& detail, bool gating = true) {
  std::printf("criterion %d %-28s %s  %s\n", id, title, pass ? "PASS" : (gating ? "FAIL" : "FAIL (report only)"),
              detail.c_str());
  std::fflush(stdout);
  if (!pass && gating) ++failures;
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

ByteImage mnist_digit() { return load_idx_image(fixtures::data("mnist16-images-idx3-ubyte"), 0); }

// ---------------------------------------------------------------------------

CircuitTemplate random_template(unsigned m, std::size_t gates, std::mt19937_64& gen) {
  CircuitTemplate t;
  t.num_qubits = m;
  std::uniform_int_distribution<int> kind(0, 6);
  std::uniform_int_distribution<unsigned> qubit(0, m - 1);
  while (t.gates.size() < gates) {
    const auto k = static_cast<GateKind>(kind(gen));
    const unsigned target = qubit(gen);
    if (k == GateKind::CNOT || is_controlled(k)) {
      if (m < 2) continue;
      unsigned control = qubit(gen);
      while (control == target) control = qubit(gen);
      t.gates.push_back(k == GateKind::CNOT ? Gate::cnot(control, target)
                                            : Gate::controlled(k, control, target, t.param_count++));
    } else {
      t.gates.push_back(Gate::rotation(k, target, t.param_count++));
    }
  }
  return t;
}

void simulator_correctness() {
  const auto t0 = Clock::now();
  std::mt19937_64 gen(2024);
  std::vector<CircuitTemplate> set;
  for (AnsatzId id : {AnsatzId::MPM, AnsatzId::QCNN, AnsatzId::QAE})
    for (unsigned m = 2; m <= 4; ++m)
      for (unsigned layers = 1; layers <= 3; ++layers) set.push_back(build_ansatz(id, m, layers));
  for (unsigned m = 1; m <= 4; ++m)
    for (int rep = 0; rep < 8; ++rep) set.push_back(random_template(m, 30, gen));

  double worst = 0.0;
  for (const auto& t : set) {
    const auto theta = oracle::uniform_angles(t.param_count, gen);
    const auto got = run_circuit(t, theta);
    const auto want = oracle::probabilities(t, theta);
    for (std::size_t i = 0; i < got.size(); ++i) worst = std::max(worst, std::abs(got[i] - want[i]));
  }
  double norm_dev = 0.0;
  for (unsigned m : {2u, 4u, 8u}) {
    const auto t = random_template(m, 10000, gen);
    StateVector s(m);
    evolve(s, t, oracle::uniform_angles(t.param_count, gen));
    norm_dev = std::max(norm_dev, std::abs(s.norm_squared() - 1.0));
  }
  const double secs = seconds_since(t0);
  const bool pass = worst <= 1e-12 && norm_dev <= 1e-9 && secs < 10.0;
  verdict(1, "simulator correctness", pass,
          std::to_string(set.size()) + " circuits, max |dp| " + fmt("%.2e", worst) + ", norm drift " +
              fmt("%.2e", norm_dev) + ", " + fmt("%.2f s", secs));
}

// ---------------------------------------------------------------------------

void gradient_correctness() {
  const auto t0 = Clock::now();
  std::mt19937_64 gen(4048);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  struct Shape {
    AnsatzId id;
    unsigned m, layers;
  };
  const std::vector<Shape> shapes = {{AnsatzId::MPM, 2, 1},  {AnsatzId::MPM, 2, 3},  {AnsatzId::MPM, 2, 6},
                                     {AnsatzId::MPM, 3, 1},  {AnsatzId::MPM, 3, 3},  {AnsatzId::MPM, 4, 1},
                                     {AnsatzId::MPM, 4, 2},  {AnsatzId::QCNN, 3, 2}, {AnsatzId::QCNN, 4, 2},
                                     {AnsatzId::QAE, 2, 2},  {AnsatzId::QAE, 3, 1}};
  int instances = 0, skipped = 0;
  double worst = 0.0;
  for (int attempt = 0; instances < 60 && attempt < 2000; ++attempt) {
    const Shape& s = shapes[static_cast<std::size_t>(attempt) % shapes.size()];
    const auto t = build_ansatz(s.id, s.m, s.layers);
    if (t.param_count > 24) continue;
    const std::size_t dim = std::size_t{1} << s.m;
    const std::size_t n = dim - static_cast<std::size_t>(attempt / static_cast<int>(shapes.size())) % 2;
    std::vector<double> target(n);
    for (auto& v : target) v = 0.15 + 0.7 * u(gen);
    const auto stats = channel_stats(target);
    const auto theta = oracle::uniform_angles(t.param_count, gen);
    const auto probs = run_circuit(t, theta);
    const auto hs = channel_stats(std::span<const double>(probs.data(), n));
    bool interior = hs.sigma > 1e-6;
    for (std::size_t i = 0; interior && i < n; ++i) {
      const double z = (probs[i] - hs.mu) * stats.sigma / hs.sigma + stats.mu;
      interior = z > 1e-3 && z < 1.0 - 1e-3;
    }
    if (!interior) {
      ++skipped;
      continue;
    }
    const ChannelObjective obj(t, target, stats);
    const auto grad = obj.loss_and_gradient(theta, GradientMethod::ParameterShift).grad;
    const auto fd = finite_difference_gradient(theta, [&](std::span<const double> x) { return obj.loss(x); }, 1e-5);
    for (std::size_t k = 0; k < grad.size(); ++k) worst = std::max(worst, std::abs(grad[k] - fd[k]));
    ++instances;
  }
  const double secs = seconds_since(t0);
  const bool pass = instances >= 50 && worst <= 1e-6 && secs < 60.0;
  verdict(2, "gradient correctness", pass,
          std::to_string(instances) + " instances (" + std::to_string(skipped) + " near clip skipped), max |dg| " +
              fmt("%.2e", worst) + ", " + fmt("%.2f s", secs));
}

// ---------------------------------------------------------------------------

// Rounds num/den to two decimals in integer arithmetic, half up.
long hundredths(std::size_t num, std::size_t den) {
  return static_cast<long>((200 * num + den) / (2 * den));
}

void pcr_reproduction() {
  struct Row {
    unsigned layers;
    std::size_t pixels;
    long want;
  };
  const Row rows[] = {{15, 784, 69}, {18, 784, 83}, {24, 1024, 84}};
  bool pass = true;
  std::string detail;
  for (const auto& r : rows) {
    const std::size_t n = param_count(AnsatzId::MPM, 10, r.layers);
    const long got = hundredths(n, r.pixels);
    pass = pass && got == r.want && build_mpm(10, r.layers).param_count == n;
    detail += std::to_string(n) + "/" + std::to_string(r.pixels) + "=0." + std::to_string(got) + " ";
  }
  verdict(3, "PCR reproduction", pass, detail);
}

// ---------------------------------------------------------------------------

void desk_scale() {
  const auto t0 = Clock::now();
  const ByteImage digit = denormalize(resize_area(normalize(mnist_digit()), 16, 16));
  CompressOptions opts;
  opts.layers = 6;
  opts.train.steps = 300;
  opts.train.seed = 42;
  opts.train.workers = 1;
  const auto r = compress_image(digit, opts);
  const double secs = seconds_since(t0);
  const bool pass = r.checkpoint.qubits == 8 && r.report.mean_psnr_db >= 25.0 && secs < 300.0;
  verdict(4, "desk-scale convergence", pass,
          "16x16 m=" + std::to_string(r.checkpoint.qubits) + " L=6 300 steps parameter-shift: PSNR " +
              fmt("%.2f dB", r.report.mean_psnr_db) + ", " + fmt("%.1f s", secs));
}

// ---------------------------------------------------------------------------

struct Run {
  double mse = 0.0;
  double psnr = 0.0;
  double ssim = 0.0;
};

GradientMethod full_scale_gradient() {
  const char* env = std::getenv("MPMQIR_ACCEPTANCE_GRADIENT");
  return env ? parse_gradient_method(env) : GradientMethod::Adjoint;
}

TrainConfig full_scale_config(std::uint64_t seed) {
  TrainConfig cfg;
  cfg.steps = 1500;
  cfg.learning_rate = 0.05;
  cfg.seed = seed;
  cfg.gradient = full_scale_gradient();
  cfg.workers = 8;
  cfg.log_every = 0;
  return cfg;
}

Run train_full(AnsatzId id, unsigned layers, std::uint64_t seed) {
  CompressOptions opts;
  opts.ansatz = id;
  opts.layers = layers;
  opts.train = full_scale_config(seed);
  const auto r = compress_image(mnist_digit(), opts);
  return {r.traces[0].final_loss, r.report.mean_psnr_db, r.report.mean_ssim.value_or(0.0)};
}

std::map<std::uint64_t, Run> mpm_runs;

void full_scale() {
  const auto t0 = Clock::now();
  // Backend agreement at this geometry, so the adjoint runs stand in for the shift rule.
  const auto t = build_mpm(10, 15);
  const UnitImage target = normalize(mnist_digit());
  const auto plane = target.channel(0);
  const ChannelObjective obj(t, plane, channel_stats(plane));
  const auto theta = initial_params(t.param_count, full_scale_config(1));
  GradientOptions go;
  go.workers = 8;
  const auto a = obj.loss_and_gradient(theta, GradientMethod::Adjoint).grad;
  const auto s = obj.loss_and_gradient(theta, GradientMethod::ParameterShift, go).grad;
  double agree = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) agree = std::max(agree, std::abs(a[k] - s[k]));

  int hits = 0;
  std::string detail;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Run r = train_full(AnsatzId::MPM, 15, seed);
    mpm_runs[seed] = r;
    hits += (r.psnr >= 28.0 && r.ssim >= 0.70) ? 1 : 0;
    detail += fmt("%.2f", r.psnr) + "/" + fmt("%.3f", r.ssim) + " ";
  }
  const double secs = seconds_since(t0);
  const bool pass = hits >= 3 && agree < 1e-10 && secs <= 1800.0;
  verdict(5, "full-scale target", pass,
          "seeds 1-5 PSNR/SSIM " + detail + "(" + std::to_string(hits) + "/5 pass), gradient " +
              std::string(to_string(full_scale_gradient())) + ", adjoint-vs-shift " + fmt("%.1e", agree) + ", " +
              fmt("%.0f s", secs));
}

// ---------------------------------------------------------------------------

double median3(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

void method_ordering() {
  const auto t0 = Clock::now();
  const std::size_t budget = param_count(AnsatzId::MPM, 10, 15);
  std::map<AnsatzId, double> med;
  std::string detail;
  bool matched = true;
  for (AnsatzId id : {AnsatzId::MPM, AnsatzId::QCNN, AnsatzId::QAE}) {
    const unsigned layers = id == AnsatzId::MPM ? 15 : max_layers_within(id, 10, budget);
    const std::size_t n = param_count(id, 10, layers);
    matched = matched && std::abs(static_cast<double>(n) - static_cast<double>(budget)) <= 0.05 * budget;
    std::vector<double> mses;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      const Run r = id == AnsatzId::MPM && mpm_runs.count(seed) ? mpm_runs[seed] : train_full(id, layers, seed);
      mses.push_back(r.mse);
    }
    med[id] = median3(mses);
    detail += std::string(to_string(id)) + " L=" + std::to_string(layers) + " N=" + std::to_string(n) +
              " median MSE " + fmt("%.3e", med[id]) + " (" + fmt("%.2f dB", psnr_db(med[id])) + "); ";
  }
  const bool pass = matched && med[AnsatzId::MPM] <= med[AnsatzId::QCNN] && med[AnsatzId::MPM] <= med[AnsatzId::QAE];
  verdict(6, "method ordering", pass, detail + fmt("%.0f s", seconds_since(t0)), false);
}

// ---------------------------------------------------------------------------

void metrics_fidelity() {
  bool pass = psnr_db(0.001) == 30.0;
  std::string detail = "PSNR(1e-3)=" + fmt("%.17g", psnr_db(0.001));

  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double self = 0.0;
  for (std::size_t c : {1u, 3u}) {
    std::vector<double> v(28 * 28 * c);
    for (auto& x : v) x = u(gen);
    const UnitImage img(28, 28, c, v);
    self = std::max(self, std::abs(ssim(img, img) - 1.0));
  }
  pass = pass && self <= 1e-12;
  detail += ", |SSIM(x,x)-1| " + fmt("%.1e", self);

  std::ifstream in(fixtures::data("ssim_golden.json"));
  const auto golden = nlohmann::json::parse(in);
  double worst = 0.0;
  for (const auto& [name, e] : golden.items()) {
    const auto a = normalize(read_pnm(fixtures::data(e["a"].get<std::string>().c_str())));
    const auto b = normalize(read_pnm(fixtures::data(e["b"].get<std::string>().c_str())));
    worst = std::max(worst, std::abs(ssim(a, b) - e["ssim"].get<double>()));
  }
  pass = pass && golden.size() >= 5 && worst <= 1e-6;
  detail += ", " + std::to_string(golden.size()) + " golden pairs max dev " + fmt("%.1e", worst);
  verdict(7, "metrics fidelity", pass, detail);
}

// ---------------------------------------------------------------------------

void format_robustness() {
  std::mt19937_64 gen(16);
  bool roundtrip = true;
  for (std::size_t c : {1u, 3u}) {
    Checkpoint k;
    k.qubits = 10;
    k.layers = 15;
    k.width = 28;
    k.height = 28;
    k.channels = c;
    for (std::size_t ch = 0; ch < c; ++ch) {
      k.stats.push_back({0.13, 0.3});
      k.params.push_back(oracle::uniform_angles(k.n_theta(), gen));
    }
    const Bytes b = encode_checkpoint(k);
    const Checkpoint back = decode_checkpoint(b);
    roundtrip = roundtrip && back == k && encode_checkpoint(back) == b;
  }

  // Determinism across runs, and against goldens decoded by an independent
  // numpy implementation on a different platform stack.
  bool deterministic = true;
  for (const char* name : {"decode_m2_zero", "decode_m4_rgb"}) {
    const auto k = read_checkpoint(fixtures::data((std::string(name) + ".mpmq").c_str()));
    const ByteImage first = decode_checkpoint_to_image(k), second = decode_checkpoint_to_image(k);
    const std::string ext = k.channels == 1 ? ".pgm" : ".ppm";
    const ByteImage golden = read_pnm(fixtures::data((std::string(name) + ext).c_str()));
    deterministic = deterministic && first == second && first == golden;
  }

  const auto seeds = fuzz::standard_seeds(
      read_file(fixtures::data("idx1.bin")), read_file(fixtures::data("cifar2.bin")),
      read_file(fixtures::data("ssim_half_a.pgm")), read_file(fixtures::data("ssim_rgb_a.ppm")),
      read_file(fixtures::data("decode_m2_zero.mpmq")), read_file(fixtures::data("decode_m4_rgb.mpmq")));
  const auto out = fuzz::run(seeds, 250, 20240817);
  for (const auto& f : out.failures) std::printf("  fuzz: %s\n", f.c_str());
  const bool pass = roundtrip && deterministic && out.cases >= 1000 && out.ok();
  verdict(8, "format robustness", pass,
          std::string("roundtrip ") + (roundtrip ? "exact" : "MISMATCH") + ", decode vs golden " +
              (deterministic ? "identical" : "DIFFERENT") + ", fuzz " + std::to_string(out.cases) + " cases: " +
              std::to_string(out.positioned) + " positioned errors, " + std::to_string(out.parsed) + " parsed, " +
              std::to_string(out.failures.size()) + " bad");
}

}  // namespace

int main() {
  try {
    simulator_correctness();
    gradient_correctness();
    pcr_reproduction();
    desk_scale();
    full_scale();
    method_ordering();
    metrics_fidelity();
    format_robustness();
  } catch (const std::exception& e) {
    std::printf("acceptance aborted: %s\n", e.what());
    return 2;
  }
  std::printf("%s\n", failures == 0 ? "acceptance: all gating criteria pass" : "acceptance: gating failures");
  return failures == 0 ? 0 : 1;
}

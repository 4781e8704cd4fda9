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

// Adam and the per-channel training loop:
// run_circuit -> rescale_probs -> mse_loss -> dL/dr -> rescale VJP ->
// circuit gradient -> adam_step.

#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <numbers>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mpmqir/circuit.hpp"
#include "mpmqir/error.hpp"
#include "mpmqir/gradient.hpp"
#include "mpmqir/metrics.hpp"
#include "mpmqir/postproc.hpp"
#include "mpmqir/statevec.hpp"

namespace mpmqir {

enum class InitKind { UniformTwoPi, SmallNormal };
enum class GradientMethod { ParameterShift, Adjoint };

inline std::string_view to_string(GradientMethod g) {
  return g == GradientMethod::ParameterShift ? "parameter-shift" : "adjoint";
}

inline GradientMethod parse_gradient_method(std::string_view s) {
  if (s == "parameter-shift" || s == "shift") return GradientMethod::ParameterShift;
  if (s == "adjoint") return GradientMethod::Adjoint;
  throw ConfigError("unknown gradient method '" + std::string(s) + "' (expected parameter-shift or adjoint)");
}

inline std::string_view to_string(InitKind k) { return k == InitKind::UniformTwoPi ? "uniform" : "normal"; }

inline InitKind parse_init_kind(std::string_view s) {
  if (s == "uniform") return InitKind::UniformTwoPi;
  if (s == "normal") return InitKind::SmallNormal;
  throw ConfigError("unknown init '" + std::string(s) + "' (expected uniform or normal)");
}

struct TrainConfig {
  std::size_t steps = 1000;
  double learning_rate = 0.05;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 42;
  InitKind init = InitKind::UniformTwoPi;
  double init_scale = 0.1;  // standard deviation for SmallNormal
  std::size_t log_every = 10;
  std::optional<double> target_psnr_db;
  GradientMethod gradient = GradientMethod::ParameterShift;
  unsigned workers = 1;

  void validate() const {
    if (steps < 1) throw ConfigError("steps must be >= 1");
    if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
    if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0)) throw ConfigError("adam beta1 must be in [0, 1)");
    if (!(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) throw ConfigError("adam beta2 must be in [0, 1)");
    if (!(adam_eps > 0.0)) throw ConfigError("adam epsilon must be positive");
    if (init == InitKind::SmallNormal && !(init_scale > 0.0)) throw ConfigError("init scale must be positive");
    if (workers < 1) throw ConfigError("workers must be >= 1");
  }
};

/// Portable [0, 1) doubles from the 53 high bits of a 64-bit Mersenne twister.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
  double normal() {  // Box-Muller
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 gen_;
};

inline std::vector<double> initial_params(std::size_t count, const TrainConfig& cfg) {
  Rng rng(cfg.seed);
  std::vector<double> p(count);
  for (double& x : p)
    x = cfg.init == InitKind::UniformTwoPi ? 2.0 * std::numbers::pi * rng.uniform() : cfg.init_scale * rng.normal();
  return p;
}

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::size_t t = 0;  // number of completed steps

  explicit AdamState(std::size_t n = 0) : m(n, 0.0), v(n, 0.0) {}
};

/// One bias-corrected Adam update in place.
inline void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
                      const TrainConfig& cfg) {
  if (params.size() != grads.size() || state.m.size() != params.size() || state.v.size() != params.size())
    throw ContractError("adam_step length mismatch");
  for (std::size_t k = 0; k < grads.size(); ++k)
    if (!std::isfinite(grads[k]))
      throw TrainingError("non-finite gradient component " + std::to_string(k) + " at step " +
                          std::to_string(state.t));
  ++state.t;
  const double b1 = cfg.adam_beta1, b2 = cfg.adam_beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.t));
  for (std::size_t k = 0; k < params.size(); ++k) {
    state.m[k] = b1 * state.m[k] + (1.0 - b1) * grads[k];
    state.v[k] = b2 * state.v[k] + (1.0 - b2) * grads[k] * grads[k];
    const double m_hat = state.m[k] / c1, v_hat = state.v[k] / c2;
    params[k] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.adam_eps);
  }
}

/// Loss of one channel as a function of circuit parameters.
class ChannelObjective {
 public:
  ChannelObjective(const CircuitTemplate& tmpl, std::span<const double> target, ChannelStats stats)
      : tmpl_(tmpl), target_(target.begin(), target.end()), stats_(stats) {
    validate(tmpl_);
    if (target_.empty()) throw ContractError("empty target channel");
    if ((std::size_t{1} << tmpl_.num_qubits) < target_.size())
      throw ContractError(std::to_string(target_.size()) + " pixels do not fit in " +
                          std::to_string(tmpl_.num_qubits) + " qubits");
    check_stats(stats_);
  }

  const CircuitTemplate& circuit() const noexcept { return tmpl_; }
  std::span<const double> target() const noexcept { return target_; }
  const ChannelStats& stats() const noexcept { return stats_; }

  std::vector<double> reconstruct(std::span<const double> params) const {
    return rescale_probs(run_circuit(tmpl_, params), target_.size(), stats_);
  }

  double loss(std::span<const double> params) const { return mse_loss(reconstruct(params), target_); }

  struct Evaluation {
    double loss;
    std::vector<double> recon;
    std::vector<double> grad;
  };

  Evaluation loss_and_gradient(std::span<const double> params, GradientMethod method, const GradientOptions& opts = {}) const {
    const ProbabilityVector probs = run_circuit(tmpl_, params);
    const std::size_t n = target_.size();
    const std::span<const double> head(probs.data(), n);
    Evaluation e;
    e.recon = rescale_probs(probs, n, stats_);
    e.loss = mse_loss(e.recon, target_);
    const std::vector<double> dr = mse_grad(e.recon, target_);
    std::vector<double> weights = rescale_jacobian_vjp(head, stats_, dr);
    weights.resize(probs.size(), 0.0);  // probability mass past N is unpenalized
    e.grad = method == GradientMethod::ParameterShift ? prob_jacobian_parameter_shift(tmpl_, params, weights, opts)
                                                      : adjoint_gradient(tmpl_, params, weights);
    return e;
  }

 private:
  const CircuitTemplate& tmpl_;
  std::vector<double> target_;
  ChannelStats stats_;
};

struct TraceRecord {
  std::size_t step;
  double loss;
  double psnr;
};

struct TrainTrace {
  std::vector<TraceRecord> records;
  std::vector<double> params;  // final parameters
  std::vector<double> recon;   // reconstruction at the final parameters
  double final_loss = 0.0;
  std::size_t steps_run = 0;
  bool early_stopped = false;

  double final_psnr() const { return psnr_db(final_loss); }
};

/// Trains one channel from the seeded initial parameters. `on_record`, when
/// set, is called for each logged record as it is produced.
inline TrainTrace train_channel(const CircuitTemplate& tmpl, std::span<const double> target, const ChannelStats& stats,
                                const TrainConfig& cfg,
                                const std::function<void(const TraceRecord&)>& on_record = {}) {
  cfg.validate();
  const ChannelObjective objective(tmpl, target, stats);
  TrainTrace trace;
  trace.params = initial_params(tmpl.param_count, cfg);
  AdamState adam(tmpl.param_count);
  GradientOptions opts;
  opts.workers = cfg.workers;

  auto log = [&](std::size_t step, double loss) {
    trace.records.push_back({step, loss, psnr_db(loss)});
    if (on_record) on_record(trace.records.back());
  };
  auto check_finite = [](double loss, std::size_t step) {
    if (!std::isfinite(loss)) throw TrainingError("non-finite loss at step " + std::to_string(step));
  };

  for (std::size_t step = 0;; ++step) {
    const bool last = step == cfg.steps;
    auto eval = last ? ChannelObjective::Evaluation{objective.loss(trace.params), objective.reconstruct(trace.params), {}}
                     : objective.loss_and_gradient(trace.params, cfg.gradient, opts);
    check_finite(eval.loss, step);
    const bool reached = cfg.target_psnr_db && psnr_db(eval.loss) >= *cfg.target_psnr_db;
    if (last || reached || step == 0 || (cfg.log_every > 0 && step % cfg.log_every == 0)) log(step, eval.loss);
    if (last || reached) {
      trace.final_loss = eval.loss;
      trace.recon = std::move(eval.recon);
      trace.steps_run = step;
      trace.early_stopped = reached && !last;
      break;
    }
    adam_step(trace.params, eval.grad, adam, cfg);
  }
  return trace;
}

inline void write_trace_csv(std::ostream& os, const TrainTrace& trace) {
  os << "step,loss,psnr\n";
  char buf[96];
  for (const auto& r : trace.records) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", r.step, r.loss, r.psnr);
    os << buf;
  }
}

inline nlohmann::json trace_to_json(const TrainTrace& trace) {
  nlohmann::json records = nlohmann::json::array();
  for (const auto& r : trace.records) {
    nlohmann::json psnr = std::isfinite(r.psnr) ? nlohmann::json(r.psnr) : nlohmann::json(nullptr);
    records.push_back({{"step", r.step}, {"loss", r.loss}, {"psnr", psnr}});
  }
  return {{"records", records},
          {"steps_run", trace.steps_run},
          {"early_stopped", trace.early_stopped},
          {"final_loss", trace.final_loss}};
}

}  // namespace mpmqir

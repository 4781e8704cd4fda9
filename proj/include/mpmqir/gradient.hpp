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

// Gradients of weighted probability sums L = sum_i w_i p_i(theta) through a
// circuit template.
//
//  * prob_jacobian_parameter_shift: shifted-circuit evaluations (two-term rule
//    for Pauli rotations, four-term rule for controlled rotations).
//  * adjoint_gradient: reverse sweep over the gate list, same values in
//    O(gates) work; used as the fast path for large training runs.
//  * finite_difference_gradient: central differences of an arbitrary loss,
//    the validation oracle.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "mpmqir/circuit.hpp"
#include "mpmqir/error.hpp"
#include "mpmqir/statevec.hpp"

namespace mpmqir {

struct GradientOptions {
  unsigned workers = 1;
  /// Upper bound on memory spent caching intermediate states for the shift rule.
  std::size_t snapshot_budget_bytes = std::size_t{256} << 20;
  /// Incremented by the number of shifted circuits evaluated, when set.
  std::atomic<std::size_t>* circuit_runs = nullptr;
};

namespace detail {

inline void check_weights(const CircuitTemplate& t, std::span<const double> params, std::span<const double> w) {
  check_params(t, params);
  const std::size_t dim = std::size_t{1} << t.num_qubits;
  if (w.size() != dim)
    throw ContractError("row weight vector has " + std::to_string(w.size()) + " entries, expected " +
                        std::to_string(dim));
}

inline double weighted_probability(const StateVector& s, std::span<const double> w) noexcept {
  const auto a = s.amplitudes();
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += w[i] * std::norm(a[i]);
  return acc;
}

// Runs f(0..count) across `workers` threads with static striding. Each index
// is processed exactly once, so writes to per-index slots need no locking.
template <typename F>
inline void parallel_for(std::size_t count, unsigned workers, F&& f) {
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) f(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < count; i += workers) f(i);
    });
  for (auto& th : pool) th.join();
}

// <lambda| G |psi>, G the generator of the rotation `g`: the Pauli on the
// target, projected onto control = 1 for controlled rotations.
inline Complex generator_overlap(const StateVector& lambda, const StateVector& psi, const Gate& g) noexcept {
  const Complex* l = lambda.amplitudes().data();
  const Complex* p = psi.amplitudes().data();
  Complex acc{0.0, 0.0};
  const std::size_t control = control_mask(g);
  switch (g.kind) {
    case GateKind::RX:
    case GateKind::CRX:
      for_each_pair(psi.dim(), g.target, control, [&](std::size_t i0, std::size_t i1) {
        acc += std::conj(l[i0]) * p[i1] + std::conj(l[i1]) * p[i0];
      });
      break;
    case GateKind::RY:
    case GateKind::CRY:
      for_each_pair(psi.dim(), g.target, control, [&](std::size_t i0, std::size_t i1) {
        acc += Complex{0.0, -1.0} * std::conj(l[i0]) * p[i1] + Complex{0.0, 1.0} * std::conj(l[i1]) * p[i0];
      });
      break;
    case GateKind::RZ:
    case GateKind::CRZ:
      for_each_pair(psi.dim(), g.target, control, [&](std::size_t i0, std::size_t i1) {
        acc += std::conj(l[i0]) * p[i0] - std::conj(l[i1]) * p[i1];
      });
      break;
    case GateKind::CNOT:
      break;
  }
  return acc;
}

struct ShiftTerm {
  double shift;
  double coeff;
};

// Pauli rotations: f' = [f(+pi/2) - f(-pi/2)] / 2.
// Controlled rotations (generator spectrum {0, +-1/2}):
// f' = c+ [f(+pi/2) - f(-pi/2)] - c- [f(+3pi/2) - f(-3pi/2)], c+- = (sqrt2 +- 1) / (4 sqrt2).
inline std::vector<ShiftTerm> shift_rule(GateKind k) {
  constexpr double half_pi = std::numbers::pi / 2.0;
  if (k == GateKind::CRX || k == GateKind::CRY || k == GateKind::CRZ) {
    constexpr double r2 = std::numbers::sqrt2;
    const double cp = (r2 + 1.0) / (4.0 * r2), cm = (r2 - 1.0) / (4.0 * r2);
    return {{half_pi, cp}, {-half_pi, -cp}, {3.0 * half_pi, -cm}, {-3.0 * half_pi, cm}};
  }
  return {{half_pi, 0.5}, {-half_pi, -0.5}};
}

}  // namespace detail

/// Number of shifted-circuit evaluations the shift rule needs for `t`.
inline std::size_t parameter_shift_cost(const CircuitTemplate& t) {
  std::size_t n = 0;
  for (const Gate& g : t.gates)
    if (g.param_slot) n += detail::shift_rule(g.kind).size();
  return n;
}

/// dL/dtheta for L = sum_i row_weights[i] * p_i(theta) by the parameter-shift
/// rule. Shifts are applied per gate occurrence and accumulated into the
/// gate's slot in gate order. Intermediate states before parameterized gates
/// are cached (within `snapshot_budget_bytes`) so each shifted circuit only
/// replays the gates after the shifted one.
inline std::vector<double> prob_jacobian_parameter_shift(const CircuitTemplate& t, std::span<const double> params,
                                                         std::span<const double> row_weights,
                                                         const GradientOptions& opts = {}) {
  detail::check_weights(t, params, row_weights);
  validate(t);

  std::vector<std::size_t> occurrences;  // gate indices of parameterized gates
  for (std::size_t i = 0; i < t.gates.size(); ++i)
    if (t.gates[i].param_slot) occurrences.push_back(i);

  const std::size_t dim = std::size_t{1} << t.num_qubits;
  const std::size_t state_bytes = dim * sizeof(Complex);
  const std::size_t max_snapshots = std::max<std::size_t>(1, opts.snapshot_budget_bytes / state_bytes);
  const std::size_t stride = occurrences.empty() ? 1 : (occurrences.size() + max_snapshots - 1) / max_snapshots;

  // snapshots[j] = state just before gate occurrences[j * stride].
  std::vector<StateVector> snapshots;
  {
    StateVector s(t.num_qubits);
    std::size_t gi = 0;
    for (std::size_t j = 0; j * stride < occurrences.size(); ++j) {
      const std::size_t until = occurrences[j * stride];
      for (; gi < until; ++gi) {
        const Gate& g = t.gates[gi];
        s.apply_unchecked(g, g.param_slot ? params[*g.param_slot] : 0.0);
      }
      snapshots.push_back(s);
    }
  }

  std::vector<double> per_occurrence(occurrences.size(), 0.0);
  detail::parallel_for(occurrences.size(), opts.workers, [&](std::size_t k) {
    const std::size_t gate_index = occurrences[k];
    const Gate& shifted = t.gates[gate_index];
    const std::size_t snap = k / stride;
    const double theta = params[*shifted.param_slot];
    double derivative = 0.0;
    for (const auto& term : detail::shift_rule(shifted.kind)) {
      StateVector s = snapshots[snap];
      for (std::size_t gi = occurrences[snap * stride]; gi < gate_index; ++gi) {
        const Gate& g = t.gates[gi];
        s.apply_unchecked(g, g.param_slot ? params[*g.param_slot] : 0.0);
      }
      s.apply_unchecked(shifted, theta + term.shift);
      for (std::size_t gi = gate_index + 1; gi < t.gates.size(); ++gi) {
        const Gate& g = t.gates[gi];
        s.apply_unchecked(g, g.param_slot ? params[*g.param_slot] : 0.0);
      }
      derivative += term.coeff * detail::weighted_probability(s, row_weights);
    }
    per_occurrence[k] = derivative;
  });
  if (opts.circuit_runs) opts.circuit_runs->fetch_add(parameter_shift_cost(t));

  std::vector<double> grad(t.param_count, 0.0);
  for (std::size_t k = 0; k < occurrences.size(); ++k) grad[*t.gates[occurrences[k]].param_slot] += per_occurrence[k];
  return grad;
}

/// Same quantity as prob_jacobian_parameter_shift via one forward and one
/// reverse sweep: grad_k = Im <lambda_k| G_k |psi_k>, lambda_k the weighted
/// output state pulled back to just after gate k.
inline std::vector<double> adjoint_gradient(const CircuitTemplate& t, std::span<const double> params,
                                            std::span<const double> row_weights) {
  detail::check_weights(t, params, row_weights);
  validate(t);
  StateVector psi(t.num_qubits);
  evolve(psi, t, params);
  StateVector lambda = psi;
  {
    auto l = lambda.amplitudes();
    for (std::size_t i = 0; i < l.size(); ++i) l[i] *= row_weights[i];
  }
  std::vector<double> grad(t.param_count, 0.0);
  for (std::size_t gi = t.gates.size(); gi-- > 0;) {
    const Gate& g = t.gates[gi];
    const double theta = g.param_slot ? params[*g.param_slot] : 0.0;
    if (g.param_slot) grad[*g.param_slot] += detail::generator_overlap(lambda, psi, g).imag();
    psi.apply_unchecked(g, -theta);
    lambda.apply_unchecked(g, -theta);
  }
  return grad;
}

/// Central differences of `loss` in every parameter.
inline std::vector<double> finite_difference_gradient(std::span<const double> params,
                                                      const std::function<double(std::span<const double>)>& loss,
                                                      double h) {
  if (!(h > 0.0)) throw ContractError("finite difference step must be positive");
  std::vector<double> x(params.begin(), params.end());
  std::vector<double> grad(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double saved = x[k];
    x[k] = saved + h;
    const double up = loss(x);
    x[k] = saved - h;
    const double down = loss(x);
    x[k] = saved;
    grad[k] = (up - down) / (2.0 * h);
  }
  return grad;
}

}  // namespace mpmqir

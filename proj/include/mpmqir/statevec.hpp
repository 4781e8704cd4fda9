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

// Dense statevector simulation. Basis index i encodes qubit q in bit q, so
// qubit 0 is the least-significant bit.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mpmqir/circuit.hpp"
#include "mpmqir/error.hpp"

namespace mpmqir {

using Complex = std::complex<double>;

/// Measurement probabilities |amplitude_i|^2 over the full basis.
using ProbabilityVector = std::vector<double>;

inline constexpr unsigned kMaxQubits = 16;

namespace detail {

// Calls f(i0, i1) for every amplitude pair differing in bit `target`, with
// i0 holding the zero bit. A non-zero `cmask` restricts the visit to pairs
// whose control bit is one.
template <typename F>
inline void for_each_pair(std::size_t dim, unsigned target, std::size_t cmask, F&& f) {
  const std::size_t stride = std::size_t{1} << target;
  if (cmask == 0) {
    for (std::size_t base = 0; base < dim; base += 2 * stride)
      for (std::size_t i = base; i < base + stride; ++i) f(i, i + stride);
    return;
  }
  for (std::size_t base = 0; base < dim; base += 2 * stride)
    for (std::size_t i = base; i < base + stride; ++i)
      if (i & cmask) f(i, i + stride);
}

inline std::size_t control_mask(const Gate& g) noexcept {
  return is_controlled(g.kind) && g.control ? std::size_t{1} << *g.control : 0;
}

}  // namespace detail

class StateVector {
 public:
  /// |0...0> on `num_qubits` qubits.
  explicit StateVector(unsigned num_qubits) : num_qubits_(num_qubits) {
    if (num_qubits < 1 || num_qubits > kMaxQubits)
      throw ConfigError("qubit count " + std::to_string(num_qubits) + " outside [1, " +
                        std::to_string(kMaxQubits) + "]");
    amps_.assign(std::size_t{1} << num_qubits, Complex{0.0, 0.0});
    amps_[0] = Complex{1.0, 0.0};
  }

  unsigned num_qubits() const noexcept { return num_qubits_; }
  std::size_t dim() const noexcept { return amps_.size(); }

  std::span<const Complex> amplitudes() const noexcept { return amps_; }
  std::span<Complex> amplitudes() noexcept { return amps_; }

  void reset() {
    std::fill(amps_.begin(), amps_.end(), Complex{0.0, 0.0});
    amps_[0] = Complex{1.0, 0.0};
  }

  double norm_squared() const noexcept {
    double s = 0.0;
    for (const Complex& a : amps_) s += std::norm(a);
    return s;
  }

  ProbabilityVector probabilities() const {
    ProbabilityVector p(amps_.size());
    for (std::size_t i = 0; i < amps_.size(); ++i) p[i] = std::norm(amps_[i]);
    return p;
  }

  /// Applies `gate`. `theta` must be present exactly when the gate is parameterized.
  void apply(const Gate& gate, std::optional<double> theta = std::nullopt) {
    if (is_parameterized(gate.kind) != theta.has_value())
      throw ContractError(std::string(gate_name(gate.kind)) +
                          (theta ? ": unexpected rotation angle" : ": missing rotation angle"));
    check_qubits(gate);
    apply_unchecked(gate, theta.value_or(0.0));
  }

  /// No validation; `theta` is ignored for CNOT. Hot path of the training loop.
  void apply_unchecked(const Gate& gate, double theta) noexcept {
    Complex* a = amps_.data();
    const std::size_t n = amps_.size();
    const std::size_t cmask = detail::control_mask(gate);
    switch (gate.kind) {
      case GateKind::CNOT:
        detail::for_each_pair(n, gate.target, cmask, [a](std::size_t i0, std::size_t i1) {
          std::swap(a[i0], a[i1]);
        });
        return;
      case GateKind::RY:
      case GateKind::CRY: {
        const double c = std::cos(0.5 * theta), s = std::sin(0.5 * theta);
        detail::for_each_pair(n, gate.target, cmask, [a, c, s](std::size_t i0, std::size_t i1) {
          const double r0 = a[i0].real(), m0 = a[i0].imag();
          const double r1 = a[i1].real(), m1 = a[i1].imag();
          a[i0] = Complex{c * r0 - s * r1, c * m0 - s * m1};
          a[i1] = Complex{s * r0 + c * r1, s * m0 + c * m1};
        });
        return;
      }
      case GateKind::RX:
      case GateKind::CRX: {
        const double c = std::cos(0.5 * theta), s = std::sin(0.5 * theta);
        // [[c, -i s], [-i s, c]]
        detail::for_each_pair(n, gate.target, cmask, [a, c, s](std::size_t i0, std::size_t i1) {
          const double r0 = a[i0].real(), m0 = a[i0].imag();
          const double r1 = a[i1].real(), m1 = a[i1].imag();
          a[i0] = Complex{c * r0 + s * m1, c * m0 - s * r1};
          a[i1] = Complex{c * r1 + s * m0, c * m1 - s * r0};
        });
        return;
      }
      case GateKind::RZ:
      case GateKind::CRZ: {
        const double c = std::cos(0.5 * theta), s = std::sin(0.5 * theta);
        // diag(c - i s, c + i s)
        detail::for_each_pair(n, gate.target, cmask, [a, c, s](std::size_t i0, std::size_t i1) {
          const double r0 = a[i0].real(), m0 = a[i0].imag();
          const double r1 = a[i1].real(), m1 = a[i1].imag();
          a[i0] = Complex{c * r0 + s * m0, c * m0 - s * r0};
          a[i1] = Complex{c * r1 - s * m1, c * m1 + s * r1};
        });
        return;
      }
    }
  }

 private:
  void check_qubits(const Gate& g) const {
    if (g.target >= num_qubits_) throw ContractError("target qubit out of range");
    if (is_controlled(g.kind)) {
      if (!g.control || *g.control >= num_qubits_) throw ContractError("control qubit out of range");
      if (*g.control == g.target) throw ContractError("control equals target");
    }
  }

  unsigned num_qubits_;
  std::vector<Complex> amps_;
};

inline StateVector init_zero_state(unsigned m) { return StateVector(m); }

inline void apply_gate(StateVector& state, const Gate& gate, std::optional<double> theta) {
  state.apply(gate, theta);
}

inline void check_params(const CircuitTemplate& t, std::span<const double> params) {
  if (params.size() != t.param_count)
    throw ContractError("parameter vector has " + std::to_string(params.size()) +
                        " entries, template expects " + std::to_string(t.param_count));
}

/// Applies every gate of `t` to `state` (which is not reset first).
inline void evolve(StateVector& state, const CircuitTemplate& t, std::span<const double> params) {
  for (const Gate& g : t.gates) state.apply_unchecked(g, g.param_slot ? params[*g.param_slot] : 0.0);
}

/// Probabilities of U(params)|0...0> measured in the computational basis.
inline ProbabilityVector run_circuit(const CircuitTemplate& t, std::span<const double> params) {
  check_params(t, params);
  validate(t);
  StateVector state(t.num_qubits);
  evolve(state, t, params);
  return state.probabilities();
}

}  // namespace mpmqir

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

// Circuit templates for the bidirectional convolutional ansatz (MPM) and the
// two baseline families (QCNN variant and QAE circuit B). Parameter slots are
// numbered in gate emission order.

#include <cstddef>
#include <string>
#include <utility>

#include "mpmqir/circuit.hpp"
#include "mpmqir/error.hpp"
#include "mpmqir/statevec.hpp"

namespace mpmqir {

namespace detail {

inline void check_geometry(unsigned m, unsigned layers) {
  if (m < 2 || m > kMaxQubits)
    throw ConfigError("ansatz needs 2.." + std::to_string(kMaxQubits) + " qubits, got " + std::to_string(m));
  if (layers < 1) throw ConfigError("ansatz needs at least one layer");
}

class TemplateBuilder {
 public:
  TemplateBuilder(AnsatzId id, unsigned m, unsigned layers) {
    t_.ansatz_id = id;
    t_.num_qubits = m;
    t_.num_layers = layers;
  }

  void rot(GateKind k, unsigned q) { t_.gates.push_back(Gate::rotation(k, q, t_.param_count++)); }
  void cnot(unsigned c, unsigned q) { t_.gates.push_back(Gate::cnot(c, q)); }
  void crot(GateKind k, unsigned c, unsigned q) {
    t_.gates.push_back(Gate::controlled(k, c, q, t_.param_count++));
  }

  // RY(a) q, RY(b) q+1, CNOT q->q+1, RZ(c) q+1 over ascending adjacent pairs.
  void forward_pass() {
    for (unsigned q = 0; q + 1 < t_.num_qubits; ++q) {
      rot(GateKind::RY, q);
      rot(GateKind::RY, q + 1);
      cnot(q, q + 1);
      rot(GateKind::RZ, q + 1);
    }
  }

  // CNOT q+1->q, RX(d) q over descending adjacent pairs.
  void backward_pass() {
    for (unsigned q = t_.num_qubits - 1; q-- > 0;) {
      cnot(q + 1, q);
      rot(GateKind::RX, q);
    }
  }

  CircuitTemplate finish() && { return std::move(t_); }

 private:
  CircuitTemplate t_;
};

}  // namespace detail

/// Bidirectional convolutional ansatz: each layer is a forward pass followed
/// by a backward pass with swapped CNOT direction. 4(m-1) parameters per layer.
inline CircuitTemplate build_mpm(unsigned m, unsigned layers) {
  detail::check_geometry(m, layers);
  detail::TemplateBuilder b(AnsatzId::MPM, m, layers);
  for (unsigned l = 0; l < layers; ++l) {
    b.forward_pass();
    b.backward_pass();
  }
  return std::move(b).finish();
}

/// QCNN variant: forward passes only, with a CRY/CRZ integration block over
/// ascending adjacent pairs after every second layer.
inline CircuitTemplate build_qcnn(unsigned m, unsigned layers) {
  detail::check_geometry(m, layers);
  detail::TemplateBuilder b(AnsatzId::QCNN, m, layers);
  for (unsigned l = 0; l < layers; ++l) {
    b.forward_pass();
    if (l % 2 == 1) {
      for (unsigned q = 0; q + 1 < m; ++q) {
        b.crot(GateKind::CRY, q, q + 1);
        b.crot(GateKind::CRZ, q, q + 1);
      }
    }
  }
  return std::move(b).finish();
}

/// QAE circuit B: RY/RZ on every qubit, a CRX chain, then RY/RZ again.
inline CircuitTemplate build_qae(unsigned m, unsigned layers) {
  detail::check_geometry(m, layers);
  detail::TemplateBuilder b(AnsatzId::QAE, m, layers);
  auto rotation_set = [&] {
    for (unsigned q = 0; q < m; ++q) b.rot(GateKind::RY, q);
    for (unsigned q = 0; q < m; ++q) b.rot(GateKind::RZ, q);
  };
  for (unsigned l = 0; l < layers; ++l) {
    rotation_set();
    for (unsigned q = 0; q + 1 < m; ++q) b.crot(GateKind::CRX, q, q + 1);
    rotation_set();
  }
  return std::move(b).finish();
}

inline CircuitTemplate build_ansatz(AnsatzId id, unsigned m, unsigned layers) {
  switch (id) {
    case AnsatzId::MPM: return build_mpm(m, layers);
    case AnsatzId::QCNN: return build_qcnn(m, layers);
    case AnsatzId::QAE: return build_qae(m, layers);
  }
  throw ConfigError("unknown ansatz id");
}

/// Closed-form parameter count of the template the matching builder emits.
inline std::size_t param_count(AnsatzId id, unsigned m, unsigned layers) {
  detail::check_geometry(m, layers);
  const std::size_t pairs = m - 1, n = layers;
  switch (id) {
    case AnsatzId::MPM: return 4 * pairs * n;
    case AnsatzId::QCNN: return 3 * pairs * n + 2 * pairs * (n / 2);
    case AnsatzId::QAE: return (4 * std::size_t{m} + pairs) * n;
  }
  throw ConfigError("unknown ansatz id");
}

/// Smallest register with 2^m >= pixels.
inline unsigned qubits_for_pixels(std::size_t pixels) {
  if (pixels == 0) throw ConfigError("image has no pixels");
  unsigned m = 0;
  while ((std::size_t{1} << m) < pixels) ++m;
  if (m < 2) m = 2;  // every ansatz needs at least one qubit pair
  if (m > kMaxQubits)
    throw ConfigError(std::to_string(pixels) + " pixels need more than " + std::to_string(kMaxQubits) + " qubits");
  return m;
}

/// Largest layer count whose parameter count does not exceed `budget`;
/// 0 when even one layer is over budget.
inline unsigned max_layers_within(AnsatzId id, unsigned m, std::size_t budget) {
  unsigned best = 0;
  for (unsigned l = 1; param_count(id, m, l) <= budget; ++l) best = l;
  return best;
}

}  // namespace mpmqir

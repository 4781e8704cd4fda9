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

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mpmqir/error.hpp"

namespace mpmqir {

enum class GateKind : std::uint8_t { RX, RY, RZ, CNOT, CRX, CRY, CRZ };

constexpr bool is_parameterized(GateKind k) noexcept { return k != GateKind::CNOT; }

constexpr bool is_controlled(GateKind k) noexcept {
  return k == GateKind::CNOT || k == GateKind::CRX || k == GateKind::CRY || k == GateKind::CRZ;
}

constexpr std::string_view gate_name(GateKind k) noexcept {
  switch (k) {
    case GateKind::RX: return "RX";
    case GateKind::RY: return "RY";
    case GateKind::RZ: return "RZ";
    case GateKind::CNOT: return "CNOT";
    case GateKind::CRX: return "CRX";
    case GateKind::CRY: return "CRY";
    case GateKind::CRZ: return "CRZ";
  }
  return "?";
}

struct Gate {
  GateKind kind;
  std::optional<unsigned> control;  // set for CNOT and the controlled rotations
  unsigned target;
  std::optional<std::size_t> param_slot;  // absent for CNOT

  static Gate rotation(GateKind k, unsigned target, std::size_t slot) {
    return Gate{k, std::nullopt, target, slot};
  }
  static Gate cnot(unsigned control, unsigned target) {
    return Gate{GateKind::CNOT, control, target, std::nullopt};
  }
  static Gate controlled(GateKind k, unsigned control, unsigned target, std::size_t slot) {
    return Gate{k, control, target, slot};
  }

  friend bool operator==(const Gate&, const Gate&) = default;
};

enum class AnsatzId : std::uint8_t { MPM = 0, QCNN = 1, QAE = 2 };

inline std::string_view to_string(AnsatzId id) noexcept {
  switch (id) {
    case AnsatzId::MPM: return "mpm";
    case AnsatzId::QCNN: return "qcnn";
    case AnsatzId::QAE: return "qae";
  }
  return "?";
}

inline AnsatzId parse_ansatz_id(std::string_view s) {
  if (s == "mpm") return AnsatzId::MPM;
  if (s == "qcnn") return AnsatzId::QCNN;
  if (s == "qae") return AnsatzId::QAE;
  throw ConfigError("unknown ansatz '" + std::string(s) + "' (expected mpm, qcnn or qae)");
}

struct CircuitTemplate {
  unsigned num_qubits = 0;
  std::vector<Gate> gates;
  std::size_t param_count = 0;
  AnsatzId ansatz_id = AnsatzId::MPM;
  unsigned num_layers = 0;

  friend bool operator==(const CircuitTemplate&, const CircuitTemplate&) = default;
};

/// Checks qubit ranges, control != target, and that every parameterized gate
/// carries a slot below param_count while CNOT carries none.
inline void validate(const CircuitTemplate& t) {
  for (std::size_t i = 0; i < t.gates.size(); ++i) {
    const Gate& g = t.gates[i];
    const std::string where = "gate " + std::to_string(i) + " (" + std::string(gate_name(g.kind)) + ")";
    if (g.target >= t.num_qubits) throw ContractError(where + ": target qubit out of range");
    if (is_controlled(g.kind)) {
      if (!g.control) throw ContractError(where + ": missing control qubit");
      if (*g.control >= t.num_qubits) throw ContractError(where + ": control qubit out of range");
      if (*g.control == g.target) throw ContractError(where + ": control equals target");
    } else if (g.control) {
      throw ContractError(where + ": single-qubit gate has a control");
    }
    if (is_parameterized(g.kind) != g.param_slot.has_value())
      throw ContractError(where + ": parameter slot presence does not match gate kind");
    if (g.param_slot && *g.param_slot >= t.param_count)
      throw ContractError(where + ": parameter slot out of range");
  }
}

}  // namespace mpmqir

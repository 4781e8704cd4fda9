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

#include <cmath>
#include <numbers>
#include <random>

#include "mpmqir/ansatz.hpp"
#include "mpmqir/statevec.hpp"
#include "oracles.hpp"

using namespace mpmqir;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> basis(unsigned m, std::size_t index) {
  std::vector<double> p(std::size_t{1} << m, 0.0);
  p[index] = 1.0;
  return p;
}

CircuitTemplate random_template(unsigned m, std::size_t gates, std::mt19937_64& gen) {
  CircuitTemplate t;
  t.num_qubits = m;
  std::uniform_int_distribution<int> kind(0, 6);
  std::uniform_int_distribution<unsigned> qubit(0, m - 1);
  for (std::size_t i = 0; i < gates; ++i) {
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

}  // namespace

TEST(StateVector, ZeroStateThreeQubits) {
  const StateVector s = init_zero_state(3);
  EXPECT_EQ(s.probabilities(), basis(3, 0));
}

TEST(StateVector, ZeroStateSingleQubitAmplitudes) {
  const StateVector s = init_zero_state(1);
  ASSERT_EQ(s.amplitudes().size(), 2u);
  EXPECT_EQ(s.amplitudes()[0], Complex(1.0, 0.0));
  EXPECT_EQ(s.amplitudes()[1], Complex(0.0, 0.0));
}

TEST(StateVector, QubitCountGuard) {
  EXPECT_THROW(init_zero_state(17), ConfigError);
  EXPECT_THROW(init_zero_state(0), ConfigError);
  EXPECT_NO_THROW(init_zero_state(16));
}

TEST(StateVector, RyPiFlipsQubit) {
  StateVector s(1);
  apply_gate(s, Gate::rotation(GateKind::RY, 0, 0), kPi);
  const auto p = s.probabilities();
  EXPECT_NEAR(p[0], 0.0, 1e-15);
  EXPECT_NEAR(p[1], 1.0, 1e-15);
}

TEST(StateVector, CnotTruthTable) {
  StateVector s(2);
  apply_gate(s, Gate::rotation(GateKind::RX, 0, 0), kPi);  // |01>, up to phase
  apply_gate(s, Gate::cnot(0, 1), std::nullopt);
  const auto p = s.probabilities();
  EXPECT_NEAR(p[3], 1.0, 1e-15);
  EXPECT_NEAR(p[1], 0.0, 1e-15);
}

TEST(StateVector, ControlledRotationIdleWhenControlOff) {
  for (GateKind k : {GateKind::CRX, GateKind::CRY, GateKind::CRZ}) {
    StateVector s(2);
    apply_gate(s, Gate::rotation(GateKind::RY, 1, 0), 0.7);
    const auto before = std::vector<Complex>(s.amplitudes().begin(), s.amplitudes().end());
    apply_gate(s, Gate::controlled(k, 0, 1, 0), kPi);
    for (std::size_t i = 0; i < before.size(); ++i) EXPECT_EQ(s.amplitudes()[i], before[i]) << gate_name(k);
  }
}

TEST(StateVector, AngleContract) {
  StateVector s(2);
  EXPECT_THROW(apply_gate(s, Gate::rotation(GateKind::RX, 0, 0), std::nullopt), ContractError);
  EXPECT_THROW(apply_gate(s, Gate::cnot(0, 1), 0.3), ContractError);
  EXPECT_THROW(apply_gate(s, Gate::rotation(GateKind::RX, 2, 0), 0.3), ContractError);
  EXPECT_THROW(apply_gate(s, Gate::cnot(1, 1), std::nullopt), ContractError);
}

TEST(RunCircuit, EmptyTemplateIsIdentity) {
  CircuitTemplate t;
  t.num_qubits = 2;
  EXPECT_EQ(run_circuit(t, {}), basis(2, 0));
}

TEST(RunCircuit, SingleRyHalfPi) {
  CircuitTemplate t;
  t.num_qubits = 1;
  t.gates.push_back(Gate::rotation(GateKind::RY, 0, 0));
  t.param_count = 1;
  const double theta[] = {kPi / 2};
  const auto p = run_circuit(t, theta);
  EXPECT_NEAR(p[0], 0.5, 1e-15);
  EXPECT_NEAR(p[1], 0.5, 1e-15);
}

TEST(RunCircuit, ParameterLengthContract) {
  const auto t = build_mpm(2, 1);
  const std::vector<double> wrong(3, 0.0);
  EXPECT_THROW(run_circuit(t, wrong), ContractError);
}

TEST(RunCircuit, TenQubitMpmNormalized) {
  std::mt19937_64 gen(5);
  const auto t = build_mpm(10, 4);
  const auto p = run_circuit(t, oracle::uniform_angles(t.param_count, gen));
  double sum = 0.0;
  for (double v : p) sum += v;
  EXPECT_NEAR(sum, 1.0, 1e-10);
}

TEST(RunCircuit, MatchesDenseOracleOnAnsatze) {
  std::mt19937_64 gen(17);
  for (AnsatzId id : {AnsatzId::MPM, AnsatzId::QCNN, AnsatzId::QAE})
    for (unsigned m = 2; m <= 4; ++m)
      for (unsigned layers = 1; layers <= 3; ++layers) {
        const auto t = build_ansatz(id, m, layers);
        const auto theta = oracle::uniform_angles(t.param_count, gen);
        const auto got = run_circuit(t, theta);
        const auto want = oracle::probabilities(t, theta);
        for (std::size_t i = 0; i < got.size(); ++i)
          EXPECT_NEAR(got[i], want[i], 1e-12) << to_string(id) << " m=" << m << " L=" << layers;
      }
}

TEST(RunCircuit, MatchesDenseOracleOnRandomGates) {
  std::mt19937_64 gen(23);
  for (unsigned m = 1; m <= 4; ++m)
    for (int rep = 0; rep < 5; ++rep) {
      const auto t = random_template(m, 40, gen);
      const auto theta = oracle::uniform_angles(t.param_count, gen);
      StateVector s(m);
      evolve(s, t, theta);
      const auto u = oracle::circuit_unitary(t, theta);
      for (std::size_t i = 0; i < u.n; ++i) {
        EXPECT_NEAR(s.amplitudes()[i].real(), u(i, 0).real(), 1e-12);
        EXPECT_NEAR(s.amplitudes()[i].imag(), u(i, 0).imag(), 1e-12);
      }
    }
}

TEST(RunCircuit, NormPreservedOverLongSequences) {
  std::mt19937_64 gen(31);
  for (unsigned m : {3u, 6u}) {
    const auto t = random_template(m, 10000, gen);
    const auto theta = oracle::uniform_angles(t.param_count, gen);
    StateVector s(m);
    evolve(s, t, theta);
    EXPECT_NEAR(s.norm_squared(), 1.0, 1e-9);
  }
}

// Copyright 2026 The mirrorsqkd Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MIRRORSQKD_PROTOCOL_HPP
#define MIRRORSQKD_PROTOCOL_HPP

#include <optional>
#include <stdexcept>
#include <vector>

#include "mirrorsqkd/fock.hpp"

/// The Mirror protocol's classical side: Alice's four operations on the
/// incoming photonic modes, Bob's basis choice, and the resulting round
/// taxonomy.
namespace mirrorsqkd {

/// Alice's classical operation on the two incoming modes.
///   Ctrl     reflect everything untouched,
///   Swap10   measure the |1> mode, reflect the |0> mode,
///   Swap01   measure the |0> mode, reflect the |1> mode,
///   SwapAll  measure both modes, return vacuum.
enum class AliceOperation { Ctrl, Swap10, Swap01, SwapAll };

enum class BobBasis { Computational, Hadamard };

enum class RoundType {
  RawKey,
  MismatchedRawKey,
  Test,
  MismatchedTest,
  SwapAll,
  MismatchedSwapAll,
};

/// Round taxonomy: SWAP-x with a computational readout makes a raw-key
/// round, CTRL with a Hadamard readout a test round, and SWAP-ALL with a
/// computational readout a SWAP-ALL round; the opposite basis choice makes
/// the corresponding mismatched round.
constexpr RoundType classify_round(AliceOperation op, BobBasis basis) {
  const bool computational = basis == BobBasis::Computational;
  switch (op) {
    case AliceOperation::Swap10:
    case AliceOperation::Swap01:
      return computational ? RoundType::RawKey : RoundType::MismatchedRawKey;
    case AliceOperation::Ctrl:
      return computational ? RoundType::MismatchedTest : RoundType::Test;
    case AliceOperation::SwapAll:
    default:
      return computational ? RoundType::SwapAll : RoundType::MismatchedSwapAll;
  }
}

/// Applies Alice's operation to every Fock component of `state`, moving the
/// measured modes into her ancilla register:
///
///   Ctrl:    |0,0>_anc |m1,m0>_B  ->  |0,0>_anc |m1,m0>_B
///   Swap10:  |0,0>_anc |m1,m0>_B  ->  |m1,0>_anc |0,m0>_B
///   Swap01:  |0,0>_anc |m1,m0>_B  ->  |0,m0>_anc |m1,0>_B
///   SwapAll: |0,0>_anc |m1,m0>_B  ->  |m1,m0>_anc |0,0>_B
///
/// Linear over superpositions and norm-preserving.  Requires the ancilla
/// register to start in the vacuum.
inline FockStateVector apply_alice_operation(AliceOperation op, const FockStateVector& state) {
  if (state.frame() != BobFrame::Computational) {
    throw std::invalid_argument("apply_alice_operation: state not in the computational frame");
  }
  for (const auto& [key, amp] : state.entries()) {
    if (!key.alice.is_vacuum()) {
      throw std::invalid_argument("apply_alice_operation: Alice's ancilla must start in vacuum");
    }
  }
  if (op == AliceOperation::Ctrl) return state;

  FockStateVector out(state.dims(), state.frame());
  for (const auto& [key, amp] : state.entries()) {
    BasisKey moved = key;
    switch (op) {
      case AliceOperation::Swap10:
        moved.alice = {key.bob.m1, 0};
        moved.bob = {0, key.bob.m0};
        break;
      case AliceOperation::Swap01:
        moved.alice = {0, key.bob.m0};
        moved.bob = {key.bob.m1, 0};
        break;
      case AliceOperation::SwapAll:
        moved.alice = key.bob;
        moved.bob = {0, 0};
        break;
      case AliceOperation::Ctrl:
        break;
    }
    out.add(moved, amp);
  }
  if (state.normalized()) out.mark_normalized();
  return out;
}

/// One row of the ideal (noiseless, attack-free) behaviour table: whether
/// Alice detects, what travels back to Bob, with what probability, and which
/// raw key bit (if any) the branch encodes.  Raw key bits follow the
/// convention Swap10 -> bit 0, Swap01 -> bit 1.
struct IdealOutcome {
  bool alice_detected = false;
  /// True when the returned state is the single photon |+> (the x-basis
  /// label (0,1)); otherwise `state_to_bob` is a computational Fock label.
  bool bob_state_hadamard = false;
  FockLabel state_to_bob;
  double probability = 0.0;
  std::optional<int> raw_key_bit;
};

/// The error-free branch table for one round, given Bob's initial |+>.
inline std::vector<IdealOutcome> ideal_round_outcome(AliceOperation op) {
  switch (op) {
    case AliceOperation::Ctrl:
      return {{false, true, {0, 1}, 1.0, std::nullopt}};
    case AliceOperation::Swap10:
      return {{false, false, {0, 1}, 0.5, 0}, {true, false, {0, 0}, 0.5, std::nullopt}};
    case AliceOperation::Swap01:
      return {{false, false, {1, 0}, 0.5, 1}, {true, false, {0, 0}, 0.5, std::nullopt}};
    case AliceOperation::SwapAll:
    default:
      return {{true, false, {0, 0}, 1.0, std::nullopt}};
  }
}

}  // namespace mirrorsqkd

#endif  // MIRRORSQKD_PROTOCOL_HPP

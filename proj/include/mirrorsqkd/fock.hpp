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

#ifndef MIRRORSQKD_FOCK_HPP
#define MIRRORSQKD_FOCK_HPP

#include <algorithm>
#include <complex>
#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

/// Truncated two-mode Fock space shared by every other module.
///
/// A pure state lives on (Bob's photonic register) x (Alice's measurement
/// ancilla) x (Eve's finite-dimensional ancilla) and is stored as a sparse,
/// sorted list of (basis label, complex amplitude) pairs.  Photon counts are
/// truncated at a configurable per-mode maximum, and Eve's ancilla is indexed
/// by a plain integer.
namespace mirrorsqkd {

using Complex = std::complex<double>;

/// Tolerance at which unit norm is asserted on states claimed normalized.
inline constexpr double kNormTolerance = 1e-10;
/// Tolerance for algebraic identities (isometries, probability sums).
inline constexpr double kAlgebraTolerance = 1e-12;

/// Occupation of the two photonic modes: m1 photons in the |1> mode and
/// m0 photons in the |0> mode.  (0, 0) is the vacuum.
struct FockLabel {
  int m1 = 0;
  int m0 = 0;

  friend constexpr auto operator<=>(const FockLabel&, const FockLabel&) = default;

  constexpr int total() const { return m1 + m0; }
  constexpr bool is_vacuum() const { return m1 == 0 && m0 == 0; }
};

/// The two single-photon states of the Hadamard (x) basis.
enum class HadamardSign { Plus, Minus };

/// How the single-photon sector of Bob's register is labelled.  In the
/// Hadamard frame the label (0,1) is read as |+> and (1,0) as |->;
/// vacuum and multi-photon labels keep their computational meaning.
enum class BobFrame { Computational, Hadamard };

enum class Register { Bob, AliceAncilla };

enum class MeasurementBasis { Computational, Hadamard };

/// What a pair of threshold detectors reports for one register.  Detectors
/// cannot count photons: any mode holding one or more photons produces a
/// single click, and clicks in both modes form a double-click.
/// In the Hadamard basis, Click0 is the |+> detector and Click1 the |->
/// detector.
enum class DetectionOutcome { Vacuum, Click0, Click1, DoubleClick };

/// Threshold-detector reading of a computational-basis label.
constexpr DetectionOutcome classify_computational(FockLabel l) {
  if (l.m1 >= 1 && l.m0 >= 1) return DetectionOutcome::DoubleClick;
  if (l.m1 >= 1) return DetectionOutcome::Click1;
  if (l.m0 >= 1) return DetectionOutcome::Click0;
  return DetectionOutcome::Vacuum;
}

/// Reading of a Hadamard-frame label: (0,1) is |+>, (1,0) is |->, and any
/// multi-photon residual lights both detectors.
constexpr DetectionOutcome classify_hadamard(FockLabel l) {
  if (l.total() == 0) return DetectionOutcome::Vacuum;
  if (l.total() >= 2) return DetectionOutcome::DoubleClick;
  return l.m0 == 1 ? DetectionOutcome::Click0 : DetectionOutcome::Click1;
}

/// Truncation and ancilla size shared by all labels of one state.
struct StateDims {
  int n_max = 4;    // per-mode photon cap
  int eve_dim = 1;  // dimension of Eve's ancilla

  friend constexpr bool operator==(const StateDims&, const StateDims&) = default;
};

/// Composite basis label: Bob register x Alice ancilla x Eve ancilla index.
struct BasisKey {
  FockLabel bob;
  FockLabel alice;
  int eve = 0;

  /// Dense ordering key; mode occupations must fit in a byte.
  constexpr std::uint64_t packed() const {
    return (static_cast<std::uint64_t>(bob.m1) << 56) |
           (static_cast<std::uint64_t>(bob.m0) << 48) |
           (static_cast<std::uint64_t>(alice.m1) << 40) |
           (static_cast<std::uint64_t>(alice.m0) << 32) |
           static_cast<std::uint64_t>(static_cast<std::uint32_t>(eve));
  }

  friend constexpr bool operator==(const BasisKey& a, const BasisKey& b) {
    return a.packed() == b.packed();
  }
  friend constexpr auto operator<=>(const BasisKey& a, const BasisKey& b) {
    return a.packed() <=> b.packed();
  }
};

/// Sparse complex-amplitude vector over composite Fock basis labels.
///
/// Entries are kept sorted by label so inner products are a linear merge.
/// Values are built once and then treated as immutable; nothing here
/// mutates a state in place after it is handed out.
class FockStateVector {
 public:
  using Entry = std::pair<BasisKey, Complex>;

  explicit FockStateVector(StateDims dims, BobFrame frame = BobFrame::Computational)
      : dims_(dims), frame_(frame) {
    if (dims.n_max < 1 || dims.n_max > 255) {
      throw std::invalid_argument("FockStateVector: n_max must be in [1, 255]");
    }
    if (dims.eve_dim < 1) {
      throw std::invalid_argument("FockStateVector: eve_dim must be positive");
    }
  }

  const StateDims& dims() const { return dims_; }
  BobFrame frame() const { return frame_; }
  bool normalized() const { return normalized_; }
  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  /// Accumulates `amp` onto the given basis label.
  void add(const BasisKey& key, Complex amp) {
    check_bounds(key);
    auto it = std::lower_bound(entries_.begin(), entries_.end(), key,
                               [](const Entry& e, const BasisKey& k) { return e.first < k; });
    if (it != entries_.end() && it->first == key) {
      it->second += amp;
    } else {
      entries_.insert(it, {key, amp});
    }
    normalized_ = false;
  }

  Complex amplitude(const BasisKey& key) const {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), key,
                               [](const Entry& e, const BasisKey& k) { return e.first < k; });
    if (it != entries_.end() && it->first == key) return it->second;
    return Complex{0.0, 0.0};
  }

  double norm_squared() const {
    double s = 0.0;
    for (const auto& [key, amp] : entries_) s += std::norm(amp);
    return s;
  }

  /// Asserts unit norm (within kNormTolerance) and records the fact.
  void mark_normalized() {
    double n2 = norm_squared();
    if (std::abs(n2 - 1.0) > kNormTolerance) {
      throw std::invalid_argument("FockStateVector: norm_squared is " + std::to_string(n2) +
                                  ", not 1 within tolerance");
    }
    normalized_ = true;
  }

 private:
  void check_bounds(const BasisKey& key) const {
    const bool label_ok = key.bob.m1 >= 0 && key.bob.m0 >= 0 && key.alice.m1 >= 0 &&
                          key.alice.m0 >= 0 && key.bob.m1 <= dims_.n_max &&
                          key.bob.m0 <= dims_.n_max && key.alice.m1 <= dims_.n_max &&
                          key.alice.m0 <= dims_.n_max;
    if (!label_ok) throw std::out_of_range("FockStateVector: photon count exceeds truncation");
    if (key.eve < 0 || key.eve >= dims_.eve_dim) {
      throw std::out_of_range("FockStateVector: Eve ancilla index out of range");
    }
  }

  std::vector<Entry> entries_;
  StateDims dims_;
  BobFrame frame_;
  bool normalized_ = false;
};

/// <a|b>, conjugate-linear in the first argument.  Both states must share
/// truncation, Eve dimension, and Bob frame.
inline Complex inner_product(const FockStateVector& a, const FockStateVector& b) {
  if (!(a.dims() == b.dims()) || a.frame() != b.frame()) {
    throw std::invalid_argument("inner_product: states live on different spaces");
  }
  Complex acc{0.0, 0.0};
  auto ia = a.entries().begin();
  auto ib = b.entries().begin();
  while (ia != a.entries().end() && ib != b.entries().end()) {
    if (ia->first < ib->first) {
      ++ia;
    } else if (ib->first < ia->first) {
      ++ib;
    } else {
      acc += std::conj(ia->second) * ib->second;
      ++ia;
      ++ib;
    }
  }
  return acc;
}

/// Rewrites the single-photon sector of Bob's register in the Hadamard basis:
/// |0,1> -> (|+> + |->)/sqrt(2) and |1,0> -> (|+> - |->)/sqrt(2).  Vacuum and
/// multi-photon components pass through unchanged.  Norm-preserving.
inline FockStateVector to_hadamard_amplitudes(const FockStateVector& v) {
  if (v.frame() != BobFrame::Computational) {
    throw std::invalid_argument("to_hadamard_amplitudes: input already in the Hadamard frame");
  }
  constexpr double inv_sqrt2 = 0.70710678118654752440;
  FockStateVector out(v.dims(), BobFrame::Hadamard);
  for (const auto& [key, amp] : v.entries()) {
    if (key.bob == FockLabel{0, 1}) {
      out.add({{0, 1}, key.alice, key.eve}, amp * inv_sqrt2);   // |+>
      out.add({{1, 0}, key.alice, key.eve}, amp * inv_sqrt2);   // |->
    } else if (key.bob == FockLabel{1, 0}) {
      out.add({{0, 1}, key.alice, key.eve}, amp * inv_sqrt2);
      out.add({{1, 0}, key.alice, key.eve}, -amp * inv_sqrt2);
    } else {
      out.add(key, amp);
    }
  }
  return out;
}

/// Probabilities of the four detector readings for one register.  When the
/// input is not normalized the probabilities sum to its squared norm, which
/// is what conditional-branch bookkeeping relies on.
struct OutcomeProbabilities {
  double vacuum = 0.0;
  double click0 = 0.0;
  double click1 = 0.0;
  double double_click = 0.0;

  double sum() const { return vacuum + click0 + click1 + double_click; }

  double operator[](DetectionOutcome o) const {
    switch (o) {
      case DetectionOutcome::Vacuum: return vacuum;
      case DetectionOutcome::Click0: return click0;
      case DetectionOutcome::Click1: return click1;
      case DetectionOutcome::DoubleClick: return double_click;
    }
    return 0.0;
  }

  double& operator[](DetectionOutcome o) {
    switch (o) {
      case DetectionOutcome::Vacuum: return vacuum;
      case DetectionOutcome::Click0: return click0;
      case DetectionOutcome::Click1: return click1;
      default: return double_click;
    }
  }
};

/// Born-rule detector statistics for measuring `reg` of `v` in `basis`.
/// Hadamard readout is only defined for Bob's register (Alice is restricted
/// to the computational basis).
inline OutcomeProbabilities measurement_probabilities(const FockStateVector& v, Register reg,
                                                      MeasurementBasis basis) {
  if (v.norm_squared() <= 0.0) {
    throw std::domain_error("measurement_probabilities: zero-norm state");
  }
  if (basis == MeasurementBasis::Hadamard && reg != Register::Bob) {
    throw std::invalid_argument("measurement_probabilities: Hadamard readout is Bob-only");
  }
  OutcomeProbabilities probs;
  if (basis == MeasurementBasis::Hadamard) {
    FockStateVector w = to_hadamard_amplitudes(v);
    for (const auto& [key, amp] : w.entries()) {
      probs[classify_hadamard(key.bob)] += std::norm(amp);
    }
    return probs;
  }
  if (v.frame() != BobFrame::Computational) {
    throw std::invalid_argument("measurement_probabilities: state not in the computational frame");
  }
  for (const auto& [key, amp] : v.entries()) {
    FockLabel l = (reg == Register::Bob) ? key.bob : key.alice;
    probs[classify_computational(l)] += std::norm(amp);
  }
  return probs;
}

/// Unnormalized post-measurement state: keeps the components of `v` whose
/// `reg` label reads as `outcome` on computational-basis detectors.
inline FockStateVector project(const FockStateVector& v, Register reg, DetectionOutcome outcome) {
  if (v.frame() != BobFrame::Computational) {
    throw std::invalid_argument("project: state not in the computational frame");
  }
  FockStateVector out(v.dims(), v.frame());
  for (const auto& [key, amp] : v.entries()) {
    FockLabel l = (reg == Register::Bob) ? key.bob : key.alice;
    if (classify_computational(l) == outcome) out.add(key, amp);
  }
  return out;
}

}  // namespace mirrorsqkd

#endif  // MIRRORSQKD_FOCK_HPP

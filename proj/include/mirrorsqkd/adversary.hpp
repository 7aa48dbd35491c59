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

#ifndef MIRRORSQKD_ADVERSARY_HPP
#define MIRRORSQKD_ADVERSARY_HPP

#include <Eigen/Dense>
#include <Eigen/QR>

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "mirrorsqkd/fock.hpp"

/// Eve's collective attack.
///
/// On the forward channel (Bob to Alice) Eve discards Bob's state and injects
/// her own, possibly multi-photon and entangled with her ancilla.  On the
/// reverse channel she applies an isometry that returns at most one photon to
/// Bob, keeping the rest of the output in her ancilla.
namespace mirrorsqkd {

using EveVec = std::vector<Complex>;

inline double eve_norm_squared(const EveVec& v) {
  double s = 0.0;
  for (Complex c : v) s += std::norm(c);
  return s;
}

inline Complex eve_inner(const EveVec& a, const EveVec& b) {
  if (a.size() != b.size()) throw std::invalid_argument("eve_inner: length mismatch");
  Complex acc{0.0, 0.0};
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::conj(a[i]) * b[i];
  return acc;
}

inline void eve_accumulate(EveVec& dst, const EveVec& src, Complex coeff = {1.0, 0.0}) {
  if (dst.size() != src.size()) throw std::invalid_argument("eve_accumulate: length mismatch");
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] += coeff * src[i];
}

inline EveVec eve_sub(const EveVec& a, const EveVec& b) {
  EveVec out = a;
  eve_accumulate(out, b, {-1.0, 0.0});
  return out;
}

/// Eve's forward-channel replacement state
///   sum_{m1,m0} |m1,m0>_B |e_{m1,m0}>_E,
/// stored as the map (m1,m0) -> e_{m1,m0}.  The total squared norm over all
/// labels must be 1: the injected state is normalized.
struct FirstAttack {
  int eve_dim = 1;
  std::map<FockLabel, EveVec> injected;

  double total_norm_squared() const {
    double s = 0.0;
    for (const auto& [label, vec] : injected) s += eve_norm_squared(vec);
    return s;
  }

  int max_photon_count() const {
    int m = 0;
    for (const auto& [label, vec] : injected) m = std::max({m, label.m1, label.m0});
    return m;
  }

  void validate() const {
    if (eve_dim < 1) throw std::invalid_argument("FirstAttack: eve_dim must be positive");
    for (const auto& [label, vec] : injected) {
      if (label.m1 < 0 || label.m0 < 0) {
        throw std::invalid_argument("FirstAttack: negative photon count");
      }
      if (static_cast<int>(vec.size()) != eve_dim) {
        throw std::invalid_argument("FirstAttack: ancilla vector length != eve_dim");
      }
    }
    double n2 = total_norm_squared();
    if (std::abs(n2 - 1.0) > kNormTolerance) {
      throw std::invalid_argument("FirstAttack: injected state is not normalized");
    }
  }

  /// The injected state as a full vector, with Alice's ancilla in vacuum.
  /// `n_max` = 0 picks the smallest truncation holding the support (at
  /// least the default of 4).
  FockStateVector to_state(int n_max = 0) const {
    validate();
    if (n_max == 0) n_max = std::max(4, max_photon_count());
    FockStateVector state({n_max, eve_dim});
    for (const auto& [label, vec] : injected) {
      for (int e = 0; e < eve_dim; ++e) {
        if (vec[e] != Complex{0.0, 0.0}) state.add({label, {0, 0}, e}, vec[e]);
      }
    }
    state.mark_normalized();
    return state;
  }
};

/// Output of the reverse isometry on one input basis vector: the Eve-side
/// components attached to Bob's |0,1>, |1,0>, and |0,0> respectively.
struct ReverseTriple {
  EveVec on_01;
  EveVec on_10;
  EveVec on_00;
};

/// Eve's reverse-channel isometry U_R, restricted to the inputs the protocol
/// produces: for each Fock label (m1,m0) in its domain and each ancilla basis
/// index e,
///   U_R |m1,m0>_B |e>_E = |0,1>_B |g01> + |1,0>_B |g10> + |0,0>_B |g00>.
/// At most one photon is returned to Bob; the output ancilla dimension may
/// exceed the input one so that the map can be an exact isometry.
struct SecondAttack {
  int in_eve_dim = 1;
  int out_eve_dim = 1;
  std::map<FockLabel, std::vector<ReverseTriple>> action;

  bool defined_on(FockLabel label) const { return action.count(label) != 0; }

  const ReverseTriple& component(FockLabel label, int eve_index) const {
    auto it = action.find(label);
    if (it == action.end()) {
      throw std::invalid_argument("SecondAttack: input label outside the attack's domain");
    }
    if (eve_index < 0 || eve_index >= in_eve_dim) {
      throw std::invalid_argument("SecondAttack: ancilla index out of range");
    }
    return it->second[static_cast<std::size_t>(eve_index)];
  }

  /// Linear extension of the per-basis action to an arbitrary ancilla vector:
  /// the image of |label>_B |e>_E for e = sum_i e[i] |i>.
  ReverseTriple apply_to(FockLabel label, const EveVec& e) const {
    if (static_cast<int>(e.size()) != in_eve_dim) {
      throw std::invalid_argument("SecondAttack: ancilla vector length != in_eve_dim");
    }
    ReverseTriple out{EveVec(out_eve_dim), EveVec(out_eve_dim), EveVec(out_eve_dim)};
    for (int i = 0; i < in_eve_dim; ++i) {
      if (e[static_cast<std::size_t>(i)] == Complex{0.0, 0.0}) continue;
      const ReverseTriple& g = component(label, i);
      eve_accumulate(out.on_01, g.on_01, e[static_cast<std::size_t>(i)]);
      eve_accumulate(out.on_10, g.on_10, e[static_cast<std::size_t>(i)]);
      eve_accumulate(out.on_00, g.on_00, e[static_cast<std::size_t>(i)]);
    }
    return out;
  }
};

/// Checks that the reverse attack is an isometry at tolerance `tol`:
/// every input basis vector maps to a unit vector, and distinct inputs map
/// to orthogonal outputs.
inline bool verify_isometry(const SecondAttack& attack, double tol = kNormTolerance) {
  if (attack.in_eve_dim < 1 || attack.out_eve_dim < 1) return false;
  std::vector<const ReverseTriple*> columns;
  for (const auto& [label, triples] : attack.action) {
    if (static_cast<int>(triples.size()) != attack.in_eve_dim) return false;
    for (const auto& t : triples) {
      if (static_cast<int>(t.on_01.size()) != attack.out_eve_dim ||
          static_cast<int>(t.on_10.size()) != attack.out_eve_dim ||
          static_cast<int>(t.on_00.size()) != attack.out_eve_dim) {
        return false;
      }
      columns.push_back(&t);
    }
  }
  for (std::size_t i = 0; i < columns.size(); ++i) {
    double n2 = eve_norm_squared(columns[i]->on_01) + eve_norm_squared(columns[i]->on_10) +
                eve_norm_squared(columns[i]->on_00);
    if (std::abs(n2 - 1.0) > tol) return false;
    for (std::size_t j = i + 1; j < columns.size(); ++j) {
      Complex ov = eve_inner(columns[i]->on_01, columns[j]->on_01) +
                   eve_inner(columns[i]->on_10, columns[j]->on_10) +
                   eve_inner(columns[i]->on_00, columns[j]->on_00);
      if (std::abs(ov) > tol) return false;
    }
  }
  return true;
}

/// Applies the reverse isometry to the Bob x Eve factors of `state`; Alice's
/// ancilla rides along untouched.  The output lives on the attack's output
/// ancilla dimension.
inline FockStateVector apply_second_attack(const SecondAttack& attack,
                                           const FockStateVector& state) {
  if (state.frame() != BobFrame::Computational) {
    throw std::invalid_argument("apply_second_attack: state not in the computational frame");
  }
  if (state.dims().eve_dim != attack.in_eve_dim) {
    throw std::invalid_argument("apply_second_attack: ancilla dimension mismatch");
  }
  FockStateVector out({state.dims().n_max, attack.out_eve_dim});
  for (const auto& [key, amp] : state.entries()) {
    if (amp == Complex{0.0, 0.0}) continue;
    const ReverseTriple& g = attack.component(key.bob, key.eve);
    for (int k = 0; k < attack.out_eve_dim; ++k) {
      auto idx = static_cast<std::size_t>(k);
      if (g.on_01[idx] != Complex{0.0, 0.0}) out.add({{0, 1}, key.alice, k}, amp * g.on_01[idx]);
      if (g.on_10[idx] != Complex{0.0, 0.0}) out.add({{1, 0}, key.alice, k}, amp * g.on_10[idx]);
      if (g.on_00[idx] != Complex{0.0, 0.0}) out.add({{0, 0}, key.alice, k}, amp * g.on_00[idx]);
    }
  }
  return out;
}

/// Channel-model parameters for the two worked scenarios: depolarizing error
/// probabilities for raw-key rounds (qz) and test rounds (qx), and the two
/// loss probabilities.  Error probabilities above 1/2 leave the valid range
/// of the depolarizing parameterization and are rejected.
struct NoiseChannelSpec {
  double qz = 0.0;
  double qx = 0.0;
  double loss_forward = 0.0;
  double loss_reverse = 0.0;

  void validate() const {
    if (!(qz >= 0.0 && qz <= 0.5)) {
      throw std::invalid_argument("NoiseChannelSpec: qz must lie in [0, 0.5]");
    }
    if (!(qx >= 0.0 && qx <= 0.5)) {
      throw std::invalid_argument("NoiseChannelSpec: qx must lie in [0, 0.5]");
    }
    if (!(loss_forward >= 0.0 && loss_forward <= 1.0)) {
      throw std::invalid_argument("NoiseChannelSpec: loss_forward must lie in [0, 1]");
    }
    if (!(loss_reverse >= 0.0 && loss_reverse <= 1.0)) {
      throw std::invalid_argument("NoiseChannelSpec: loss_reverse must lie in [0, 1]");
    }
  }
};

namespace detail {

// Forward-ancilla basis of the dilated channel.
inline constexpr int kFwdKeep = 0;       // no flip
inline constexpr int kFwdDepolKeep = 1;  // depolarize-to-identity, kept
inline constexpr int kFwdDepolFlip = 2;  // depolarize-to-identity, flipped
inline constexpr int kFwdLoss = 3;       // photon lost before Alice
inline constexpr int kFwdDim = 4;

// Reverse-channel flag states appended to the ancilla.
inline constexpr int kRevKeep = 0;
inline constexpr int kRevDepolKeep = 1;
inline constexpr int kRevDepolFlip = 2;
inline constexpr int kRevLossFrom01 = 3;  // photon stolen out of |0,1>
inline constexpr int kRevLossFrom10 = 4;  // photon stolen out of |1,0>
inline constexpr int kRevVacuum = 5;      // vacuum passed through
inline constexpr int kRevDim = 6;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace detail

/// Dilates the depolarizing + loss channel model into an explicit attack
/// whose round statistics reproduce the closed forms of the two worked
/// scenarios exactly.
///
/// The depolarizing error is realized as a three-outcome ancilla
/// (no-flip, depolarize-keep, depolarize-flip) with orthogonal flags; the
/// forward split acts in the Hadamard basis with parameter qx and the
/// reverse split in the computational basis with parameter qz, which is the
/// unique placement that leaves raw-key rounds with flip probability qz and
/// test rounds with flip probability qx for every (qz, qx) pair.  A loss
/// rotates the photon amplitude onto Bob's vacuum with an orthogonal Eve
/// flag recording the mode it came from, so a loss is final.
inline std::pair<FirstAttack, SecondAttack> build_depolarizing_attack(const NoiseChannelSpec& spec) {
  spec.validate();
  using detail::kFwdDepolFlip;
  using detail::kFwdDepolKeep;
  using detail::kFwdDim;
  using detail::kFwdKeep;
  using detail::kFwdLoss;

  const double s = std::sqrt(1.0 - spec.loss_forward);
  const double keep = std::sqrt(std::max(0.0, 1.0 - 2.0 * spec.qx));
  const double depol = std::sqrt(spec.qx);
  constexpr double inv_sqrt2 = 0.70710678118654752440;

  FirstAttack first;
  first.eve_dim = kFwdDim;
  // |psi0> = sqrt(1-pF) [ sqrt(1-2qx)|+>|keep> + sqrt(qx)|+>|dk> + sqrt(qx)|->|df> ]
  //          + sqrt(pF) |0,0>|loss>, expanded in the computational basis.
  EveVec e01(kFwdDim), e10(kFwdDim);
  e01[kFwdKeep] = s * inv_sqrt2 * keep;
  e01[kFwdDepolKeep] = s * inv_sqrt2 * depol;
  e01[kFwdDepolFlip] = s * inv_sqrt2 * depol;
  e10[kFwdKeep] = s * inv_sqrt2 * keep;
  e10[kFwdDepolKeep] = s * inv_sqrt2 * depol;
  e10[kFwdDepolFlip] = -s * inv_sqrt2 * depol;
  if (spec.loss_forward < 1.0) {
    first.injected[{0, 1}] = e01;
    first.injected[{1, 0}] = e10;
  }
  if (spec.loss_forward > 0.0) {
    EveVec e00(kFwdDim);
    e00[kFwdLoss] = std::sqrt(spec.loss_forward);
    first.injected[{0, 0}] = e00;
  }
  first.validate();

  SecondAttack second;
  second.in_eve_dim = kFwdDim;
  second.out_eve_dim = kFwdDim * detail::kRevDim;
  const double r_keep = std::sqrt((1.0 - spec.loss_reverse) * std::max(0.0, 1.0 - 2.0 * spec.qz));
  const double r_depol = std::sqrt((1.0 - spec.loss_reverse) * spec.qz);
  const double r_loss = std::sqrt(spec.loss_reverse);
  auto out_index = [](int eve, int flag) { return eve * detail::kRevDim + flag; };

  std::vector<ReverseTriple> on01(kFwdDim), on10(kFwdDim), on00(kFwdDim);
  for (int e = 0; e < kFwdDim; ++e) {
    ReverseTriple t{EveVec(second.out_eve_dim), EveVec(second.out_eve_dim),
                    EveVec(second.out_eve_dim)};
    // |0,1> in: kept (possibly depolarized) or flipped or stolen.
    t.on_01[out_index(e, detail::kRevKeep)] = r_keep;
    t.on_01[out_index(e, detail::kRevDepolKeep)] = r_depol;
    t.on_10[out_index(e, detail::kRevDepolFlip)] = r_depol;
    t.on_00[out_index(e, detail::kRevLossFrom01)] = r_loss;
    on01[static_cast<std::size_t>(e)] = t;

    ReverseTriple u{EveVec(second.out_eve_dim), EveVec(second.out_eve_dim),
                    EveVec(second.out_eve_dim)};
    u.on_10[out_index(e, detail::kRevKeep)] = r_keep;
    u.on_10[out_index(e, detail::kRevDepolKeep)] = r_depol;
    u.on_01[out_index(e, detail::kRevDepolFlip)] = r_depol;
    u.on_00[out_index(e, detail::kRevLossFrom10)] = r_loss;
    on10[static_cast<std::size_t>(e)] = u;

    ReverseTriple v{EveVec(second.out_eve_dim), EveVec(second.out_eve_dim),
                    EveVec(second.out_eve_dim)};
    v.on_00[out_index(e, detail::kRevVacuum)] = 1.0;
    on00[static_cast<std::size_t>(e)] = v;
  }
  second.action[{0, 1}] = std::move(on01);
  second.action[{1, 0}] = std::move(on10);
  second.action[{0, 0}] = std::move(on00);
  return {std::move(first), std::move(second)};
}

/// Deterministic random attack for property suites: a normalized forward
/// state supported on photon counts up to `photon_cap` per mode, and a
/// reverse isometry drawn Haar-style by QR-orthonormalizing a Gaussian
/// matrix over the full input space.
inline std::pair<FirstAttack, SecondAttack> random_attack(std::uint64_t seed, int eve_dim,
                                                          int photon_cap) {
  if (eve_dim < 1) throw std::invalid_argument("random_attack: eve_dim must be positive");
  if (photon_cap < 0) throw std::invalid_argument("random_attack: photon_cap must be >= 0");

  std::mt19937_64 rng(detail::splitmix64(seed));
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::vector<FockLabel> labels;
  for (int m1 = 0; m1 <= photon_cap; ++m1) {
    for (int m0 = 0; m0 <= photon_cap; ++m0) labels.push_back({m1, m0});
  }

  FirstAttack first;
  first.eve_dim = eve_dim;
  double total = 0.0;
  for (const FockLabel& label : labels) {
    EveVec v(eve_dim);
    for (int e = 0; e < eve_dim; ++e) {
      v[static_cast<std::size_t>(e)] = Complex{gauss(rng), gauss(rng)};
      total += std::norm(v[static_cast<std::size_t>(e)]);
    }
    first.injected[label] = std::move(v);
  }
  const double scale = 1.0 / std::sqrt(total);
  for (auto& [label, vec] : first.injected) {
    for (Complex& c : vec) c *= scale;
  }
  first.validate();

  const int domain = static_cast<int>(labels.size()) * eve_dim;
  const int out_dim = (domain + 2) / 3;  // smallest size admitting an isometry
  Eigen::MatrixXcd gaussian(3 * out_dim, 3 * out_dim);
  for (Eigen::Index r = 0; r < gaussian.rows(); ++r) {
    for (Eigen::Index c = 0; c < gaussian.cols(); ++c) {
      gaussian(r, c) = Complex{gauss(rng), gauss(rng)};
    }
  }
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(gaussian);
  Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(3 * out_dim, domain);

  SecondAttack second;
  second.in_eve_dim = eve_dim;
  second.out_eve_dim = out_dim;
  int column = 0;
  for (const FockLabel& label : labels) {
    std::vector<ReverseTriple> triples;
    triples.reserve(static_cast<std::size_t>(eve_dim));
    for (int e = 0; e < eve_dim; ++e, ++column) {
      ReverseTriple t{EveVec(out_dim), EveVec(out_dim), EveVec(out_dim)};
      for (int k = 0; k < out_dim; ++k) {
        t.on_01[static_cast<std::size_t>(k)] = q(k, column);
        t.on_10[static_cast<std::size_t>(k)] = q(out_dim + k, column);
        t.on_00[static_cast<std::size_t>(k)] = q(2 * out_dim + k, column);
      }
      triples.push_back(std::move(t));
    }
    second.action[label] = std::move(triples);
  }
  return {std::move(first), std::move(second)};
}

}  // namespace mirrorsqkd

#endif  // MIRRORSQKD_ADVERSARY_HPP

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

#ifndef MIRRORSQKD_STATISTICS_HPP
#define MIRRORSQKD_STATISTICS_HPP

#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <utility>
#include <vector>

#include "mirrorsqkd/adversary.hpp"
#include "mirrorsqkd/fock.hpp"
#include "mirrorsqkd/protocol.hpp"

/// The observable round statistics of the Mirror protocol under a collective
/// attack, computed two ways: exactly, by evolving the attacked state and
/// projecting, and by Monte Carlo round sampling.
namespace mirrorsqkd {

/// The observable quantities Alice and Bob estimate in post-processing.
///
/// Conditioning conventions, fixed once and relied on by the key-rate
/// module:
///   - e00..e11 (the joint raw-key probabilities <E_0>..<E_3>) are joint
///     within raw-key rounds and absorb the 1/2 probability of Alice's
///     SWAP-10 / SWAP-01 choice;
///   - p0_plus / p1_plus are likewise joint within mismatched raw-key
///     rounds;
///   - p_plus_plus, p_ctrl_0, p_ctrl_1 are probabilities within their round
///     type;
///   - p_double, p_create_0, p_create_1 are probabilities within SWAP-ALL
///     rounds.
struct ObservedStatistics {
  double e00 = 0.0;
  double e01 = 0.0;
  double e10 = 0.0;
  double e11 = 0.0;
  double m_total = 0.0;
  double p0_plus = 0.0;
  double p1_plus = 0.0;
  double p_plus_plus = 0.0;
  double p_ctrl_0 = 0.0;
  double p_ctrl_1 = 0.0;
  double p_double = 0.0;
  double p_create_0 = 0.0;
  double p_create_1 = 0.0;

  void validate(double tol = kNormTolerance) const {
    const auto fields = {e00,     e01,     e10,         e11,      m_total,    p0_plus,
                         p1_plus, p_plus_plus, p_ctrl_0, p_ctrl_1, p_double,
                         p_create_0, p_create_1};
    for (double f : fields) {
      if (!(f >= -tol && f <= 1.0 + tol) || std::isnan(f)) {
        throw std::invalid_argument("ObservedStatistics: field outside [0, 1]");
      }
    }
    if (std::abs(m_total - (e00 + e01 + e10 + e11)) > tol) {
      throw std::invalid_argument("ObservedStatistics: m_total != e00 + e01 + e10 + e11");
    }
  }
};

/// The field names, in the canonical reporting order.
inline std::array<std::pair<const char*, double>, 13> statistics_fields(
    const ObservedStatistics& s) {
  return {{{"e00", s.e00},
           {"e01", s.e01},
           {"e10", s.e10},
           {"e11", s.e11},
           {"m_total", s.m_total},
           {"p0_plus", s.p0_plus},
           {"p1_plus", s.p1_plus},
           {"p_plus_plus", s.p_plus_plus},
           {"p_ctrl_0", s.p_ctrl_0},
           {"p_ctrl_1", s.p_ctrl_1},
           {"p_double", s.p_double},
           {"p_create_0", s.p_create_0},
           {"p_create_1", s.p_create_1}}};
}

inline std::array<std::pair<const char*, double*>, 13> statistics_field_refs(
    ObservedStatistics& s) {
  return {{{"e00", &s.e00},
           {"e01", &s.e01},
           {"e10", &s.e10},
           {"e11", &s.e11},
           {"m_total", &s.m_total},
           {"p0_plus", &s.p0_plus},
           {"p1_plus", &s.p1_plus},
           {"p_plus_plus", &s.p_plus_plus},
           {"p_ctrl_0", &s.p_ctrl_0},
           {"p_ctrl_1", &s.p_ctrl_1},
           {"p_double", &s.p_double},
           {"p_create_0", &s.p_create_0},
           {"p_create_1", &s.p_create_1}}};
}

/// Multiplies every probability field by eta.  The key rate is invariant
/// under this rescaling, which is how uniform losses drop out.
inline ObservedStatistics scaled(const ObservedStatistics& s, double eta) {
  ObservedStatistics out = s;
  auto refs = statistics_field_refs(out);
  for (auto& [name, value] : refs) *value *= eta;
  return out;
}

/// Eve-side vectors entering the security bound.  e0..e3 collect the reverse
/// attack's single-photon outputs over the kept raw-key branches, g0/g1 its
/// photon-creation components on the vacuum input, h0/h1/h_vac its outputs on
/// the double-click sector.  All carry the 1/sqrt(2) branch prefactor, so
/// their squared norms equal the matching ObservedStatistics fields.
struct EveVectors {
  EveVec e0, e1, e2, e3;
  EveVec g0, g1;
  EveVec h0, h1, h_vac;
};

namespace detail {

inline OutcomeProbabilities safe_probabilities(const FockStateVector& v, Register reg,
                                               MeasurementBasis basis) {
  if (v.norm_squared() <= 0.0) return {};
  return measurement_probabilities(v, reg, basis);
}

}  // namespace detail

/// Exact round statistics of an attack, by constructing the post-attack
/// states of each branch and projecting.  Also returns the Eve-side vectors
/// used by the Lemma-1 check and the identity tests.
inline std::pair<ObservedStatistics, EveVectors> analytic_statistics(const FirstAttack& first,
                                                                     const SecondAttack& second) {
  first.validate();
  if (!verify_isometry(second)) {
    throw std::invalid_argument("analytic_statistics: reverse attack is not an isometry");
  }

  const FockStateVector psi0 = first.to_state();
  ObservedStatistics stats;

  // Raw-key rounds: SWAP-x, Alice sees no photon, Bob reads out.  The kept
  // branch is unnormalized, so its detector probabilities carry the branch
  // probability; the 1/2 is Alice's choice between the two SWAPs.
  {
    const FockStateVector kept =
        project(apply_alice_operation(AliceOperation::Swap10, psi0), Register::AliceAncilla,
                DetectionOutcome::Vacuum);
    if (kept.norm_squared() > 0.0) {
      const FockStateVector out = apply_second_attack(second, kept);
      const auto comp = detail::safe_probabilities(out, Register::Bob, MeasurementBasis::Computational);
      const auto had = detail::safe_probabilities(out, Register::Bob, MeasurementBasis::Hadamard);
      stats.e00 = 0.5 * comp.click0;
      stats.e01 = 0.5 * comp.click1;
      stats.p0_plus = 0.5 * had.click0;
    }
  }
  {
    const FockStateVector kept =
        project(apply_alice_operation(AliceOperation::Swap01, psi0), Register::AliceAncilla,
                DetectionOutcome::Vacuum);
    if (kept.norm_squared() > 0.0) {
      const FockStateVector out = apply_second_attack(second, kept);
      const auto comp = detail::safe_probabilities(out, Register::Bob, MeasurementBasis::Computational);
      const auto had = detail::safe_probabilities(out, Register::Bob, MeasurementBasis::Hadamard);
      stats.e10 = 0.5 * comp.click0;
      stats.e11 = 0.5 * comp.click1;
      stats.p1_plus = 0.5 * had.click0;
    }
  }
  stats.m_total = stats.e00 + stats.e01 + stats.e10 + stats.e11;

  // Test rounds: CTRL leaves the state alone, so Bob reads out U_R |psi0>.
  {
    const FockStateVector out = apply_second_attack(second, psi0);
    const auto comp = detail::safe_probabilities(out, Register::Bob, MeasurementBasis::Computational);
    const auto had = detail::safe_probabilities(out, Register::Bob, MeasurementBasis::Hadamard);
    stats.p_plus_plus = had.click0;
    stats.p_ctrl_0 = comp.click0;
    stats.p_ctrl_1 = comp.click1;
  }

  // SWAP-ALL rounds: Alice measures everything; her double-click reads the
  // multi-photon sector of |psi0> directly, and her vacuum branch feeds the
  // creation-event probabilities.
  {
    const FockStateVector swapped = apply_alice_operation(AliceOperation::SwapAll, psi0);
    const auto anc =
        detail::safe_probabilities(swapped, Register::AliceAncilla, MeasurementBasis::Computational);
    stats.p_double = anc.double_click;
    const FockStateVector vac = project(swapped, Register::AliceAncilla, DetectionOutcome::Vacuum);
    if (vac.norm_squared() > 0.0) {
      const FockStateVector out = apply_second_attack(second, vac);
      const auto comp = detail::safe_probabilities(out, Register::Bob, MeasurementBasis::Computational);
      stats.p_create_0 = comp.click0;
      stats.p_create_1 = comp.click1;
    }
  }

  // Eve-side vectors, assembled directly from the reverse attack's action on
  // the injected ancilla components (coherent sums over the kept labels).
  constexpr double inv_sqrt2 = 0.70710678118654752440;
  EveVectors vecs;
  const int dim = second.out_eve_dim;
  vecs.e0.assign(dim, {});
  vecs.e1.assign(dim, {});
  vecs.e2.assign(dim, {});
  vecs.e3.assign(dim, {});
  vecs.g0.assign(dim, {});
  vecs.g1.assign(dim, {});
  vecs.h0.assign(dim, {});
  vecs.h1.assign(dim, {});
  vecs.h_vac.assign(dim, {});
  for (const auto& [label, evec] : first.injected) {
    const ReverseTriple t = second.apply_to(label, evec);
    if (label.m1 == 0) {
      eve_accumulate(vecs.e0, t.on_01, inv_sqrt2);
      eve_accumulate(vecs.e1, t.on_10, inv_sqrt2);
    }
    if (label.m0 == 0) {
      eve_accumulate(vecs.e2, t.on_01, inv_sqrt2);
      eve_accumulate(vecs.e3, t.on_10, inv_sqrt2);
    }
    if (label.is_vacuum()) {
      eve_accumulate(vecs.g0, t.on_01, inv_sqrt2);
      eve_accumulate(vecs.g1, t.on_10, inv_sqrt2);
    }
    if (label.m1 >= 1 && label.m0 >= 1) {
      eve_accumulate(vecs.h0, t.on_01, inv_sqrt2);
      eve_accumulate(vecs.h1, t.on_10, inv_sqrt2);
      eve_accumulate(vecs.h_vac, t.on_00, inv_sqrt2);
    }
  }
  return {stats, vecs};
}

/// Checks the double-click bound <h0> <= p_double/2, <h1> <= p_double/2 and
/// the isometry identity p_double/2 = <h0> + <h1> + <h_vac> behind it.
inline bool check_lemma1(const EveVectors& vecs, const ObservedStatistics& stats,
                         double tol = kNormTolerance) {
  const double h0 = eve_norm_squared(vecs.h0);
  const double h1 = eve_norm_squared(vecs.h1);
  const double hv = eve_norm_squared(vecs.h_vac);
  const double half_double = 0.5 * stats.p_double;
  return h0 <= half_double + tol && h1 <= half_double + tol &&
         std::abs(half_double - (h0 + h1 + hv)) <= tol;
}

/// Probabilities of Alice's four operation choices.  The raw-key statistics
/// convention assumes the two SWAPs are equally likely, so analytic
/// comparisons require swap10 == swap01.
struct OperationWeights {
  double ctrl = 0.25;
  double swap10 = 0.25;
  double swap01 = 0.25;
  double swap_all = 0.25;

  void validate() const {
    for (double w : {ctrl, swap10, swap01, swap_all}) {
      if (!(w >= 0.0)) throw std::invalid_argument("OperationWeights: negative weight");
    }
    if (std::abs(ctrl + swap10 + swap01 + swap_all - 1.0) > kAlgebraTolerance) {
      throw std::invalid_argument("OperationWeights: weights must sum to 1");
    }
  }
};

/// Raw tallies of one Monte Carlo run.
struct MonteCarloCounts {
  std::uint64_t raw_key = 0;
  std::uint64_t mismatched_raw_key = 0;
  std::uint64_t test = 0;
  std::uint64_t mismatched_test = 0;
  std::uint64_t swap_all = 0;
  std::uint64_t mismatched_swap_all = 0;

  std::uint64_t e00 = 0, e01 = 0, e10 = 0, e11 = 0;
  std::uint64_t p0_plus = 0, p1_plus = 0;
  std::uint64_t p_plus_plus = 0;
  std::uint64_t p_ctrl_0 = 0, p_ctrl_1 = 0;
  std::uint64_t p_double = 0, p_create_0 = 0, p_create_1 = 0;

  MonteCarloCounts& operator+=(const MonteCarloCounts& o) {
    raw_key += o.raw_key;
    mismatched_raw_key += o.mismatched_raw_key;
    test += o.test;
    mismatched_test += o.mismatched_test;
    swap_all += o.swap_all;
    mismatched_swap_all += o.mismatched_swap_all;
    e00 += o.e00;
    e01 += o.e01;
    e10 += o.e10;
    e11 += o.e11;
    p0_plus += o.p0_plus;
    p1_plus += o.p1_plus;
    p_plus_plus += o.p_plus_plus;
    p_ctrl_0 += o.p_ctrl_0;
    p_ctrl_1 += o.p_ctrl_1;
    p_double += o.p_double;
    p_create_0 += o.p_create_0;
    p_create_1 += o.p_create_1;
    return *this;
  }
};

struct MonteCarloResult {
  ObservedStatistics values;
  /// Per-field binomial standard errors; zero or saturating counts fall back
  /// to the rule-of-three upper bound 3/n.
  ObservedStatistics standard_errors;
  MonteCarloCounts counts;
  std::uint64_t rounds = 0;
};

namespace detail {

struct BobDistribution {
  bool defined = false;
  std::array<double, 4> comp{};  // vacuum, click0, click1, double
  std::array<double, 4> had{};
};

/// Everything one simulated round needs, precomputed from the attack: the
/// distribution of Alice's detector reading per operation, and Bob's reading
/// conditioned on the branch that matters for the tallies (Alice seeing
/// vacuum; the other branches contribute only to round counts).
struct RoundKernel {
  std::array<std::array<double, 4>, 4> alice_outcomes{};  // per op
  std::array<BobDistribution, 4> vacuum_branch{};         // per op
};

inline std::array<double, 4> to_array(const OutcomeProbabilities& p) {
  return {p.vacuum, p.click0, p.click1, p.double_click};
}

inline RoundKernel build_round_kernel(const FirstAttack& first, const SecondAttack& second) {
  first.validate();
  if (!verify_isometry(second)) {
    throw std::invalid_argument("monte_carlo_statistics: reverse attack is not an isometry");
  }
  const FockStateVector psi0 = first.to_state();
  const std::array<AliceOperation, 4> ops = {AliceOperation::Ctrl, AliceOperation::Swap10,
                                             AliceOperation::Swap01, AliceOperation::SwapAll};
  RoundKernel kernel;
  for (std::size_t i = 0; i < ops.size(); ++i) {
    const FockStateVector after = apply_alice_operation(ops[i], psi0);
    kernel.alice_outcomes[i] =
        to_array(measurement_probabilities(after, Register::AliceAncilla,
                                           MeasurementBasis::Computational));
    const FockStateVector kept = project(after, Register::AliceAncilla, DetectionOutcome::Vacuum);
    const double branch = kept.norm_squared();
    if (branch > 0.0) {
      const FockStateVector out = apply_second_attack(second, kept);
      BobDistribution dist;
      dist.defined = true;
      auto comp = to_array(measurement_probabilities(out, Register::Bob,
                                                     MeasurementBasis::Computational));
      auto had = to_array(measurement_probabilities(out, Register::Bob,
                                                    MeasurementBasis::Hadamard));
      for (std::size_t k = 0; k < 4; ++k) {
        dist.comp[k] = comp[k] / branch;
        dist.had[k] = had[k] / branch;
      }
      kernel.vacuum_branch[i] = dist;
    }
  }
  return kernel;
}

inline std::size_t pick(const std::array<double, 4>& probs, double u) {
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return i;
  }
  return probs.size() - 1;
}

}  // namespace detail

/// Samples `rounds` protocol rounds and tallies every observable with the
/// same conditioning conventions as analytic_statistics.  Deterministic in
/// `seed`: rounds are processed in fixed-size shards whose generators depend
/// only on (seed, shard index), so the result is independent of how many
/// worker threads run them.
inline MonteCarloResult monte_carlo_statistics(const FirstAttack& first,
                                               const SecondAttack& second, std::uint64_t rounds,
                                               std::uint64_t seed,
                                               const OperationWeights& weights = {},
                                               int max_threads = 0) {
  if (rounds < 1) throw std::invalid_argument("monte_carlo_statistics: rounds must be >= 1");
  weights.validate();
  const detail::RoundKernel kernel = detail::build_round_kernel(first, second);

  constexpr std::uint64_t kShard = 1u << 16;
  const std::uint64_t shard_count = (rounds + kShard - 1) / kShard;
  const std::array<double, 4> op_weights = {weights.ctrl, weights.swap10, weights.swap01,
                                            weights.swap_all};

  MonteCarloCounts total;
  std::mutex merge_mutex;
  std::atomic<std::uint64_t> next_shard{0};

  auto run_shards = [&]() {
    MonteCarloCounts local;
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (std::uint64_t shard = next_shard.fetch_add(1); shard < shard_count;
         shard = next_shard.fetch_add(1)) {
      std::mt19937_64 rng(detail::splitmix64(seed + 0x9E3779B97F4A7C15ULL * (shard + 1)));
      const std::uint64_t begin = shard * kShard;
      const std::uint64_t end = std::min(rounds, begin + kShard);
      for (std::uint64_t r = begin; r < end; ++r) {
        const std::size_t op = detail::pick(op_weights, uni(rng));
        const bool computational = uni(rng) < 0.5;
        const std::size_t anc = detail::pick(kernel.alice_outcomes[op], uni(rng));
        const bool vacuum = anc == 0;
        const bool double_click = anc == 3;

        auto bob_click = [&](bool comp_basis) -> std::size_t {
          const detail::BobDistribution& dist = kernel.vacuum_branch[op];
          return detail::pick(comp_basis ? dist.comp : dist.had, uni(rng));
        };

        switch (op) {
          case 0:  // CTRL
            if (computational) {
              ++local.mismatched_test;
              const std::size_t bob = bob_click(true);
              if (bob == 1) ++local.p_ctrl_0;
              if (bob == 2) ++local.p_ctrl_1;
            } else {
              ++local.test;
              if (bob_click(false) == 1) ++local.p_plus_plus;
            }
            break;
          case 1:    // SWAP-10, Alice bit 0
          case 2: {  // SWAP-01, Alice bit 1
            if (computational) {
              ++local.raw_key;
              if (vacuum && kernel.vacuum_branch[op].defined) {
                const std::size_t bob = bob_click(true);
                if (op == 1 && bob == 1) ++local.e00;
                if (op == 1 && bob == 2) ++local.e01;
                if (op == 2 && bob == 1) ++local.e10;
                if (op == 2 && bob == 2) ++local.e11;
              }
            } else {
              ++local.mismatched_raw_key;
              if (vacuum && kernel.vacuum_branch[op].defined) {
                if (bob_click(false) == 1) {
                  if (op == 1) ++local.p0_plus;
                  if (op == 2) ++local.p1_plus;
                }
              }
            }
            break;
          }
          case 3:  // SWAP-ALL
          default:
            if (computational) {
              ++local.swap_all;
              if (double_click) ++local.p_double;
              if (vacuum && kernel.vacuum_branch[op].defined) {
                const std::size_t bob = bob_click(true);
                if (bob == 1) ++local.p_create_0;
                if (bob == 2) ++local.p_create_1;
              }
            } else {
              ++local.mismatched_swap_all;
            }
            break;
        }
      }
    }
    std::lock_guard<std::mutex> lock(merge_mutex);
    total += local;
  };

  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  const unsigned workers = std::min<std::uint64_t>(
      shard_count, max_threads > 0 ? static_cast<unsigned>(max_threads) : hw);
  if (workers <= 1) {
    run_shards();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run_shards);
    for (auto& t : pool) t.join();
  }

  auto estimate = [](std::uint64_t count, std::uint64_t n) -> std::pair<double, double> {
    if (n == 0) return {0.0, std::numeric_limits<double>::infinity()};
    const double p = static_cast<double>(count) / static_cast<double>(n);
    if (count == 0 || count == n) return {p, 3.0 / static_cast<double>(n)};
    return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(n))};
  };

  MonteCarloResult result;
  result.counts = total;
  result.rounds = rounds;
  auto assign = [&](double& value, double& err, std::uint64_t count, std::uint64_t n) {
    auto [p, se] = estimate(count, n);
    value = p;
    err = se;
  };
  auto& v = result.values;
  auto& se = result.standard_errors;
  assign(v.e00, se.e00, total.e00, total.raw_key);
  assign(v.e01, se.e01, total.e01, total.raw_key);
  assign(v.e10, se.e10, total.e10, total.raw_key);
  assign(v.e11, se.e11, total.e11, total.raw_key);
  assign(v.m_total, se.m_total, total.e00 + total.e01 + total.e10 + total.e11, total.raw_key);
  assign(v.p0_plus, se.p0_plus, total.p0_plus, total.mismatched_raw_key);
  assign(v.p1_plus, se.p1_plus, total.p1_plus, total.mismatched_raw_key);
  assign(v.p_plus_plus, se.p_plus_plus, total.p_plus_plus, total.test);
  assign(v.p_ctrl_0, se.p_ctrl_0, total.p_ctrl_0, total.mismatched_test);
  assign(v.p_ctrl_1, se.p_ctrl_1, total.p_ctrl_1, total.mismatched_test);
  assign(v.p_double, se.p_double, total.p_double, total.swap_all);
  assign(v.p_create_0, se.p_create_0, total.p_create_0, total.swap_all);
  assign(v.p_create_1, se.p_create_1, total.p_create_1, total.swap_all);
  return result;
}

}  // namespace mirrorsqkd

#endif  // MIRRORSQKD_STATISTICS_HPP

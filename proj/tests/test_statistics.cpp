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

#include "mirrorsqkd/statistics.hpp"

#include <cmath>

#include "gtest/gtest.h"

using namespace mirrorsqkd;

namespace {

EveVec combine(std::initializer_list<std::pair<const EveVec*, double>> terms) {
  EveVec out(terms.begin()->first->size());
  for (const auto& [vec, coeff] : terms) eve_accumulate(out, *vec, {coeff, 0.0});
  return out;
}

}  // namespace

TEST(AnalyticStatistics, ReproducesTheLosslessClosedForms) {
  auto [first, second] = build_depolarizing_attack({0.1, 0.1, 0.0, 0.0});
  const auto [stats, vecs] = analytic_statistics(first, second);
  EXPECT_NEAR(stats.e00, 0.225, 1e-14);
  EXPECT_NEAR(stats.e01, 0.025, 1e-14);
  EXPECT_NEAR(stats.e10, 0.025, 1e-14);
  EXPECT_NEAR(stats.e11, 0.225, 1e-14);
  EXPECT_NEAR(stats.m_total, 0.5, 1e-14);
  EXPECT_NEAR(stats.p0_plus, 0.125, 1e-14);
  EXPECT_NEAR(stats.p1_plus, 0.125, 1e-14);
  EXPECT_NEAR(stats.p_plus_plus, 0.9, 1e-14);
  EXPECT_NEAR(stats.p_ctrl_0, 0.5, 1e-14);
  EXPECT_NEAR(stats.p_ctrl_1, 0.5, 1e-14);
  EXPECT_NEAR(stats.p_double, 0.0, 1e-14);
  EXPECT_NEAR(stats.p_create_0, 0.0, 1e-14);
  EXPECT_NEAR(stats.p_create_1, 0.0, 1e-14);
}

TEST(AnalyticStatistics, LossyNormalizationMatchesTheClosedForm) {
  auto [first, second] = build_depolarizing_attack({0.1, 0.2, 0.3, 0.4});
  const auto [stats, vecs] = analytic_statistics(first, second);
  EXPECT_NEAR(stats.m_total, 0.5 * 0.7 * 0.6, 1e-14);
}

TEST(AnalyticStatistics, RejectsANonIsometricSecondAttack) {
  auto [first, second] = build_depolarizing_attack({0.1, 0.1, 0.0, 0.0});
  for (Complex& c : second.action.at({0, 1})[0].on_01) c *= 0.5;
  EXPECT_THROW(analytic_statistics(first, second), std::invalid_argument);
}

TEST(AnalyticStatistics, MTotalIsTheSumOfTheJointProbabilities) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto [first, second] = random_attack(seed, 1 + static_cast<int>(seed % 4), 2);
    const auto [stats, vecs] = analytic_statistics(first, second);
    EXPECT_NO_THROW(stats.validate());
    EXPECT_NEAR(stats.m_total, stats.e00 + stats.e01 + stats.e10 + stats.e11, 1e-10);
  }
}

TEST(AnalyticStatistics, EveVectorNormsEqualTheProbabilities) {
  for (std::uint64_t seed = 100; seed < 120; ++seed) {
    auto [first, second] = random_attack(seed, 2, 2);
    const auto [stats, vecs] = analytic_statistics(first, second);
    EXPECT_NEAR(eve_norm_squared(vecs.e0), stats.e00, 1e-10);
    EXPECT_NEAR(eve_norm_squared(vecs.e1), stats.e01, 1e-10);
    EXPECT_NEAR(eve_norm_squared(vecs.e2), stats.e10, 1e-10);
    EXPECT_NEAR(eve_norm_squared(vecs.e3), stats.e11, 1e-10);
  }
}

// 2 Re<E0|E1> = 2 p_{0,+} - (<E0> + <E1>), and the E2/E3 counterpart.
TEST(AnalyticStatistics, MismatchedRawKeyIdentities) {
  for (std::uint64_t seed = 200; seed < 220; ++seed) {
    auto [first, second] = random_attack(seed, 3, 2);
    const auto [stats, vecs] = analytic_statistics(first, second);
    EXPECT_NEAR(2.0 * std::real(eve_inner(vecs.e0, vecs.e1)),
                2.0 * stats.p0_plus - (stats.e00 + stats.e01), 1e-10);
    EXPECT_NEAR(2.0 * std::real(eve_inner(vecs.e2, vecs.e3)),
                2.0 * stats.p1_plus - (stats.e10 + stats.e11), 1e-10);
  }
}

// p_{+,+} = | sum_i E_i - sum_j (g_j - h_j) |^2.
TEST(AnalyticStatistics, TestRoundIdentity) {
  for (std::uint64_t seed = 300; seed < 320; ++seed) {
    auto [first, second] = random_attack(seed, 2, 2);
    const auto [stats, vecs] = analytic_statistics(first, second);
    const EveVec sum = combine({{&vecs.e0, 1.0},
                                {&vecs.e1, 1.0},
                                {&vecs.e2, 1.0},
                                {&vecs.e3, 1.0},
                                {&vecs.g0, -1.0},
                                {&vecs.g1, -1.0},
                                {&vecs.h0, 1.0},
                                {&vecs.h1, 1.0}});
    EXPECT_NEAR(eve_norm_squared(sum), stats.p_plus_plus, 1e-10);
  }
}

// p_ctrl^0 = 2 |E0 + E2 - g0 + h0|^2 and p_ctrl^1 = 2 |E1 + E3 - g1 + h1|^2.
TEST(AnalyticStatistics, MismatchedTestIdentities) {
  for (std::uint64_t seed = 400; seed < 420; ++seed) {
    auto [first, second] = random_attack(seed, 2, 2);
    const auto [stats, vecs] = analytic_statistics(first, second);
    const EveVec c0 = combine({{&vecs.e0, 1.0}, {&vecs.e2, 1.0}, {&vecs.g0, -1.0}, {&vecs.h0, 1.0}});
    const EveVec c1 = combine({{&vecs.e1, 1.0}, {&vecs.e3, 1.0}, {&vecs.g1, -1.0}, {&vecs.h1, 1.0}});
    EXPECT_NEAR(2.0 * eve_norm_squared(c0), stats.p_ctrl_0, 1e-10);
    EXPECT_NEAR(2.0 * eve_norm_squared(c1), stats.p_ctrl_1, 1e-10);
  }
}

// p_create^j = 2 <g_j>.
TEST(AnalyticStatistics, CreationIdentities) {
  for (std::uint64_t seed = 500; seed < 520; ++seed) {
    auto [first, second] = random_attack(seed, 2, 2);
    const auto [stats, vecs] = analytic_statistics(first, second);
    EXPECT_NEAR(2.0 * eve_norm_squared(vecs.g0), stats.p_create_0, 1e-10);
    EXPECT_NEAR(2.0 * eve_norm_squared(vecs.g1), stats.p_create_1, 1e-10);
  }
}

TEST(Lemma1, SinglePhotonAttacksHaveNoDoubleClicks) {
  auto [first, second] = build_depolarizing_attack({0.15, 0.25, 0.2, 0.1});
  const auto [stats, vecs] = analytic_statistics(first, second);
  EXPECT_NEAR(stats.p_double, 0.0, 1e-14);
  EXPECT_NEAR(eve_norm_squared(vecs.h0), 0.0, 1e-14);
  EXPECT_NEAR(eve_norm_squared(vecs.h1), 0.0, 1e-14);
  EXPECT_TRUE(check_lemma1(vecs, stats));
}

TEST(Lemma1, HoldsForRandomMultiPhotonAttacks) {
  for (std::uint64_t seed = 600; seed < 800; ++seed) {
    auto [first, second] = random_attack(seed, 1 + static_cast<int>(seed % 4), 2);
    const auto [stats, vecs] = analytic_statistics(first, second);
    EXPECT_TRUE(check_lemma1(vecs, stats)) << "seed " << seed;
  }
}

TEST(Lemma1, CertainDoublePhotonInjection) {
  FirstAttack first;
  first.eve_dim = 1;
  first.injected[{1, 1}] = EveVec{{1.0, 0.0}};

  SecondAttack second;
  second.in_eve_dim = 1;
  second.out_eve_dim = 1;
  const double a = std::sqrt(0.2), b = std::sqrt(0.3), c = std::sqrt(0.5);
  second.action[{1, 1}] = {ReverseTriple{EveVec{{a, 0.0}}, EveVec{{b, 0.0}}, EveVec{{c, 0.0}}}};
  ASSERT_TRUE(verify_isometry(second));

  const auto [stats, vecs] = analytic_statistics(first, second);
  EXPECT_NEAR(stats.p_double, 1.0, 1e-14);
  EXPECT_LE(eve_norm_squared(vecs.h0) + eve_norm_squared(vecs.h1), 0.5 + 1e-14);
  EXPECT_TRUE(check_lemma1(vecs, stats));
}

TEST(Lemma1, RejectsAFabricatedViolation) {
  auto [first, second] = random_attack(7, 2, 2);
  auto [stats, vecs] = analytic_statistics(first, second);
  stats.p_double = 0.0;  // pretend no double-clicks while the h vectors are nonzero
  if (eve_norm_squared(vecs.h0) > 1e-6) {
    EXPECT_FALSE(check_lemma1(vecs, stats));
  }
}

TEST(MonteCarlo, AgreesWithTheAnalyticStatistics) {
  auto [first, second] = build_depolarizing_attack({0.1, 0.1, 0.0, 0.0});
  const auto [expected, vecs] = analytic_statistics(first, second);
  const MonteCarloResult mc = monte_carlo_statistics(first, second, 200000, 11);
  const auto want = statistics_fields(expected);
  const auto got = statistics_fields(mc.values);
  const auto err = statistics_fields(mc.standard_errors);
  for (std::size_t i = 0; i < want.size(); ++i) {
    if (std::isinf(err[i].second)) continue;
    const double tolerance = 5.0 * std::max(err[i].second, 1e-12);
    EXPECT_NEAR(got[i].second, want[i].second, tolerance) << want[i].first;
  }
}

TEST(MonteCarlo, IsDeterministicInTheSeed) {
  auto [first, second] = build_depolarizing_attack({0.1, 0.15, 0.1, 0.0});
  const MonteCarloResult a = monte_carlo_statistics(first, second, 70000, 3);
  const MonteCarloResult b = monte_carlo_statistics(first, second, 70000, 3);
  EXPECT_EQ(a.counts.raw_key, b.counts.raw_key);
  EXPECT_EQ(a.counts.e00, b.counts.e00);
  EXPECT_EQ(a.counts.p_plus_plus, b.counts.p_plus_plus);
  const MonteCarloResult c = monte_carlo_statistics(first, second, 70000, 4);
  EXPECT_NE(a.counts.e00, c.counts.e00);
}

TEST(MonteCarlo, ResultIsIndependentOfTheWorkerCount) {
  auto [first, second] = build_depolarizing_attack({0.05, 0.05, 0.0, 0.2});
  const MonteCarloResult serial = monte_carlo_statistics(first, second, 150000, 5, {}, 1);
  const MonteCarloResult parallel = monte_carlo_statistics(first, second, 150000, 5, {}, 4);
  EXPECT_EQ(serial.counts.raw_key, parallel.counts.raw_key);
  EXPECT_EQ(serial.counts.e00, parallel.counts.e00);
  EXPECT_EQ(serial.counts.e11, parallel.counts.e11);
  EXPECT_EQ(serial.counts.p_plus_plus, parallel.counts.p_plus_plus);
  EXPECT_EQ(serial.counts.p_double, parallel.counts.p_double);
}

TEST(MonteCarlo, RejectsZeroRounds) {
  auto [first, second] = build_depolarizing_attack({0.1, 0.1, 0.0, 0.0});
  EXPECT_THROW(monte_carlo_statistics(first, second, 0, 1), std::invalid_argument);
}

TEST(MonteCarlo, RejectsBadOperationWeights) {
  auto [first, second] = build_depolarizing_attack({0.1, 0.1, 0.0, 0.0});
  OperationWeights weights;
  weights.ctrl = 0.5;  // now sums to 1.25
  EXPECT_THROW(monte_carlo_statistics(first, second, 10, 1, weights), std::invalid_argument);
}

// The sampling error shrinks like 1/sqrt(rounds); at a 100x round count the
// aggregate error should drop by an order of magnitude.
TEST(MonteCarlo, ErrorShrinksWithTheRoundCount) {
  auto [first, second] = build_depolarizing_attack({0.1, 0.1, 0.0, 0.0});
  const auto [expected, vecs] = analytic_statistics(first, second);
  auto rms_error = [&](std::uint64_t rounds) {
    const MonteCarloResult mc = monte_carlo_statistics(first, second, rounds, 29);
    const auto want = statistics_fields(expected);
    const auto got = statistics_fields(mc.values);
    double acc = 0.0;
    for (std::size_t i = 0; i < want.size(); ++i) {
      acc += (got[i].second - want[i].second) * (got[i].second - want[i].second);
    }
    return std::sqrt(acc / static_cast<double>(want.size()));
  };
  const double coarse = rms_error(10000);
  const double fine = rms_error(1000000);
  EXPECT_LT(fine, coarse / 2.0);
}

TEST(ObservedStatistics, ValidateCatchesBrokenInvariants) {
  ObservedStatistics s;
  s.e00 = 0.25;
  s.m_total = 0.5;  // != sum of the e's
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s.m_total = 0.25;
  EXPECT_NO_THROW(s.validate());
  s.p_plus_plus = 1.5;
  EXPECT_THROW(s.validate(), std::invalid_argument);
}

TEST(ObservedStatistics, ScaledMultipliesEveryField) {
  ObservedStatistics s;
  s.e00 = 0.2;
  s.e01 = 0.1;
  s.m_total = 0.3;
  s.p_plus_plus = 0.8;
  const ObservedStatistics t = scaled(s, 0.5);
  EXPECT_DOUBLE_EQ(t.e00, 0.1);
  EXPECT_DOUBLE_EQ(t.e01, 0.05);
  EXPECT_DOUBLE_EQ(t.m_total, 0.15);
  EXPECT_DOUBLE_EQ(t.p_plus_plus, 0.4);
}

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

#include "mirrorsqkd/keyrate.hpp"

#include <cmath>
#include <random>

#include "gtest/gtest.h"
#include "mirrorsqkd/scenarios.hpp"

using namespace mirrorsqkd;

namespace {

ObservedStatistics lossless_stats(double qz, double qx) {
  ScenarioConfig cfg;
  cfg.model = NoiseModel::Explicit;
  cfg.qz = qz;
  cfg.qx = qx;
  return closed_form_statistics(cfg);
}

}  // namespace

TEST(BinaryEntropy, KnownValues) {
  EXPECT_DOUBLE_EQ(binary_entropy(0.5), 1.0);
  EXPECT_DOUBLE_EQ(binary_entropy(0.0), 0.0);
  EXPECT_DOUBLE_EQ(binary_entropy(1.0), 0.0);
  EXPECT_NEAR(binary_entropy(0.11), 0.49992, 1e-4);
}

TEST(BinaryEntropy, SymmetricAroundOneHalf) {
  for (double x : {0.01, 0.2, 0.35, 0.49}) {
    EXPECT_NEAR(binary_entropy(x), binary_entropy(1.0 - x), 1e-15);
  }
}

TEST(BinaryEntropy, RejectsArgumentsOutsideTheUnitInterval) {
  EXPECT_THROW(binary_entropy(-0.01), std::domain_error);
  EXPECT_THROW(binary_entropy(1.01), std::domain_error);
}

TEST(Constraints, LosslessClosedForms) {
  const ObservedStatistics s = lossless_stats(0.1, 0.2);
  const ConstraintSet c = build_constraints(s);
  EXPECT_NEAR(c.sum_lower_bound, 0.25 - 0.5 * 0.2, 1e-14);
  EXPECT_NEAR(c.cs_bound_03, 0.25 * (1.0 - 0.1), 1e-14);
  EXPECT_NEAR(c.cs_bound_12, 0.25 * 0.1, 1e-14);
}

TEST(Constraints, UniformLossScalesAllThreeBounds) {
  ScenarioConfig cfg;
  cfg.model = NoiseModel::Explicit;
  cfg.qz = 0.08;
  cfg.qx = 0.14;
  cfg.loss_mode = LossMode::Explicit;
  cfg.p_loss_forward = 0.3;
  cfg.p_loss_reverse = 0.5;
  const ConstraintSet c = build_constraints(closed_form_statistics(cfg));
  const double trans = 0.7 * 0.5;
  EXPECT_NEAR(c.sum_lower_bound, trans * (0.25 - 0.5 * 0.14), 1e-14);
  EXPECT_NEAR(c.cs_bound_03, trans * 0.25 * (1.0 - 0.08), 1e-14);
  EXPECT_NEAR(c.cs_bound_12, trans * 0.25 * 0.08, 1e-14);
}

TEST(Constraints, AllZeroStatisticsGiveZeroBounds) {
  const ConstraintSet c = build_constraints(ObservedStatistics{});
  EXPECT_DOUBLE_EQ(c.sum_lower_bound, 0.0);
  EXPECT_DOUBLE_EQ(c.cs_bound_03, 0.0);
  EXPECT_DOUBLE_EQ(c.cs_bound_12, 0.0);
}

TEST(SaeBound, ZeroNoiseAtTheForcedPointIsOneBit) {
  const ObservedStatistics s = lossless_stats(0.0, 0.0);
  EXPECT_NEAR(sae_bound(s, 0.25, 0.0), 1.0, 1e-12);
}

TEST(SaeBound, VanishesWhenBothBracketsCancel) {
  ObservedStatistics s;
  s.e00 = s.e11 = 0.2;
  s.e01 = s.e10 = 0.05;
  s.m_total = 0.5;
  // re = 0 with equal pairs makes each lambda 1/2, so each bracket is
  // H2(1/2) - H2(1/2) = 0.
  EXPECT_NEAR(sae_bound(s, 0.0, 0.0), 0.0, 1e-14);
}

TEST(SaeBound, DependsOnlyOnTheSquaredInnerProducts) {
  const ObservedStatistics s = lossless_stats(0.12, 0.12);
  EXPECT_DOUBLE_EQ(sae_bound(s, 0.1, 0.01), sae_bound(s, -0.1, 0.01));
  EXPECT_DOUBLE_EQ(sae_bound(s, 0.1, 0.01), sae_bound(s, 0.1, -0.01));
}

TEST(SaeBound, RequiresRawKeyRounds) {
  ObservedStatistics s;  // m_total = 0
  EXPECT_THROW(sae_bound(s, 0.0, 0.0), std::domain_error);
}

TEST(MinimizeSae, ZeroNoiseForcesTheArgmin) {
  const KeyRateResult r = minimize_sae(lossless_stats(0.0, 0.0));
  EXPECT_TRUE(r.feasible);
  EXPECT_NEAR(r.sae_lower, 1.0, 1e-12);
  EXPECT_NEAR(r.argmin_re03, 0.25, 1e-12);
  EXPECT_NEAR(r.argmin_re12, 0.0, 1e-12);
  EXPECT_NEAR(r.lambda1, 1.0, 1e-12);
}

TEST(MinimizeSae, InfeasibleStatisticsAreFlagged) {
  ObservedStatistics s;
  s.e00 = s.e01 = s.e10 = s.e11 = 0.05;
  s.m_total = 0.2;
  s.p_plus_plus = 1.0;  // pushes L far above cs03 + cs12
  const KeyRateResult r = minimize_sae(s);
  EXPECT_FALSE(r.feasible);
  EXPECT_TRUE(std::isnan(key_rate(s).rate));
}

TEST(MinimizeSae, GridRefinementHasConverged) {
  ScenarioConfig cfg;
  cfg.model = NoiseModel::Dependent;
  cfg.qz = 0.05;
  const ObservedStatistics s = closed_form_statistics(cfg);
  const double coarse = minimize_sae(s, 2001).sae_lower;
  const double fine = minimize_sae(s, 4001).sae_lower;
  EXPECT_TRUE(minimize_sae(s, 2001).feasible);
  EXPECT_LT(std::abs(coarse - fine), 1e-6);
  EXPECT_GT(coarse, 0.0);
  EXPECT_LT(coarse, 1.0);
}

TEST(MinimizeSae, RequiresAtLeastThreeGridPoints) {
  EXPECT_THROW(minimize_sae(lossless_stats(0.1, 0.1), 2), std::invalid_argument);
}

TEST(ConditionalEntropy, MatchesTheBinaryEntropyClosedForm) {
  for (double qz : {0.0, 0.03, 0.11, 0.3, 0.5}) {
    const ObservedStatistics s = lossless_stats(qz, qz);
    EXPECT_NEAR(conditional_entropy_ab(s), binary_entropy(qz), 1e-12) << qz;
  }
}

TEST(ConditionalEntropy, RequiresRawKeyRounds) {
  EXPECT_THROW(conditional_entropy_ab(ObservedStatistics{}), std::domain_error);
}

TEST(KeyRate, ZeroNoiseYieldsExactlyOneBit) {
  const KeyRateResult r = key_rate(lossless_stats(0.0, 0.0));
  EXPECT_TRUE(r.feasible);
  EXPECT_NEAR(r.rate, 1.0, 1e-9);
}

TEST(KeyRate, DependentModelVanishesNearElevenPercent) {
  ScenarioConfig cfg;
  cfg.model = NoiseModel::Dependent;
  cfg.qz = 0.11;
  const KeyRateResult r = key_rate(closed_form_statistics(cfg));
  EXPECT_LT(std::abs(r.rate), 0.01);
}

TEST(KeyRate, IndependentModelVanishesNearSevenNinePercent) {
  ScenarioConfig cfg;
  cfg.model = NoiseModel::Independent;
  cfg.qz = 0.079;
  const KeyRateResult r = key_rate(closed_form_statistics(cfg));
  EXPECT_LT(std::abs(r.rate), 0.01);
}

TEST(KeyRate, RateEqualsBoundMinusConditionalEntropy) {
  const ObservedStatistics s = lossless_stats(0.07, 0.12);
  const KeyRateResult r = key_rate(s);
  EXPECT_NEAR(r.rate, r.sae_lower - r.h_a_given_b, 1e-12);
}

TEST(KeyRate, NegativeRatesAreReturnedAsIs) {
  ScenarioConfig cfg;
  cfg.model = NoiseModel::Dependent;
  cfg.qz = 0.15;
  const KeyRateResult r = key_rate(closed_form_statistics(cfg));
  EXPECT_TRUE(r.feasible);
  EXPECT_LT(r.rate, 0.0);
}

TEST(KeyRate, IsScaleInvariant) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> qdist(0.0, 0.4);
  for (int i = 0; i < 10; ++i) {
    const ObservedStatistics s = lossless_stats(qdist(rng), qdist(rng));
    const KeyRateResult base = key_rate(s);
    for (double eta : {0.9, 0.5, 0.1}) {
      const KeyRateResult scaled_result = key_rate(scaled(s, eta));
      ASSERT_EQ(base.feasible, scaled_result.feasible);
      EXPECT_NEAR(scaled_result.rate, base.rate, 1e-8) << "eta " << eta;
    }
  }
  // Attack-generated statistics, including double-click and creation terms.
  for (std::uint64_t seed = 40; seed < 50; ++seed) {
    auto [first, second] = random_attack(seed, 2, 2);
    const auto [s, vecs] = analytic_statistics(first, second);
    const KeyRateResult base = key_rate(s);
    for (double eta : {0.9, 0.5, 0.1}) {
      const KeyRateResult scaled_result = key_rate(scaled(s, eta));
      ASSERT_EQ(base.feasible, scaled_result.feasible);
      if (base.feasible) {
        EXPECT_NEAR(scaled_result.rate, base.rate, 1e-8);
      }
    }
  }
}

// Statistics produced by an actual attack always admit a feasible point (the
// attack's own inner products), and the minimized bound can never exceed the
// bound evaluated there.
TEST(KeyRate, MinimizationIsSoundAgainstTheGeneratingAttack) {
  for (std::uint64_t seed = 60; seed < 80; ++seed) {
    auto [first, second] = random_attack(seed, 2, 2);
    const auto [s, vecs] = analytic_statistics(first, second);
    const KeyRateResult r = minimize_sae(s);
    ASSERT_TRUE(r.feasible) << "attack statistics must be feasible";
    const double true_re03 = std::real(eve_inner(vecs.e0, vecs.e3));
    const double true_re12 = std::real(eve_inner(vecs.e1, vecs.e2));
    EXPECT_LE(r.sae_lower, sae_bound(s, true_re03, true_re12) + 1e-12);
  }
}

TEST(KeyRate, MinimumIsBelowRandomFeasiblePoints) {
  std::mt19937_64 rng(71);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const ObservedStatistics s = lossless_stats(0.09, 0.16);
  const ConstraintSet c = build_constraints(s);
  const KeyRateResult r = minimize_sae(s);
  for (int i = 0; i < 200; ++i) {
    const double re12 = (2.0 * uni(rng) - 1.0) * c.cs_bound_12;
    const double lo = std::max(-c.cs_bound_03, c.sum_lower_bound - re12);
    if (lo > c.cs_bound_03) continue;
    const double re03 = lo + uni(rng) * (c.cs_bound_03 - lo);
    EXPECT_GE(sae_bound(s, re03, re12) + 1e-12, r.sae_lower);
  }
}

TEST(KeyRate, ArgminSatisfiesTheConstraints) {
  for (double qz : {0.02, 0.06, 0.1}) {
    ScenarioConfig cfg;
    cfg.model = NoiseModel::Independent;
    cfg.qz = qz;
    const ObservedStatistics s = closed_form_statistics(cfg);
    const ConstraintSet c = build_constraints(s);
    const KeyRateResult r = minimize_sae(s);
    EXPECT_GE(r.argmin_re03 + r.argmin_re12, c.sum_lower_bound - 1e-9);
    EXPECT_LE(std::abs(r.argmin_re03), c.cs_bound_03 + 1e-12);
    EXPECT_LE(std::abs(r.argmin_re12), c.cs_bound_12 + 1e-12);
    EXPECT_GE(r.lambda1, 0.5);
    EXPECT_LE(r.lambda1, 1.0);
    EXPECT_GE(r.lambda2, 0.5);
    EXPECT_LE(r.lambda2, 1.0);
  }
}

TEST(KeyRate, IsBitwiseDeterministic) {
  const ObservedStatistics s = lossless_stats(0.083, 0.127);
  const KeyRateResult a = key_rate(s);
  const KeyRateResult b = key_rate(s);
  EXPECT_EQ(a.rate, b.rate);
  EXPECT_EQ(a.sae_lower, b.sae_lower);
  EXPECT_EQ(a.argmin_re03, b.argmin_re03);
  EXPECT_EQ(a.argmin_re12, b.argmin_re12);
}

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

#ifndef MIRRORSQKD_SCENARIOS_HPP
#define MIRRORSQKD_SCENARIOS_HPP

#include <cmath>
#include <stdexcept>
#include <vector>

#include "mirrorsqkd/adversary.hpp"
#include "mirrorsqkd/keyrate.hpp"
#include "mirrorsqkd/statistics.hpp"

/// The two worked single-photon scenarios (with and without losses), their
/// closed-form statistics, the fiber-loss model, the two-copies-of-BB84
/// baseline, and threshold / sweep drivers.
namespace mirrorsqkd {

/// How the test-round error relates to the raw-key error:
///   Dependent    qx = qz,
///   Independent  qx = 2 qz (1 - qz)  (two independent depolarizing segments),
///   Explicit     qx given directly.
enum class NoiseModel { Dependent, Independent, Explicit };

enum class LossMode { None, Explicit, Fiber };

/// Reading of the fiber-loss exponent with alpha in dB/km: PaperLiteral uses
/// 10^(-alpha l) as printed in the model; DbPer10 uses the conventional
/// 10^(-alpha l / 10).  Both are offered because the literal form omits the
/// usual /10.
enum class DbConvention { PaperLiteral, DbPer10 };

struct ScenarioConfig {
  NoiseModel model = NoiseModel::Dependent;
  double qz = 0.0;
  double qx = 0.0;  // ignored unless model == Explicit
  LossMode loss_mode = LossMode::None;
  double p_loss_forward = 0.0;
  double p_loss_reverse = 0.0;
  double alpha = 0.15;     // dB/km
  double length_km = 0.0;  // fiber length
  DbConvention db_convention = DbConvention::PaperLiteral;

  void validate() const {
    if (!(qz >= 0.0 && qz <= 0.5)) {
      throw std::invalid_argument("ScenarioConfig: qz must lie in [0, 0.5]");
    }
    if (model == NoiseModel::Explicit && !(qx >= 0.0 && qx <= 0.5)) {
      throw std::invalid_argument("ScenarioConfig: qx must lie in [0, 0.5]");
    }
    if (loss_mode == LossMode::Explicit &&
        (!(p_loss_forward >= 0.0 && p_loss_forward < 1.0) ||
         !(p_loss_reverse >= 0.0 && p_loss_reverse < 1.0))) {
      throw std::invalid_argument("ScenarioConfig: loss probabilities must lie in [0, 1)");
    }
    if (!(alpha >= 0.0)) throw std::invalid_argument("ScenarioConfig: alpha must be >= 0");
    if (!(length_km >= 0.0)) throw std::invalid_argument("ScenarioConfig: length_km must be >= 0");
  }

  double effective_qx() const {
    switch (model) {
      case NoiseModel::Dependent: return qz;
      case NoiseModel::Independent: return 2.0 * qz * (1.0 - qz);
      case NoiseModel::Explicit:
      default: return qx;
    }
  }

  std::pair<double, double> effective_losses() const;

  NoiseChannelSpec to_channel_spec() const {
    auto [pf, pr] = effective_losses();
    return NoiseChannelSpec{qz, effective_qx(), pf, pr};
  }
};

/// Loss probability of a fiber of the given length: 1 - 10^(-alpha l) in the
/// literal convention, 1 - 10^(-alpha l / 10) in the dB-per-10 one.
inline double fiber_loss(double alpha_db_per_km, double length_km, DbConvention convention) {
  if (!(alpha_db_per_km >= 0.0) || !(length_km >= 0.0)) {
    throw std::invalid_argument("fiber_loss: alpha and length must be >= 0");
  }
  const double exponent = convention == DbConvention::PaperLiteral
                              ? alpha_db_per_km * length_km
                              : alpha_db_per_km * length_km / 10.0;
  return 1.0 - std::pow(10.0, -exponent);
}

inline std::pair<double, double> ScenarioConfig::effective_losses() const {
  switch (loss_mode) {
    case LossMode::None: return {0.0, 0.0};
    case LossMode::Explicit: return {p_loss_forward, p_loss_reverse};
    case LossMode::Fiber:
    default: {
      const double p = fiber_loss(alpha, length_km, db_convention);
      return {p, p};  // same fiber in both directions
    }
  }
}

/// The closed-form statistics of the single-photon scenarios.  With
/// transmittance T = (1 - pF)(1 - pR):
///
///   <E0> = <E3> = T (1 - qz)/4,   <E1> = <E2> = T qz/4,   M = T/2,
///   p_{0,+} = p_{1,+} = T/8,      p_{+,+} = T (1 - qx),
///   p_ctrl = T/2 each,            p_double = p_create = 0.
inline ObservedStatistics closed_form_statistics(const ScenarioConfig& cfg) {
  cfg.validate();
  auto [pf, pr] = cfg.effective_losses();
  const double trans = (1.0 - pf) * (1.0 - pr);
  const double qz = cfg.qz;
  const double qx = cfg.effective_qx();
  ObservedStatistics s;
  s.e00 = s.e11 = 0.25 * trans * (1.0 - qz);
  s.e01 = s.e10 = 0.25 * trans * qz;
  s.m_total = 0.5 * trans;
  s.p0_plus = s.p1_plus = 0.125 * trans;
  s.p_plus_plus = trans * (1.0 - qx);
  s.p_ctrl_0 = s.p_ctrl_1 = 0.5 * trans;
  s.p_double = s.p_create_0 = s.p_create_1 = 0.0;
  return s;
}

/// Rate of two copies of BB84 run over the same noise, 2 (1 - 2 H2(p)):
/// the standard comparison point for a two-way protocol.
inline double bb84_baseline(double p) {
  if (std::isnan(p) || p < 0.0 || p > 0.5) {
    throw std::domain_error("bb84_baseline: p must lie in [0, 0.5]");
  }
  return 2.0 * (1.0 - 2.0 * binary_entropy(p));
}

struct ThresholdResult {
  double qz = 0.0;       // midpoint of the final bracket
  double qz_low = 0.0;   // rate still non-negative here
  double qz_high = 0.0;  // rate negative here
  int iterations = 0;
};

/// Bisects for the noise level where the key rate crosses zero, scanning qz
/// with the template's noise model and losses held fixed.  Requires a sign
/// change over [0, 0.25].
inline ThresholdResult find_threshold(const ScenarioConfig& tmpl, double tolerance = 1e-4,
                                      int grid_points = 2001) {
  if (!(tolerance > 0.0)) throw std::invalid_argument("find_threshold: tolerance must be > 0");
  auto rate_at = [&](double qz) {
    ScenarioConfig cfg = tmpl;
    cfg.qz = qz;
    return key_rate(closed_form_statistics(cfg), grid_points).rate;
  };
  double lo = 0.0;
  double hi = 0.25;
  if (!(rate_at(lo) > 0.0) || !(rate_at(hi) < 0.0)) {
    throw std::runtime_error("find_threshold: no sign change over qz in [0, 0.25]");
  }
  ThresholdResult result;
  while (hi - lo > tolerance) {
    const double mid = 0.5 * (lo + hi);
    if (rate_at(mid) >= 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
    ++result.iterations;
  }
  result.qz_low = lo;
  result.qz_high = hi;
  result.qz = 0.5 * (lo + hi);
  return result;
}

struct CurvePoint {
  double qz = 0.0;
  double qx = 0.0;
  double rate = 0.0;
  /// rate weighted by the raw-key throughput M, which does not divide out
  /// uniform losses the way the per-raw-key-round rate does.
  double rate_throughput_weighted = 0.0;
  double bb84_rate = 0.0;
  double sae_lower = 0.0;
  double h_a_given_b = 0.0;
  bool feasible = false;
};

/// Key-rate curve over an evenly spaced qz grid, with the BB84 comparison
/// column.  A degenerate range (start == end) yields the single distinct
/// point.
inline std::vector<CurvePoint> sweep_curve(const ScenarioConfig& tmpl, double qz_start,
                                           double qz_end, int steps, int grid_points = 2001) {
  if (steps < 2) throw std::invalid_argument("sweep_curve: steps must be >= 2");
  const int rows = qz_start == qz_end ? 1 : steps;
  std::vector<CurvePoint> curve;
  curve.reserve(static_cast<std::size_t>(rows));
  for (int i = 0; i < rows; ++i) {
    ScenarioConfig cfg = tmpl;
    cfg.qz = rows == 1 ? qz_start
                       : qz_start + (qz_end - qz_start) * static_cast<double>(i) / (steps - 1);
    const ObservedStatistics stats = closed_form_statistics(cfg);
    const KeyRateResult kr = key_rate(stats, grid_points);
    CurvePoint point;
    point.qz = cfg.qz;
    point.qx = cfg.effective_qx();
    point.rate = kr.rate;
    point.rate_throughput_weighted = kr.rate * stats.m_total;
    point.bb84_rate = bb84_baseline(cfg.qz);
    point.sae_lower = kr.sae_lower;
    point.h_a_given_b = kr.h_a_given_b;
    point.feasible = kr.feasible;
    curve.push_back(point);
  }
  return curve;
}

}  // namespace mirrorsqkd

#endif  // MIRRORSQKD_SCENARIOS_HPP

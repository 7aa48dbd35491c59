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

#ifndef MIRRORSQKD_KEYRATE_HPP
#define MIRRORSQKD_KEYRATE_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>

#include "mirrorsqkd/statistics.hpp"

/// The proven secret-key-rate lower bound: a conditional-entropy floor for
/// S(A|E) minimized over the two unobserved inner products, the error
/// correction cost H(A|B), and the Devetak-Winter rate r = S(A|E) - H(A|B),
/// all in bits per post-selected raw-key round.
namespace mirrorsqkd {

/// H2(x) = -x log2 x - (1-x) log2 (1-x), with H2(0) = H2(1) = 0.
inline double binary_entropy(double x) {
  if (std::isnan(x) || x < -kAlgebraTolerance || x > 1.0 + kAlgebraTolerance) {
    throw std::domain_error("binary_entropy: argument outside [0, 1]");
  }
  x = std::clamp(x, 0.0, 1.0);
  if (x == 0.0 || x == 1.0) return 0.0;
  return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

/// Shannon entropy in bits over a probability vector, with 0 log 0 = 0.
inline double shannon_entropy(std::span<const double> probs) {
  double h = 0.0;
  for (double p : probs) {
    if (std::isnan(p) || p < -kAlgebraTolerance) {
      throw std::domain_error("shannon_entropy: negative probability");
    }
    if (p > 0.0) h -= p * std::log2(p);
  }
  return h;
}

/// The three constraints of the minimization: a lower bound on
/// Re<E0|E3> + Re<E1|E2> and Cauchy-Schwarz caps on each term.
struct ConstraintSet {
  double sum_lower_bound = 0.0;  // L
  double cs_bound_03 = 0.0;      // |Re<E0|E3>| <= sqrt(<E0><E3>)
  double cs_bound_12 = 0.0;      // |Re<E1|E2>| <= sqrt(<E1><E2>)
};

/// Evaluates the constraint right-hand sides from the observed statistics:
///
///   L = p_pp/2 - p0p - p1p - (pctrl0 + pctrl1)/4 + M/2
///       - (sqrt(pcreate1) + sqrt(pdouble)) (sqrt(<E0>) + sqrt(<E2>)) / sqrt(2)
///       - (sqrt(pcreate0) + sqrt(pdouble)) (sqrt(<E1>) + sqrt(<E3>)) / sqrt(2)
///       - (sqrt(pcreate0) + sqrt(pdouble)) (sqrt(pcreate1) + sqrt(pdouble)) / 2.
inline ConstraintSet build_constraints(const ObservedStatistics& s) {
  s.validate();
  auto root = [](double x) { return std::sqrt(std::max(0.0, x)); };
  constexpr double inv_sqrt2 = 0.70710678118654752440;
  const double create0 = root(s.p_create_0) + root(s.p_double);
  const double create1 = root(s.p_create_1) + root(s.p_double);
  ConstraintSet c;
  c.sum_lower_bound = 0.5 * s.p_plus_plus - s.p0_plus - s.p1_plus -
                      0.25 * (s.p_ctrl_0 + s.p_ctrl_1) + 0.5 * s.m_total -
                      inv_sqrt2 * create1 * (root(s.e00) + root(s.e10)) -
                      inv_sqrt2 * create0 * (root(s.e01) + root(s.e11)) -
                      0.5 * create0 * create1;
  c.cs_bound_03 = root(s.e00 * s.e11);
  c.cs_bound_12 = root(s.e01 * s.e10);
  return c;
}

namespace detail {

struct SaeEvaluation {
  double value = 0.0;  // clamped at 0
  double raw = 0.0;    // unclamped two-term sum
  double lambda1 = 0.5;
  double lambda2 = 0.5;
};

// One eigenvalue-style parameter of the entropy bound:
// 1/2 + sqrt((a - b)^2 + 4 re^2) / (2 (a + b)), clamped into [1/2, 1].
inline double lambda_parameter(double a, double b, double re) {
  const double weight = a + b;
  if (weight <= 0.0) return 0.5;
  const double disc = std::sqrt((a - b) * (a - b) + 4.0 * re * re);
  return std::clamp(0.5 + disc / (2.0 * weight), 0.5, 1.0);
}

/// The conditional-entropy floor evaluated at a candidate pair of inner
/// products.  A term with zero weight contributes nothing (continuous
/// extension); negative brackets are kept and only the total is clamped.
inline SaeEvaluation evaluate_sae_bound(const ObservedStatistics& s, double re03, double re12) {
  if (s.m_total <= 0.0) {
    throw std::domain_error("sae_bound: m_total must be positive (no raw key exists)");
  }
  SaeEvaluation out;
  const double w1 = s.e00 + s.e11;
  const double w2 = s.e01 + s.e10;
  double raw = 0.0;
  if (w1 > 0.0) {
    out.lambda1 = lambda_parameter(s.e00, s.e11, re03);
    raw += w1 / s.m_total * (binary_entropy(s.e00 / w1) - binary_entropy(out.lambda1));
  }
  if (w2 > 0.0) {
    out.lambda2 = lambda_parameter(s.e01, s.e10, re12);
    raw += w2 / s.m_total * (binary_entropy(s.e01 / w2) - binary_entropy(out.lambda2));
  }
  out.raw = raw;
  out.value = std::max(0.0, raw);
  return out;
}

}  // namespace detail

/// Lower bound on S(A|E) in bits at the candidate inner products
/// re03 = Re<E0|E3> and re12 = Re<E1|E2>, clamped below at zero.
inline double sae_bound(const ObservedStatistics& stats, double re03, double re12) {
  return detail::evaluate_sae_bound(stats, re03, re12).value;
}

struct KeyRateResult {
  double sae_lower = 0.0;
  double h_a_given_b = 0.0;
  double rate = std::numeric_limits<double>::quiet_NaN();
  double argmin_re03 = 0.0;
  double argmin_re12 = 0.0;
  bool feasible = false;
  double lambda1 = 0.5;
  double lambda2 = 0.5;
};

/// Minimizes the S(A|E) bound over the constraint set.
///
/// The problem reduces to one dimension: scanning t = Re<E1|E2> over its
/// Cauchy-Schwarz interval and taking Re<E0|E3> = max(0, L - t) is optimal
/// for Eve, because the bound grows with |Re<E0|E3>|.  Values of t that
/// would force Re<E0|E3> beyond its own cap are excluded from the scan;
/// the whole problem is feasible iff L <= cs03 + cs12.  A golden-section
/// pass around the best grid cell sharpens the argmin far below the 1e-9
/// contract.  The rate field is left unset.
inline KeyRateResult minimize_sae(const ObservedStatistics& stats, int grid_points = 2001) {
  if (grid_points < 3) throw std::invalid_argument("minimize_sae: grid_points must be >= 3");
  stats.validate();
  const ConstraintSet cs = build_constraints(stats);
  const double L = cs.sum_lower_bound;

  KeyRateResult result;
  result.feasible = L <= cs.cs_bound_03 + cs.cs_bound_12 + kAlgebraTolerance;
  if (!result.feasible) return result;

  const double t_hi = cs.cs_bound_12;
  const double t_lo = std::min(t_hi, std::max(-cs.cs_bound_12, L - cs.cs_bound_03));

  auto dependent_re03 = [&](double t) {
    return std::min(cs.cs_bound_03, std::max(0.0, L - t));
  };
  auto objective = [&](double t) {
    return detail::evaluate_sae_bound(stats, dependent_re03(t), t).value;
  };

  double best_t = t_lo;
  double best_value = objective(t_lo);
  const double span = t_hi - t_lo;
  if (span > 0.0) {
    for (int i = 1; i < grid_points; ++i) {
      const double t = t_lo + span * static_cast<double>(i) / (grid_points - 1);
      const double value = objective(t);
      if (value < best_value) {
        best_value = value;
        best_t = t;
      }
    }
    // Golden-section refinement inside the cell around the grid minimum.
    const double cell = span / (grid_points - 1);
    double a = std::max(t_lo, best_t - cell);
    double b = std::min(t_hi, best_t + cell);
    const double golden = 0.61803398874989484820;
    const double tol = std::max(1e-15, span * 1e-12);
    double c = b - golden * (b - a);
    double d = a + golden * (b - a);
    double fc = objective(c);
    double fd = objective(d);
    for (int iter = 0; iter < 200 && (b - a) > tol; ++iter) {
      if (fc < fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - golden * (b - a);
        fc = objective(c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + golden * (b - a);
        fd = objective(d);
      }
    }
    const double mid = 0.5 * (a + b);
    const double fm = objective(mid);
    if (fm < best_value) {
      best_value = fm;
      best_t = mid;
    }
  }

  const auto eval = detail::evaluate_sae_bound(stats, dependent_re03(best_t), best_t);
  result.sae_lower = eval.value;
  result.argmin_re03 = dependent_re03(best_t);
  result.argmin_re12 = best_t;
  result.lambda1 = eval.lambda1;
  result.lambda2 = eval.lambda2;
  return result;
}

/// H(A|B) = H(AB) - H(B) over the four raw-key probabilities normalized
/// by M, in bits.
inline double conditional_entropy_ab(const ObservedStatistics& s) {
  if (s.m_total <= 0.0) {
    throw std::domain_error("conditional_entropy_ab: m_total must be positive");
  }
  const double joint[] = {s.e00 / s.m_total, s.e01 / s.m_total, s.e10 / s.m_total,
                          s.e11 / s.m_total};
  const double bob[] = {(s.e00 + s.e10) / s.m_total, (s.e01 + s.e11) / s.m_total};
  return shannon_entropy(joint) - shannon_entropy(bob);
}

/// The Devetak-Winter rate r = S(A|E) - H(A|B) at the minimized bound.
/// Negative rates are returned as-is; the caller decides whether to abort.
inline KeyRateResult key_rate(const ObservedStatistics& stats, int grid_points = 2001) {
  KeyRateResult result = minimize_sae(stats, grid_points);
  if (!result.feasible) return result;
  result.h_a_given_b = conditional_entropy_ab(stats);
  result.rate = result.sae_lower - result.h_a_given_b;
  return result;
}

}  // namespace mirrorsqkd

#endif  // MIRRORSQKD_KEYRATE_HPP

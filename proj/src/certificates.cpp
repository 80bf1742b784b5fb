// Copyright 2026 The scenario-hull Authors
// SPDX-License-Identifier: Apache-2.0

#include "scenario_hull/certificates.hpp"

#include "scenario_hull/common.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace scenario_hull::certificates {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kEulerFactor = std::numbers::e / (std::numbers::e - 1.0);

void check_probability_open(double p, const char* name) {
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError(std::string(name) + " must lie in (0, 1), got " + std::to_string(p));
  }
}

void check_positive(std::int64_t v, const char* name) {
  if (v < 1) throw DomainError(std::string(name) + " must be >= 1, got " + std::to_string(v));
}

void check_helly(std::int64_t zeta, std::int64_t n) {
  check_positive(n, "n");
  if (zeta < 1 || zeta > n) {
    throw DomainError("zeta must lie in [1, n]; got zeta=" + std::to_string(zeta) +
                      ", n=" + std::to_string(n));
  }
}

BoundResult from_log(double log_value, FormulaId id) {
  BoundResult r;
  r.formula_id = id;
  if (std::isnan(log_value)) throw NumericalError("bound evaluated to NaN");
  r.log_value = std::min(0.0, log_value);
  r.value = std::exp(r.log_value);
  return r;
}

SampleCount ceil_to_count(double bound) {
  if (!std::isfinite(bound)) throw NumericalError("sample-size bound is not finite");
  const double n = std::max(1.0, std::ceil(bound));
  if (n > static_cast<double>(kMaxSampleSize)) {
    throw NumericalError("required sample size exceeds " + std::to_string(kMaxSampleSize));
  }
  return static_cast<SampleCount>(n);
}

// log Σ_{j<zeta} C(N,j) ε^j (1−ε)^{N−j} for 0 < ε < 1 and zeta ≤ N.
double log_binomial_tail_interior(double epsilon, std::int64_t zeta, SampleCount N) {
  const double log_eps = std::log(epsilon);
  const double log_comp = std::log1p(-epsilon);
  const std::int64_t last = std::min<std::int64_t>(zeta - 1, N);

  // Terms are unimodal in j; track the running maximum and rescale, so one
  // pass suffices.
  double log_choose = 0.0;
  double running_max = kNegInf;
  double scaled_sum = 0.0;
  for (std::int64_t j = 0; j <= last; ++j) {
    if (j > 0) {
      log_choose += std::log(static_cast<double>(N - j + 1)) - std::log(static_cast<double>(j));
    }
    const double term = log_choose + static_cast<double>(j) * log_eps +
                        static_cast<double>(N - j) * log_comp;
    if (term > running_max) {
      scaled_sum = scaled_sum * std::exp(running_max - term) + 1.0;
      running_max = term;
    } else {
      scaled_sum += std::exp(term - running_max);
    }
  }
  return running_max + std::log(scaled_sum);
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double fa,
                        double fm, double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

std::string_view to_string(FormulaId id) {
  switch (id) {
    case FormulaId::kBinomialTail: return "binomial_tail";
    case FormulaId::kHullBound: return "hull_bound";
    case FormulaId::kHullBoundAlt: return "hull_bound_alt";
    case FormulaId::kDiscarding: return "discarding_bound";
    case FormulaId::kHullDiscarding: return "hull_discarding_bound";
    case FormulaId::kMixedIntegerBound: return "mixed_integer_bound";
    case FormulaId::kMpcBound: return "mpc_bound";
  }
  return "unknown";
}

void CertificateQuery::validate() const {
  check_probability_open(epsilon, "epsilon");
  check_probability_open(beta, "beta");
  check_positive(n, "n");
  check_positive(m, "m");
  check_positive(directions, "M");
  check_positive(modes, "L");
  check_helly(helly, n);
  if (removals < 0) throw DomainError("r must be >= 0");
  if (vc_dimension && *vc_dimension < 1) throw DomainError("xi must be >= 1");
}

double log_binomial_coefficient(std::int64_t n, std::int64_t k) {
  if (k < 0 || n < 0 || k > n) throw DomainError("log_binomial_coefficient: need 0 <= k <= n");
  k = std::min(k, n - k);
  if (k <= 64) {
    double acc = 0.0;
    for (std::int64_t i = 1; i <= k; ++i) {
      acc += std::log(static_cast<double>(n - k + i)) - std::log(static_cast<double>(i));
    }
    return acc;
  }
  using boost::math::lgamma;
  return lgamma(static_cast<double>(n) + 1.0) - lgamma(static_cast<double>(k) + 1.0) -
         lgamma(static_cast<double>(n - k) + 1.0);
}

BoundResult binomial_tail(double epsilon, std::int64_t zeta, SampleCount N) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
    throw DomainError("binomial_tail: epsilon must lie in [0, 1]");
  }
  check_positive(zeta, "zeta");
  check_positive(N, "N");

  if (zeta >= N + 1 || epsilon == 0.0) return from_log(0.0, FormulaId::kBinomialTail);
  if (epsilon == 1.0) return from_log(kNegInf, FormulaId::kBinomialTail);
  return from_log(log_binomial_tail_interior(epsilon, zeta, N), FormulaId::kBinomialTail);
}

SampleCount sample_size_single(double epsilon, double beta, std::int64_t zeta) {
  check_probability_open(epsilon, "epsilon");
  check_probability_open(beta, "beta");
  check_positive(zeta, "zeta");
  const double bound =
      kEulerFactor / epsilon * (static_cast<double>(zeta - 1) + std::log(1.0 / beta));
  const SampleCount N = ceil_to_count(bound);
  if (binomial_tail(epsilon, zeta, N).value > beta) {
    throw NumericalError("sample_size_single: closed form failed its implicit bound");
  }
  return N;
}

SampleCount vc_sample_size(double epsilon, double beta, std::int64_t xi) {
  check_probability_open(epsilon, "epsilon");
  check_probability_open(beta, "beta");
  check_positive(xi, "xi");
  const double bound = 4.0 / epsilon *
                       (static_cast<double>(xi) * std::log(12.0 / epsilon) + std::log(2.0 / beta));
  return ceil_to_count(bound);
}

BoundResult hull_bound(double epsilon, std::int64_t n, std::int64_t M, std::int64_t zeta,
                       SampleCount N) {
  check_probability_open(epsilon, "epsilon");
  check_helly(zeta, n);
  check_positive(M, "M");
  const double pieces = static_cast<double>(std::min(n + 1, M));
  const BoundResult tail = binomial_tail(epsilon / pieces, zeta, N);
  return from_log(std::log(static_cast<double>(M)) + tail.log_value, FormulaId::kHullBound);
}

BoundResult hull_bound_alt(double epsilon, std::int64_t n, std::int64_t M, std::int64_t zeta,
                           SampleCount N) {
  check_probability_open(epsilon, "epsilon");
  check_helly(zeta, n);
  check_positive(M, "M");
  const double log_coeff = M > n + 1 ? log_binomial_coefficient(M, n + 1) : 0.0;
  const BoundResult tail = binomial_tail(epsilon, zeta * std::min(n + 1, M), N);
  return from_log(log_coeff + tail.log_value, FormulaId::kHullBoundAlt);
}

BoundResult best_hull_bound(double epsilon, std::int64_t n, std::int64_t M, std::int64_t zeta,
                            SampleCount N) {
  const BoundResult a = hull_bound(epsilon, n, M, zeta, N);
  const BoundResult b = hull_bound_alt(epsilon, n, M, zeta, N);
  return b.log_value < a.log_value ? b : a;
}

SampleCount hull_sample_size(double epsilon, double beta, std::int64_t n, std::int64_t M,
                             std::int64_t zeta) {
  return mixed_integer_sample_size(epsilon, beta, n, M, 1, zeta);
}

BoundResult mixed_integer_bound(double epsilon, std::int64_t n, std::int64_t M, std::int64_t L,
                                std::int64_t zeta, SampleCount N) {
  check_probability_open(epsilon, "epsilon");
  check_helly(zeta, n);
  check_positive(M, "M");
  check_positive(L, "L");
  const double pieces = static_cast<double>(std::min(n + 1, M));
  const double log_tail = binomial_tail(epsilon / pieces, zeta, N).log_value;
  return from_log(std::log(static_cast<double>(L)) + std::log(static_cast<double>(M)) + log_tail,
                  FormulaId::kMixedIntegerBound);
}

SampleCount mixed_integer_sample_size(double epsilon, double beta, std::int64_t n,
                                      std::int64_t M, std::int64_t L, std::int64_t zeta) {
  check_probability_open(epsilon, "epsilon");
  check_probability_open(beta, "beta");
  check_helly(zeta, n);
  check_positive(M, "M");
  check_positive(L, "L");
  const double pieces = static_cast<double>(std::min(n + 1, M));
  const double log_ratio =
      std::log(static_cast<double>(L)) + std::log(static_cast<double>(M)) - std::log(beta);
  const double bound =
      kEulerFactor * pieces / epsilon * (static_cast<double>(zeta - 1) + log_ratio);
  const SampleCount N = ceil_to_count(bound);
  if (mixed_integer_bound(epsilon, n, M, L, zeta, N).value > beta) {
    throw NumericalError("hull sample size failed its implicit bound check");
  }
  return N;
}

BoundResult discarding_bound(double epsilon, std::int64_t zeta, std::int64_t r, SampleCount N) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
    throw DomainError("discarding_bound: epsilon must lie in [0, 1]");
  }
  check_positive(zeta, "zeta");
  if (r < 0) throw DomainError("discarding_bound: r must be >= 0");
  if (r >= N) throw DomainError("discarding_bound: need r < N");
  const double log_coeff = log_binomial_coefficient(zeta + r - 1, r);
  const BoundResult tail = binomial_tail(epsilon, zeta + r, N);
  return from_log(log_coeff + tail.log_value, FormulaId::kDiscarding);
}

BoundResult hull_discarding_bound(double epsilon, std::int64_t n, std::int64_t M,
                                  std::int64_t zeta, std::int64_t r, SampleCount N) {
  check_probability_open(epsilon, "epsilon");
  check_helly(zeta, n);
  check_positive(M, "M");
  const double pieces = static_cast<double>(std::min(n + 1, M));
  const BoundResult per_vertex = discarding_bound(epsilon / pieces, zeta, r, N);
  return from_log(std::log(static_cast<double>(M)) + per_vertex.log_value,
                  FormulaId::kHullDiscarding);
}

BoundResult mpc_bound(double epsilon, std::int64_t m, std::int64_t M, SampleCount N) {
  check_probability_open(epsilon, "epsilon");
  check_positive(m, "m");
  check_positive(M, "M");
  const double pieces = static_cast<double>(std::min(m + 1, M));
  const BoundResult tail = binomial_tail(epsilon / pieces, 1, N);
  return from_log(std::log(static_cast<double>(M)) + tail.log_value, FormulaId::kMpcBound);
}

SampleCount mpc_sample_size(double epsilon, double beta, std::int64_t m, std::int64_t M) {
  check_probability_open(epsilon, "epsilon");
  check_probability_open(beta, "beta");
  check_positive(m, "m");
  check_positive(M, "M");
  const double pieces = static_cast<double>(std::min(m + 1, M));
  const double bound =
      kEulerFactor * pieces / epsilon * std::log(static_cast<double>(M) / beta);
  const SampleCount N = ceil_to_count(bound);
  if (mpc_bound(epsilon, m, M, N).value > beta) {
    throw NumericalError("mpc_sample_size failed its implicit bound check");
  }
  return N;
}

double admissible_integral(std::int64_t m, std::int64_t M, SampleCount N) {
  check_positive(m, "m");
  check_positive(M, "M");
  check_positive(N, "N");
  const double a = static_cast<double>(std::min(m + 1, M));
  const double tail_mass = -std::expm1(static_cast<double>(N + 1) * std::log1p(-1.0 / a));
  return static_cast<double>(M) * a / static_cast<double>(N + 1) * tail_mass;
}

double admissible_integral_quadrature(std::int64_t m, std::int64_t M, SampleCount N,
                                      double abs_tol) {
  check_positive(m, "m");
  check_positive(M, "M");
  check_positive(N, "N");
  const double a = static_cast<double>(std::min(m + 1, M));
  const double scale = static_cast<double>(M);
  const double power = static_cast<double>(N);
  const std::function<double(double)> integrand = [&](double nu) {
    return scale * std::exp(power * std::log1p(-nu / a));
  };
  // Most of the mass sits within a few multiples of a/N of the origin; split
  // there so the coarse first pass cannot step over it.
  const double knee = std::min(1.0, 8.0 * a / power);
  double total = 0.0;
  for (const auto& [lo, hi] : {std::pair{0.0, knee}, std::pair{knee, 1.0}}) {
    if (hi <= lo) continue;
    const double flo = integrand(lo);
    const double fhi = integrand(hi);
    const double fmid = integrand(0.5 * (lo + hi));
    const double whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
    total += adaptive_simpson(integrand, lo, hi, flo, fmid, fhi, whole, 0.5 * abs_tol, 48);
  }
  return total;
}

SampleCount admissible_mpc_sample_size(double epsilon, std::int64_t m, std::int64_t M) {
  check_probability_open(epsilon, "epsilon");
  check_positive(m, "m");
  check_positive(M, "M");
  const double a = static_cast<double>(std::min(m + 1, M));
  // The integral never exceeds M·a/(N+1), so this hint already satisfies it.
  const double hint = std::max(1.0, std::ceil(static_cast<double>(M) * a / epsilon) - 1.0);
  const SampleCount N = invert_min_N(
      [&](SampleCount k) { return admissible_integral(m, M, k); }, epsilon,
      static_cast<SampleCount>(hint));

  for (SampleCount k : {N - 1, N}) {
    if (k < 1) continue;
    const double closed = admissible_integral(m, M, k);
    const double quad = admissible_integral_quadrature(m, M, k);
    if (std::abs(closed - quad) > 1e-8) {
      throw NumericalError("admissible integral: closed form and quadrature disagree at N=" +
                           std::to_string(k));
    }
  }
  return N;
}

SampleCount invert_min_N(const std::function<double(SampleCount)>& evaluator, double beta,
                         SampleCount hint) {
  check_probability_open(beta, "beta");
  auto satisfied = [&](SampleCount k) {
    const double v = evaluator(k);
    if (std::isnan(v)) throw NumericalError("invert_min_N: evaluator returned NaN");
    return v <= beta;
  };

  hint = std::clamp<SampleCount>(hint, 1, kMaxSampleSize);
  SampleCount lo = 0;  // largest known failing N (0 = none known)
  SampleCount hi = 0;  // smallest known passing N

  if (satisfied(hint)) {
    hi = hint;
    SampleCount step = 1;
    for (;;) {
      const SampleCount probe = hint - step;
      if (probe < 1) {
        lo = 0;
        break;
      }
      if (satisfied(probe)) {
        hi = probe;
        step *= 2;
      } else {
        lo = probe;
        break;
      }
    }
  } else {
    lo = hint;
    SampleCount step = hint;
    for (;;) {
      const SampleCount probe = std::min(lo + step, kMaxSampleSize);
      if (satisfied(probe)) {
        hi = probe;
        break;
      }
      if (probe == kMaxSampleSize) {
        throw NumericalError("invert_min_N: no N <= 1e9 satisfies the bound");
      }
      lo = probe;
      step *= 2;
    }
  }

  while (hi - lo > 1) {
    const SampleCount mid = lo + (hi - lo) / 2;
    if (satisfied(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

}  // namespace scenario_hull::certificates

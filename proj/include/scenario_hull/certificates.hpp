// Copyright 2026 The scenario-hull Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Sample-complexity certificates for scenario programs and for convex hulls
// of directional scenario optimizers.  Every tail probability is evaluated in
// the log domain so that certificates for N in the millions neither underflow
// nor lose relative accuracy.

#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>

namespace scenario_hull::certificates {

using SampleCount = std::int64_t;

/// Largest sample size any inversion will consider.
inline constexpr SampleCount kMaxSampleSize = 1'000'000'000;

enum class FormulaId {
  kBinomialTail,
  kHullBound,
  kHullBoundAlt,
  kDiscarding,
  kHullDiscarding,
  kMixedIntegerBound,
  kMpcBound,
};

std::string_view to_string(FormulaId id);

/// A probability together with its natural logarithm.  `log_value` stays
/// meaningful after `value` has underflowed to zero.
struct BoundResult {
  double value = 0.0;
  double log_value = 0.0;
  FormulaId formula_id = FormulaId::kBinomialTail;
};

/// Parameter bundle shared by the bound evaluators.  Field names follow their
/// role: `directions` is the number of directional programs building the hull,
/// `modes` the number of integer modes, `helly` the Helly-dimension bound.
struct CertificateQuery {
  double epsilon = 0.1;
  double beta = 0.1;
  std::int64_t n = 1;           // decision dimension
  std::int64_t m = 1;           // input dimension (MPC)
  std::int64_t directions = 1;  // M
  std::int64_t modes = 1;       // L
  std::int64_t helly = 1;       // zeta
  std::int64_t removals = 0;    // r
  std::optional<std::int64_t> vc_dimension;  // xi

  /// Throws DomainError if any invariant is broken.
  void validate() const;
};

/// Φ(ε, ζ, N) = Σ_{j<ζ} C(N,j) ε^j (1−ε)^{N−j}: the probability that a
/// Binomial(N, ε) variable is below ζ.
BoundResult binomial_tail(double epsilon, std::int64_t zeta, SampleCount N);

/// log C(n, k) via log-gamma.
double log_binomial_coefficient(std::int64_t n, std::int64_t k);

/// Smallest N with N ≥ e/(e−1)/ε · (ζ − 1 + ln(1/β)).
SampleCount sample_size_single(double epsilon, double beta, std::int64_t zeta);

/// Smallest N with N ≥ 4/ε · (ξ ln(12/ε) + ln(2/β)).  Reported for comparison only.
SampleCount vc_sample_size(double epsilon, double beta, std::int64_t xi);

/// M · Φ(ε / min{n+1, M}, ζ, N), clamped to [0, 1].
BoundResult hull_bound(double epsilon, std::int64_t n, std::int64_t M, std::int64_t zeta,
                       SampleCount N);

/// C(M, n+1) · Φ(ε, ζ·min{n+1, M}, N), clamped to [0, 1].  The coefficient is
/// taken as 1 when M ≤ n+1 (the hull is a single Carathéodory piece).
BoundResult hull_bound_alt(double epsilon, std::int64_t n, std::int64_t M, std::int64_t zeta,
                           SampleCount N);

/// The smaller of hull_bound and hull_bound_alt.
BoundResult best_hull_bound(double epsilon, std::int64_t n, std::int64_t M, std::int64_t zeta,
                            SampleCount N);

/// Smallest N with N ≥ e/(e−1) · min{n+1,M}/ε · (ζ − 1 + ln(M/β)).  Verifies
/// M·Φ(ε/min{n+1,M}, ζ, N) ≤ β before returning; throws NumericalError if not.
SampleCount hull_sample_size(double epsilon, double beta, std::int64_t n, std::int64_t M,
                             std::int64_t zeta);

/// L · M · Φ(ε / min{n+1, M}, ζ, N), clamped.  Union of L hulls.
BoundResult mixed_integer_bound(double epsilon, std::int64_t n, std::int64_t M, std::int64_t L,
                                std::int64_t zeta, SampleCount N);

/// As hull_sample_size with ln(LM/β); verifies L·M·Φ(…) ≤ β.
SampleCount mixed_integer_sample_size(double epsilon, double beta, std::int64_t n,
                                      std::int64_t M, std::int64_t L, std::int64_t zeta);

/// C(ζ+r−1, r) · Φ(ε, ζ+r, N) for a program with r discarded samples.
BoundResult discarding_bound(double epsilon, std::int64_t zeta, std::int64_t r, SampleCount N);

/// M · C(ζ+r−1, r) · Φ(ε / min{n+1, M}, ζ+r, N): every vertex of the hull
/// discards r of its N samples.
BoundResult hull_discarding_bound(double epsilon, std::int64_t n, std::int64_t M,
                                  std::int64_t zeta, std::int64_t r, SampleCount N);

/// M · Φ(ε / min{m+1, M}, 1, N) for the first-stage input set.
BoundResult mpc_bound(double epsilon, std::int64_t m, std::int64_t M, SampleCount N);

/// Smallest N with N ≥ e/(e−1) · min{m+1,M}/ε · ln(M/β); verifies mpc_bound ≤ β.
SampleCount mpc_sample_size(double epsilon, double beta, std::int64_t m, std::int64_t M);

/// ∫₀¹ M Φ(ν / min{m+1,M}, 1, N) dν in closed form:
/// M·a/(N+1) · (1 − (1 − 1/a)^{N+1}) with a = min{m+1, M}.
double admissible_integral(std::int64_t m, std::int64_t M, SampleCount N);

/// The same integral by adaptive Simpson quadrature of the integrand.
double admissible_integral_quadrature(std::int64_t m, std::int64_t M, SampleCount N,
                                      double abs_tol = 1e-12);

/// Smallest N whose admissible integral does not exceed ε.  The closed form
/// is cross-checked against quadrature at the returned N (and at N−1).
SampleCount admissible_mpc_sample_size(double epsilon, std::int64_t m, std::int64_t M);

/// Minimal N ≥ 1 with evaluator(N) ≤ β, for an evaluator non-increasing in N.
/// Exponential search from `hint`, then bisection.  Throws NumericalError if
/// no N ≤ kMaxSampleSize qualifies.
SampleCount invert_min_N(const std::function<double(SampleCount)>& evaluator, double beta,
                         SampleCount hint = 1);

}  // namespace scenario_hull::certificates

// Copyright 2026 The scenario-hull Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Monte Carlo estimates of violation probabilities and trial harnesses for
// the (ε, β) guarantees.  Set violations are sups over a continuum; they are
// approximated from below by a finite probe set, so a reported failure is a
// real one.

#include "scenario_hull/certificates.hpp"
#include "scenario_hull/common.hpp"
#include "scenario_hull/problems.hpp"
#include "scenario_hull/scenario_engine.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace scenario_hull::validation {

using engine::HullSet;
using problems::ProblemInstance;

struct Interval {
  double low = 0.0;
  double high = 1.0;
};

/// Exact (Clopper–Pearson) two-sided interval for k successes in K trials.
Interval clopper_pearson(std::int64_t k, std::int64_t K, double confidence = 0.95);

struct ViolationEstimate {
  std::string probe_id;
  double estimate = 0.0;
  double ci_low = 0.0;
  double ci_high = 1.0;
  std::int64_t violations = 0;
  std::int64_t mc_samples = 0;
  std::uint64_t seed = 0;
};

/// Fraction of K_mc fresh draws with g(x, δ) > 0, with a 95% interval.
ViolationEstimate estimate_point_violation(const ProblemInstance& problem, const Vector& x,
                                           std::int64_t K_mc, std::uint64_t seed);

struct SetViolationEstimate {
  /// The largest per-probe estimate; a lower bound on the set violation.
  ViolationEstimate max;
  std::size_t argmax_probe = 0;
  Vector argmax_point;
  std::vector<ViolationEstimate> probes;
  std::vector<Vector> probe_points;
};

struct ProbeOptions {
  std::size_t n_probe = 20;
  std::int64_t K_mc = 20000;
  std::size_t threads = 0;
};

/// Probes every vertex, then the centroid, then Dirichlet(1) combinations
/// until n_probe points; all probes share the same δ draws, so enlarging
/// n_probe never lowers the result.  Requires n_probe ≥ number of vertices.
SetViolationEstimate estimate_set_violation(const ProblemInstance& problem, const HullSet& hull,
                                            const ProbeOptions& options, std::uint64_t seed);

struct TrialRecord {
  std::size_t trial = 0;
  certificates::SampleCount N = 0;
  bool infeasible = false;
  std::size_t vertices = 0;
  ViolationEstimate violation;
  bool failure = false;
};

struct TrialReport {
  std::size_t trials = 0;
  std::size_t failures = 0;
  std::size_t infeasible = 0;
  double epsilon = 0.0;
  double beta = 0.0;
  certificates::SampleCount N = 0;
  std::vector<TrialRecord> per_trial;

  double failure_fraction() const {
    return trials == 0 ? 0.0 : static_cast<double>(failures) / static_cast<double>(trials);
  }
};

struct TrialOptions {
  ProbeOptions probe;
  /// Defaults to engine::default_directions(n, query.directions).
  std::vector<Vector> directions;
  /// Defaults to the admissible-set centre.
  std::optional<Vector> anchor;
  /// Overrides the certified sample size (for necessity experiments).
  std::optional<certificates::SampleCount> N_override;
  std::size_t threads = 0;
};

/// For each trial t: draw N = hull_sample_size(ε, β, n, M, 1) samples on the
/// trial's own stream, build the hull and estimate its violation.  A trial
/// fails when ci_low > ε.  Trials whose hull is empty return no solution and
/// are counted separately, never as failures.
TrialReport run_feasibility_trials(const ProblemInstance& problem,
                                   const certificates::CertificateQuery& query, std::size_t T,
                                   std::uint64_t seed, const TrialOptions& options = {});

struct InflationReport {
  std::vector<ViolationEstimate> point_estimates;
  /// Indices of points whose ci_low exceeds ε.
  std::vector<std::size_t> precondition_failures;
  bool precondition_ok = false;
  SetViolationEstimate hull;
  double bound = 0.0;   // (n+1)·ε
  double slack = 0.0;   // estimate − ci_low at the arg-max probe
  double margin = 0.0;  // bound + slack − max estimate
  bool passed = false;
};

/// Checks V(conv(points)) ≤ (n+1)ε empirically.  The precondition requires
/// that no point is certainly above ε (ci_low ≤ ε); when it fails the report
/// says so and `passed` is false.  The hull passes when the arg-max probe's
/// ci_low is ≤ (n+1)ε.
InflationReport convex_hull_inflation_check(const ProblemInstance& problem,
                                            const std::vector<Vector>& points, double epsilon,
                                            const ProbeOptions& options, std::uint64_t seed);

}  // namespace scenario_hull::validation

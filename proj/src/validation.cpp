// Copyright 2026 The scenario-hull Authors
// SPDX-License-Identifier: Apache-2.0

#include "scenario_hull/validation.hpp"

#include "scenario_hull/parallel.hpp"
#include "scenario_hull/rng.hpp"

#include <boost/math/special_functions/beta.hpp>

#include <algorithm>
#include <string>

namespace scenario_hull::validation {

namespace {

std::vector<Vector> validation_draws(const ProblemInstance& problem, std::int64_t K_mc,
                                     std::uint64_t seed) {
  return problems::draw_multisample(problem.uncertainty, static_cast<std::size_t>(K_mc), seed,
                                    stream_id(StreamDomain::kValidation, 0))
      .draws;
}

ViolationEstimate count_violations(const ProblemInstance& problem, const Vector& x,
                                   const std::vector<Vector>& draws, std::uint64_t seed) {
  std::int64_t violations = 0;
  for (const auto& delta : draws) {
    if (problems::evaluate_constraint(problem, x, delta) > 0.0) ++violations;
  }
  ViolationEstimate out;
  out.violations = violations;
  out.mc_samples = static_cast<std::int64_t>(draws.size());
  out.estimate = static_cast<double>(violations) / static_cast<double>(draws.size());
  const Interval ci = clopper_pearson(violations, out.mc_samples);
  out.ci_low = ci.low;
  out.ci_high = ci.high;
  out.seed = seed;
  return out;
}

HullSet hull_of_points(const std::vector<Vector>& points) {
  HullSet hull;
  for (std::size_t k = 0; k < points.size(); ++k) hull.vertices.push_back({k, points[k], 0.0});
  hull.attempted_directions = points.size();
  return hull;
}

}  // namespace

Interval clopper_pearson(std::int64_t k, std::int64_t K, double confidence) {
  require(K >= 1, "clopper_pearson: need at least one trial");
  require(k >= 0 && k <= K, "clopper_pearson: successes must lie in [0, K]");
  require(confidence > 0.0 && confidence < 1.0, "clopper_pearson: confidence must lie in (0, 1)");
  const double alpha = 1.0 - confidence;
  const auto kd = static_cast<double>(k);
  const auto Kd = static_cast<double>(K);
  Interval out;
  out.low = k == 0 ? 0.0 : boost::math::ibeta_inv(kd, Kd - kd + 1.0, alpha / 2.0);
  out.high = k == K ? 1.0 : boost::math::ibeta_inv(kd + 1.0, Kd - kd, 1.0 - alpha / 2.0);
  return out;
}

ViolationEstimate estimate_point_violation(const ProblemInstance& problem, const Vector& x,
                                           std::int64_t K_mc, std::uint64_t seed) {
  require(K_mc >= 1, "estimate_point_violation: K_mc must be at least 1");
  require_dim(x.size(), problem.decision_dim(), "violation query");
  ViolationEstimate out = count_violations(problem, x, validation_draws(problem, K_mc, seed), seed);
  out.probe_id = "point";
  return out;
}

SetViolationEstimate estimate_set_violation(const ProblemInstance& problem, const HullSet& hull,
                                            const ProbeOptions& options, std::uint64_t seed) {
  require(!hull.empty(), "estimate_set_violation: empty hull");
  require(options.K_mc >= 1, "estimate_set_violation: K_mc must be at least 1");
  const std::size_t V = hull.vertices.size();
  require(options.n_probe >= V, "estimate_set_violation: n_probe must cover every vertex");

  SetViolationEstimate out;
  std::vector<std::string> ids;
  for (std::size_t k = 0; k < V; ++k) {
    out.probe_points.push_back(hull.vertices[k].point);
    ids.push_back("vertex:" + std::to_string(hull.vertices[k].direction_index));
  }
  if (options.n_probe > V) {
    out.probe_points.push_back(hull.centroid());
    ids.emplace_back("centroid");
  }
  CounterRng rng(seed, stream_id(StreamDomain::kProbe, 0));
  const Matrix P = hull.points();
  while (out.probe_points.size() < options.n_probe) {
    Vector w(static_cast<Eigen::Index>(V));
    for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = rng.exponential();
    out.probe_points.push_back(P * (w / w.sum()));
    ids.push_back("random:" + std::to_string(out.probe_points.size() - V - 1));
  }

  const auto draws = validation_draws(problem, options.K_mc, seed);
  out.probes.resize(out.probe_points.size());
  parallel_for(out.probe_points.size(), options.threads, [&](std::size_t p) {
    out.probes[p] = count_violations(problem, out.probe_points[p], draws, seed);
    out.probes[p].probe_id = ids[p];
  });
  for (std::size_t p = 1; p < out.probes.size(); ++p) {
    if (out.probes[p].violations > out.probes[out.argmax_probe].violations) out.argmax_probe = p;
  }
  out.max = out.probes[out.argmax_probe];
  out.argmax_point = out.probe_points[out.argmax_probe];
  return out;
}

TrialReport run_feasibility_trials(const ProblemInstance& problem,
                                   const certificates::CertificateQuery& query, std::size_t T,
                                   std::uint64_t seed, const TrialOptions& options) {
  require(T >= 1, "run_feasibility_trials: need at least one trial");
  query.validate();
  const Eigen::Index n = problem.decision_dim();
  const std::vector<Vector> directions =
      options.directions.empty()
          ? engine::default_directions(n, static_cast<std::size_t>(query.directions))
          : options.directions;
  const Vector anchor = options.anchor.value_or(problem.admissible.center());
  const auto M = static_cast<std::int64_t>(directions.size());

  TrialReport report;
  report.trials = T;
  report.epsilon = query.epsilon;
  report.beta = query.beta;
  report.N = options.N_override
                 ? *options.N_override
                 : certificates::hull_sample_size(query.epsilon, query.beta, n, M, query.helly);
  require(report.N >= 1, "run_feasibility_trials: N must be positive");
  report.per_trial.resize(T);

  ProbeOptions probe = options.probe;
  probe.threads = 1;
  engine::HullBuildOptions build;
  build.threads = 1;

  parallel_for(T, options.threads, [&](std::size_t t) {
    TrialRecord& rec = report.per_trial[t];
    rec.trial = t;
    rec.N = report.N;
    const auto sample = problems::draw_multisample(problem.uncertainty,
                                                   static_cast<std::size_t>(report.N), seed,
                                                   stream_id(StreamDomain::kTrial, t));
    HullSet hull;
    try {
      hull = engine::build_hull(problem, sample, anchor, directions, build);
    } catch (const InfeasibleError&) {
      rec.infeasible = true;
      return;
    }
    rec.vertices = hull.vertices.size();
    ProbeOptions local = probe;
    local.n_probe = std::max(local.n_probe, hull.vertices.size());
    const auto est = estimate_set_violation(problem, hull, local, derive_key(seed, t));
    rec.violation = est.max;
    rec.failure = est.max.ci_low > query.epsilon;
  });

  for (const auto& rec : report.per_trial) {
    if (rec.failure) ++report.failures;
    if (rec.infeasible) ++report.infeasible;
  }
  return report;
}

InflationReport convex_hull_inflation_check(const ProblemInstance& problem,
                                            const std::vector<Vector>& points, double epsilon,
                                            const ProbeOptions& options, std::uint64_t seed) {
  require(!points.empty(), "convex_hull_inflation_check: need at least one point");
  require(epsilon > 0.0 && epsilon < 1.0, "convex_hull_inflation_check: epsilon must lie in (0, 1)");
  for (const auto& p : points) require_dim(p.size(), problem.decision_dim(), "inflation point");

  InflationReport report;
  const auto draws = validation_draws(problem, options.K_mc, seed);
  report.point_estimates.resize(points.size());
  parallel_for(points.size(), options.threads, [&](std::size_t k) {
    report.point_estimates[k] = count_violations(problem, points[k], draws, seed);
    report.point_estimates[k].probe_id = "point:" + std::to_string(k);
  });
  for (std::size_t k = 0; k < points.size(); ++k) {
    if (report.point_estimates[k].ci_low > epsilon) report.precondition_failures.push_back(k);
  }
  report.precondition_ok = report.precondition_failures.empty();

  ProbeOptions probe = options;
  probe.n_probe = std::max(probe.n_probe, points.size());
  report.hull = estimate_set_violation(problem, hull_of_points(points), probe, seed);
  const double n = static_cast<double>(problem.decision_dim());
  report.bound = (n + 1.0) * epsilon;
  report.slack = report.hull.max.estimate - report.hull.max.ci_low;
  report.margin = report.bound + report.slack - report.hull.max.estimate;
  report.passed = report.precondition_ok && report.hull.max.ci_low <= report.bound;
  return report;
}

}  // namespace scenario_hull::validation

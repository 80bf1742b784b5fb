// Copyright 2026 The scenario-hull Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Randomized receding-horizon control of control-affine systems
//
//   x⁺ = f(x, v) + g(x, v) u,
//
// where the first input is restricted to the hull U_M of M directional
// one-step scenario programs in input space.

#include "scenario_hull/common.hpp"
#include "scenario_hull/problems.hpp"
#include "scenario_hull/scenario_engine.hpp"
#include "scenario_hull/validation.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace scenario_hull::mpc {

using problems::AdmissibleSet;
using problems::UncertaintySpace;

struct ControlAffineSystem {
  Eigen::Index state_dim = 0;
  Eigen::Index input_dim = 0;
  Eigen::Index noise_dim = 0;
  std::function<Vector(const Vector& x, const Vector& v)> drift;
  std::function<Matrix(const Vector& x, const Vector& v)> input_matrix;
  UncertaintySpace noise = UncertaintySpace::gaussian(Vector::Zero(1), Vector::Ones(1));
};

/// Parameters of the benchmark system (a planar unicycle-style model).
struct BenchmarkParameters {
  double dt = 0.1;              // sampling time
  double omega = 0.5;           // drift rotation rate
  double heading_gain = 1.0;    // heading θ = heading_gain·x₁ + heading_noise·v₀
  double heading_noise = 0.2;
  double position_noise = 0.02;
};

/// n = 2, m = 2, p = 3, v ~ N(0, I):
///   f(x, v) = x + dt·ω·[[0,−1],[1,0]]·x + position_noise·(v₁, v₂)
///   g(x, v) = dt·R(θ),  θ = heading_gain·x₁ + heading_noise·v₀,
/// with R(θ) the planar rotation.
ControlAffineSystem benchmark_system(const BenchmarkParameters& params = {});

using StageCost = std::function<double(const Vector& x, const Vector& u)>;
using TerminalCost = std::function<double(const Vector& x)>;

struct MPCConfig {
  int horizon = 3;  // K
  AdmissibleSet state_set = AdmissibleSet::box(Vector::Constant(2, -1.0), Vector::Constant(2, 1.0));
  AdmissibleSet input_set = AdmissibleSet::box(Vector::Constant(2, -1.0), Vector::Constant(2, 1.0));
  double epsilon = 0.1;
  double beta = 0.1;
  std::vector<Vector> directions;  // c_j ∈ R^m
  Vector anchor;                   // û₀
  std::size_t cost_samples = 20;   // |I₀|
  std::size_t first_stage_samples = 0;  // |I₁| = N
  std::size_t later_samples = 20;  // |I₂|
  StageCost stage_cost;
  TerminalCost terminal_cost;
  std::size_t shooting_budget = 64;
  double violation_penalty = 1e3;
  /// Refuse to run unless N ≥ admissible_mpc_sample_size(ε, m, M).
  bool certify = false;
  std::size_t threads = 0;

  /// Throws DomainError on inconsistent fields.
  void validate(const ControlAffineSystem& system) const;
};

/// The benchmark controller: K = 3, six equispaced directions, û₀ = 0,
/// target (1.2, 0) just outside the state box, N = admissible_mpc_sample_size.
MPCConfig benchmark_config();

/// f(x, v) + g(x, v)·u, exact per evaluation.  Throws NumericalError on a
/// non-finite result and DimensionError on mismatched inputs.
Vector simulate_step(const ControlAffineSystem& system, const Vector& x, const Vector& u,
                     const Vector& v);

struct FirstStageSet {
  engine::HullSet hull;
  /// λ⋆ per direction, nullopt for infeasible directions.
  std::vector<std::optional<double>> lambdas;
};

/// Solves the M one-step programs (next state in X for every sample, input
/// in U) along û₀ + λc_j and returns the hull of their endpoints.  Throws
/// InfeasibleError when every direction is infeasible.
FirstStageSet first_stage_set(const ControlAffineSystem& system, const Vector& x,
                              const MPCConfig& config, const std::vector<Vector>& v_samples);

/// A noise sequence (v₀, …, v_{K−1}).
using NoiseSequence = std::vector<Vector>;

struct ShootingResult {
  Vector u0;
  std::vector<Vector> sequence;
  double cost = 0.0;       // Σ_{i∈I₀} J(x, u, v⁽ⁱ⁾)
  std::size_t later_violations = 0;
  double score = 0.0;      // cost + penalty·later_violations
  std::size_t candidate = 0;
};

/// Random shooting: when the budget exceeds the vertex count the first
/// candidates take u₀ at the U_M vertices, the rest draw u₀ as a Dirichlet(1)
/// combination of them; u₁…u_{K−1} are uniform on U.  Each is scored by its
/// empirical cost over I₀ plus a penalty per (i, k) with i ∈ I₂, k ≥ 2 and
/// the predicted state outside X.  Lowest score wins; ties go to the earlier
/// candidate.
ShootingResult choose_input(const ControlAffineSystem& system, const Vector& x,
                            const MPCConfig& config, const engine::HullSet& u_set,
                            const std::vector<NoiseSequence>& cost_samples,
                            const std::vector<NoiseSequence>& later_samples, std::uint64_t seed);

struct StepRecord {
  std::size_t k = 0;
  Vector x;
  Vector u;
  Vector x_next;
  bool violation = false;
  bool recovery = false;  // U_M was empty; û₀ projected onto U was applied
  std::vector<std::optional<double>> lambdas;
};

struct ClosedLoopLog {
  std::vector<StepRecord> steps;
  std::uint64_t master_seed = 0;
  std::size_t first_stage_samples = 0;
  std::int64_t certified_samples = 0;  // admissible_mpc_sample_size(ε, m, M)
  std::size_t infeasibility_events = 0;
};

/// Runs T_steps steps of the receding-horizon loop.  Every random quantity
/// comes from its own per-step stream (first stage, cost, later stages,
/// shooting, plant), so the log is a pure function of master_seed.
ClosedLoopLog closed_loop_run(const ControlAffineSystem& system, const Vector& x0,
                              std::size_t T_steps, const MPCConfig& config,
                              std::uint64_t master_seed);

struct RateEstimate {
  double rate = 0.0;
  double ci_low = 0.0;
  double ci_high = 1.0;
  std::size_t violations = 0;
  std::size_t steps = 0;
};

/// Mean of the violation flags with a Clopper–Pearson 95% interval.  Throws
/// DomainError on an empty log.
RateEstimate empirical_violation_rate(const ClosedLoopLog& log);

}  // namespace scenario_hull::mpc

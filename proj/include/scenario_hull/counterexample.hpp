// Copyright 2026 The scenario-hull Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// A scenario program whose global optimum has as many support constraints as
// samples:
//
//   min z  s.t.  z ≥ −√(x² + y²),  z ≥ cos δᵢ·x + sin δᵢ·y − 1  (i = 1..N)
//
// with δᵢ = (i−1)·2π/N.  Projecting out z, the optimal value is
// min_{x,y} max(−√(x²+y²), maxᵢ cos δᵢ·x + sin δᵢ·y − 1).

#include "scenario_hull/common.hpp"
#include "scenario_hull/problems.hpp"

#include <vector>

namespace scenario_hull::problems {

/// Equispaced angles 0, 2π/N, …, (N−1)·2π/N.  Requires N ≥ 5.
MultiSample counterexample_samples(int N);

struct CounterexamplePoint {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

/// Closed-form optimizer for adjacent active planes at angles 0 and θ
/// (0 < θ < π): with s = sin θ/(1 + cos θ), x = 1/(√(1+s²) + 1), y = s·x,
/// z = x − 1.
CounterexamplePoint counterexample_point_for_gap(double theta);

/// The optimizer for N equispaced samples (θ = 2π/N).  Requires N ≥ 5.
CounterexamplePoint counterexample_optimum(int N);

/// Objective of the projected problem at (x, y) over the given angles.
double counterexample_value(double x, double y, const std::vector<double>& angles);

struct GridOptimum {
  double value = 0.0;
  double x = 0.0;
  double y = 0.0;
  double coarse_spacing = 0.0;
  /// Upper bound on value − true optimum: the objective is 1-Lipschitz, so
  /// the optimum is within spacing/√2 of a coarse grid node.
  double error_bound = 0.0;
};

/// Brute-force minimisation over a resolution² grid on [−2, 2]², followed by
/// two zoomed grids around the best node.  `value` is always attained at a
/// grid point, hence an upper bound on the true optimum.
GridOptimum counterexample_grid_optimum(const std::vector<double>& angles, int grid_resolution);

struct SupportReport {
  int N = 0;
  int grid_resolution = 0;
  double closed_form_value = 0.0;   // z⋆ from the closed form
  double full_value = 0.0;          // grid optimum with all samples
  double margin = 0.0;              // decrease required to call a removal strict
  std::vector<double> removal_values;   // grid optimum without sample i
  std::vector<bool> is_support;         // removal_values[i] < full_value − margin
  bool all_support = false;
};

/// For every i, re-solves without sample i by the grid oracle and records
/// whether the optimum strictly decreases.  Requires 5 ≤ N ≤ 12 and
/// grid_resolution ≥ 400.
SupportReport verify_support_constraints(int N, int grid_resolution);

}  // namespace scenario_hull::problems

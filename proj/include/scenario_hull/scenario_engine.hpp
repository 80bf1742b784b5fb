// Copyright 2026 The scenario-hull Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Directional scenario programs and the convex hull of their optimizers.
//
// For a multisample ω̄ and directions c₁…c_M, each direction program
//
//   max λ  s.t.  x⁰ + λ c_k ∈ X,  g(x⁰ + λ c_k, δ⁽ⁱ⁾) ≤ 0  for all i
//
// is a one-dimensional convex program (Helly dimension 1).  Its optimizers
// span a hull X_M every point of which satisfies every sampled constraint, and
// which inherits the sample-complexity certificate of hull_sample_size.

#include "scenario_hull/common.hpp"
#include "scenario_hull/problems.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace scenario_hull::engine {

using problems::AdmissibleSet;
using problems::ConstraintSpec;
using problems::MultiSample;
using problems::Objective;
using problems::ProblemInstance;

/// Residual of sampled constraint i at a point (≤ 0 means satisfied).
using SampledConstraint = std::function<double(std::size_t i, const Vector& point)>;

/// One direction program along the line {anchor + λ·direction}.
struct LineProgramSpec {
  Vector anchor;
  Vector direction;
  const AdmissibleSet* admissible = nullptr;
  std::size_t sample_count = 0;
  SampledConstraint constraint;
  /// Samples with enabled[i] == false are ignored; empty means all enabled.
  std::vector<char> enabled;
};

/// Binds a problem's g and a multisample into a line program.  The problem
/// and the multisample must outlive the returned spec.
LineProgramSpec make_line_program(const ProblemInstance& problem, const MultiSample& sample,
                                  Vector anchor, Vector direction);

struct LineSolveOptions {
  /// Absolute bisection tolerance on λ; 0 selects 1e-9·diam(X)/‖c‖.
  double tol_lambda = 0.0;
  /// A λ believed feasible.  It is re-checked; when it holds, the search
  /// grows from it and the result is never below it.
  std::optional<double> feasible_start;
};

struct LineSolution {
  /// Largest feasible λ found, or nullopt when the program is infeasible.
  std::optional<double> lambda;
  /// Sample attaining the largest residual just beyond λ⋆, or nullopt when
  /// λ⋆ sits on the admissible-set boundary.
  std::optional<std::size_t> binding_index;
  double tol_lambda = 0.0;
};

/// Solves the direction program: (1) find a feasible λ, trying 0 first and
/// otherwise minimising the (convex) max-residual over the admissible
/// interval by golden section; (2) grow the step geometrically until the ray
/// leaves the feasible set or reaches the admissible boundary; (3) bisect the
/// bracket to tol_lambda.  The returned λ is always a point where every
/// enabled residual is ≤ 0.  Throws NumericalError on non-finite residuals.
LineSolution solve_line_program(const LineProgramSpec& spec, const LineSolveOptions& options = {});

/// X_M: the stored vertices are the feasible direction optimizers.
struct HullSet {
  struct Vertex {
    std::size_t direction_index = 0;
    Vector point;
    double lambda = 0.0;
  };

  std::vector<Vertex> vertices;
  std::vector<std::size_t> infeasible_directions;
  std::size_t attempted_directions = 0;
  double tolerance = 1e-7;

  bool empty() const { return vertices.empty(); }
  Eigen::Index dim() const { return vertices.empty() ? 0 : vertices.front().point.size(); }
  /// Vertices as columns.
  Matrix points() const;
  Vector centroid() const;
  /// Σ w_v · vertex_v.
  Vector combine(const Vector& weights) const;
};

struct HullBuildOptions {
  LineSolveOptions line;
  double feasibility_tol = 1e-7;
  std::size_t threads = 0;  // 0 = default_thread_count()
};

/// M equispaced unit vectors for n = 2, ±1 for n = 1, and for n ≥ 3 Halton
/// points pushed through the normal quantile and normalised (a deterministic
/// quasi-uniform cover of the sphere).
std::vector<Vector> default_directions(Eigen::Index n, std::size_t M);

/// Generic hull construction over any admissible set and sampled constraint.
/// Direction programs run in parallel; vertices are ordered by direction.
/// Throws InfeasibleError if no direction program is feasible.
HullSet build_hull(const AdmissibleSet& admissible, std::size_t sample_count,
                   const SampledConstraint& constraint, const Vector& anchor,
                   const std::vector<Vector>& directions, const HullBuildOptions& options = {});

HullSet build_hull(const ProblemInstance& problem, const MultiSample& sample, const Vector& anchor,
                   const std::vector<Vector>& directions, const HullBuildOptions& options = {});

struct MembershipResult {
  bool inside = false;
  /// Barycentric weights over hull.vertices (zero outside the active set).
  Vector weights;
  /// Distance from the query to the hull (0 up to round-off when inside).
  double slack = 0.0;
};

/// Decides x ∈ conv(vertices) by Wolfe's minimum-norm-point active-set
/// iteration on {v − x}; inside iff the distance is ≤ tol.
MembershipResult hull_membership(const HullSet& hull, const Vector& x, double tol = 1e-9);

struct HullOptimum {
  Vector point;
  double value = 0.0;
  Vector weights;
};

/// Heuristic minimisation of J over the hull: evaluate every vertex, the
/// centroid and `budget` Dirichlet(1) combinations, then refine the best by
/// golden-section searches along chords towards each vertex and towards
/// random hull points.  The result is a hull member by construction; no
/// optimality is claimed.  Ties go to the lexicographically smallest point.
HullOptimum optimize_over_hull(const Objective& J, const HullSet& hull, std::size_t budget,
                               std::uint64_t seed);

struct DiscardResult {
  std::optional<double> lambda;
  std::vector<std::size_t> removed;
  /// λ⋆ after 0, 1, …, r removals.
  std::vector<double> lambda_path;
};

/// Greedy sampling-and-discarding: r times, drop the sample binding at the
/// current optimizer and re-solve, warm-started from the previous λ⋆ (which
/// stays feasible once constraints are removed), so the path is
/// non-decreasing.
/// Throws DomainError unless 0 ≤ r < sample_count.
DiscardResult greedy_discard(const LineProgramSpec& spec, std::size_t r,
                             const LineSolveOptions& options = {});

/// One hull per constraint family g_j, all from the same multisample.  Hulls
/// of infeasible modes are returned empty.  Throws InfeasibleError if every
/// hull is empty.
std::vector<HullSet> build_union_hulls(const AdmissibleSet& admissible,
                                       const std::vector<ConstraintSpec>& modes,
                                       const MultiSample& sample, const Vector& anchor,
                                       const std::vector<Vector>& directions,
                                       const HullBuildOptions& options = {});

struct UnionOptimum {
  Vector point;
  std::size_t mode_index = 0;  // 0-based index into the hull list
  double value = 0.0;
};

/// optimize_over_hull on every non-empty hull; the lowest mode index wins ties.
UnionOptimum optimize_over_union(const Objective& J, const std::vector<HullSet>& hulls,
                                 std::size_t budget, std::uint64_t seed);

}  // namespace scenario_hull::engine

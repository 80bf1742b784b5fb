// Copyright 2026 The scenario-hull Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "scenario_hull/common.hpp"
#include "scenario_hull/rng.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace scenario_hull::problems {

/// Compact convex set X of admissible decisions.  Immutable after
/// construction; all three kinds are bounded by construction (polytopes carry
/// a caller-supplied bounding box).
class AdmissibleSet {
 public:
  enum class Kind { kBox, kBall, kPolytope };

  static AdmissibleSet box(Vector lower, Vector upper);
  static AdmissibleSet ball(Vector center, double radius);
  /// {x : A x ≤ b} ∩ [lower, upper].  Throws DomainError if empty.
  static AdmissibleSet polytope(Matrix A, Vector b, Vector lower, Vector upper);

  Kind kind() const { return kind_; }
  Eigen::Index dim() const { return lower_.size(); }

  /// Convex gauge-like function: ≤ 0 exactly on the set, and for box and ball
  /// equal to the signed distance outside.
  double residual(const Vector& x) const;
  bool contains(const Vector& x, double tol = 0.0) const { return residual(x) <= tol; }

  /// Closed interval of λ with anchor + λ·direction in the set, or nullopt.
  std::optional<std::pair<double, double>> ray_interval(const Vector& anchor,
                                                        const Vector& direction) const;

  /// A point of the set: box/ball centre, or for polytopes the projection of
  /// the bounding-box centre.
  const Vector& center() const { return center_; }
  double diameter() const;

  /// Euclidean projection (Dykstra iterations for polytopes).
  Vector project(const Vector& x) const;

  /// Uniform draw from the set (rejection from the bounding box for polytopes).
  Vector sample_uniform(CounterRng& rng) const;

  /// Axis-aligned bounding box.
  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }
  double radius() const { return radius_; }
  const Matrix& A() const { return A_; }
  const Vector& b() const { return b_; }

 private:
  AdmissibleSet() = default;
  double box_residual(const Vector& x) const;

  Kind kind_ = Kind::kBox;
  Vector lower_, upper_;
  Vector center_;
  double radius_ = 0.0;
  Matrix A_;  // rows normalised to unit length
  Vector b_;
};

/// Distribution P of the uncertainty δ ∈ R^m.
class UncertaintySpace {
 public:
  enum class Sampler { kUniformBox, kGaussian, kFiniteSupport, kCircleEquispaced };

  static UncertaintySpace uniform_box(Vector lower, Vector upper);
  /// Independent coordinates N(mean_i, stddev_i²).
  static UncertaintySpace gaussian(Vector mean, Vector stddev);
  /// Atoms with probabilities proportional to `weights` (uniform if empty).
  static UncertaintySpace finite_support(std::vector<Vector> atoms,
                                         std::vector<double> weights = {});
  /// One-dimensional angle: one of `count` equispaced angles 2πk/count chosen
  /// uniformly, plus uniform jitter of total width `jitter`.
  static UncertaintySpace circle_equispaced(int count, double jitter);

  Sampler sampler() const { return sampler_; }
  Eigen::Index dim() const { return dim_; }
  Vector draw(CounterRng& rng) const;

  const Vector& first() const { return first_; }
  const Vector& second() const { return second_; }
  const std::vector<Vector>& atoms() const { return atoms_; }
  const std::vector<double>& cumulative_weights() const { return cumulative_; }
  int count() const { return count_; }
  double jitter() const { return jitter_; }

 private:
  UncertaintySpace() = default;

  Sampler sampler_ = Sampler::kUniformBox;
  Eigen::Index dim_ = 0;
  Vector first_, second_;  // lower/upper or mean/stddev
  std::vector<Vector> atoms_;
  std::vector<double> cumulative_;
  int count_ = 0;
  double jitter_ = 0.0;
};

UncertaintySpace::Sampler sampler_from_string(std::string_view name);
std::string_view to_string(UncertaintySpace::Sampler sampler);

/// N draws ω̄ = (δ⁽¹⁾, …, δ⁽ᴺ⁾) with the key that produced them.  Draw i is a
/// pure function of (seed, stream, i), so a shorter multisample is always a
/// prefix of a longer one.
struct MultiSample {
  std::vector<Vector> draws;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  std::size_t size() const { return draws.size(); }
  const Vector& operator[](std::size_t i) const { return draws[i]; }
};

MultiSample draw_multisample(const UncertaintySpace& space, std::size_t N, std::uint64_t seed,
                             std::uint64_t stream);

/// The constraint function g(x, δ), convex in x for each fixed δ.
class ConstraintSpec {
 public:
  enum class Family { kAffine, kNormOffset, kCounterexample, kCustom };
  using Evaluator = std::function<double(const Vector& x, const Vector& delta)>;

  /// g(x,δ) = (a0 + A δ)ᵀ x − (b0 + bᵀ δ).
  static ConstraintSpec affine(Vector a0, Matrix a_matrix, double b0, Vector b_vector);
  /// g(x,δ) = ‖x − δ‖ − ρ.
  static ConstraintSpec norm_offset(double rho);
  /// Decision (x, y, z), δ an angle:
  /// g = max(−√(x²+y²) − z, cos δ·x + sin δ·y − 1 − z).
  /// The first branch is concave; this family exists to exhibit unbounded
  /// support-constraint counts and is not convex in the decision.
  static ConstraintSpec counterexample();
  /// Caller-supplied g, which must be pure, deterministic and convex in x.
  static ConstraintSpec custom(Evaluator g, std::optional<Eigen::Index> decision_dim = {},
                               std::optional<Eigen::Index> uncertainty_dim = {},
                               std::string name = "custom");

  Family family() const { return family_; }
  std::optional<Eigen::Index> decision_dim() const { return n_; }
  std::optional<Eigen::Index> uncertainty_dim() const { return m_; }
  const std::string& name() const { return name_; }

  /// Evaluates g without dimension checks; see evaluate_constraint.
  double operator()(const Vector& x, const Vector& delta) const;

  const Vector& a0() const { return a0_; }
  const Matrix& a_matrix() const { return a_matrix_; }
  double b0() const { return b0_; }
  const Vector& b_vector() const { return b_vector_; }
  double rho() const { return rho_; }

 private:
  ConstraintSpec() = default;

  Family family_ = Family::kAffine;
  std::optional<Eigen::Index> n_, m_;
  std::string name_;
  Vector a0_;
  Matrix a_matrix_;
  double b0_ = 0.0;
  Vector b_vector_;
  double rho_ = 0.0;
  Evaluator custom_;
};

using Objective = std::function<double(const Vector&)>;

/// One chance-constrained program: min J(x) over X subject to
/// P(g(x, δ) ≤ 0) ≥ 1 − ε.
struct ProblemInstance {
  AdmissibleSet admissible;
  UncertaintySpace uncertainty;
  ConstraintSpec constraint;
  Objective objective;

  ProblemInstance(AdmissibleSet admissible, UncertaintySpace uncertainty,
                  ConstraintSpec constraint, Objective objective);

  Eigen::Index decision_dim() const { return admissible.dim(); }
  Eigen::Index uncertainty_dim() const { return uncertainty.dim(); }
};

/// g(x, δ) with dimension checks; throws DimensionError on mismatch and
/// NumericalError when g is not finite.
double evaluate_constraint(const ProblemInstance& problem, const Vector& x, const Vector& delta);

/// Lifts min J(x) s.t. P(g(x,δ) + f(x)·φ(δ) ≤ 0) ≥ 1−ε, h(x) ≤ 0 to the
/// decision (x, y):
///   constraint  g(x,δ) + y·φ(δ)                      (convex in (x, y)),
///   objective   J(x) + χ(x, y), χ = 0 iff x ∈ X and max{h(x), |y − f(x)|} ≤ 0,
///   admissible  bounding box of X × [y_lower, y_upper].
/// The last coordinate of the lifted decision is y.
ProblemInstance lift_separable(const ProblemInstance& core, std::function<double(const Vector&)> f,
                               std::function<double(const Vector&)> varphi,
                               std::function<double(const Vector&)> h, double y_lower,
                               double y_upper);

}  // namespace scenario_hull::problems

// Copyright 2026 The scenario-hull Authors
// SPDX-License-Identifier: Apache-2.0

#include "scenario_hull/problems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace scenario_hull::problems {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool intersect(std::pair<double, double>& interval, double lo, double hi) {
  interval.first = std::max(interval.first, lo);
  interval.second = std::min(interval.second, hi);
  return interval.first <= interval.second;
}

// Restricts `interval` to {λ : slope·λ ≤ rhs}.
bool clip_halfline(std::pair<double, double>& interval, double slope, double rhs) {
  if (slope == 0.0) return rhs >= 0.0;
  if (slope > 0.0) return intersect(interval, -kInf, rhs / slope);
  return intersect(interval, rhs / slope, kInf);
}

Vector dykstra_project(const Matrix& A, const Vector& b, const Vector& lower, const Vector& upper,
                       const Vector& x0) {
  const Eigen::Index rows = A.rows();
  std::vector<Vector> increments(static_cast<std::size_t>(rows + 1), Vector::Zero(x0.size()));
  Vector x = x0;
  for (int sweep = 0; sweep < 20000; ++sweep) {
    const Vector start = x;
    for (Eigen::Index k = 0; k <= rows; ++k) {
      Vector& p = increments[static_cast<std::size_t>(k)];
      const Vector y = x + p;
      Vector projected;
      if (k < rows) {
        const double excess = A.row(k).dot(y) - b(k);
        projected = excess > 0.0 ? Vector(y - excess * A.row(k).transpose()) : y;
      } else {
        projected = y.cwiseMax(lower).cwiseMin(upper);
      }
      p = y - projected;
      x = projected;
    }
    if ((x - start).norm() <= 1e-14 * (1.0 + x.norm())) break;
  }
  return x;
}

}  // namespace

// ---------------------------------------------------------------------------
// AdmissibleSet

AdmissibleSet AdmissibleSet::box(Vector lower, Vector upper) {
  require(lower.size() > 0, "box: dimension must be positive");
  require_dim(upper.size(), lower.size(), "box upper bound");
  for (Eigen::Index i = 0; i < lower.size(); ++i) {
    require(std::isfinite(lower(i)) && std::isfinite(upper(i)) && lower(i) < upper(i),
            "box: need finite lower < upper in every coordinate");
  }
  AdmissibleSet s;
  s.kind_ = Kind::kBox;
  s.center_ = 0.5 * (lower + upper);
  s.lower_ = std::move(lower);
  s.upper_ = std::move(upper);
  return s;
}

AdmissibleSet AdmissibleSet::ball(Vector center, double radius) {
  require(center.size() > 0, "ball: dimension must be positive");
  require(std::isfinite(radius) && radius > 0.0, "ball: radius must be positive");
  require(center.allFinite(), "ball: centre must be finite");
  AdmissibleSet s;
  s.kind_ = Kind::kBall;
  s.radius_ = radius;
  s.lower_ = center.array() - radius;
  s.upper_ = center.array() + radius;
  s.center_ = std::move(center);
  return s;
}

AdmissibleSet AdmissibleSet::polytope(Matrix A, Vector b, Vector lower, Vector upper) {
  AdmissibleSet bounding = box(lower, upper);
  require_dim(A.cols(), lower.size(), "polytope matrix columns");
  require_dim(b.size(), A.rows(), "polytope right-hand side");
  for (Eigen::Index k = 0; k < A.rows(); ++k) {
    const double norm = A.row(k).norm();
    require(norm > 0.0 && std::isfinite(norm), "polytope: rows of A must be nonzero and finite");
    A.row(k) /= norm;
    b(k) /= norm;
  }
  AdmissibleSet s;
  s.kind_ = Kind::kPolytope;
  s.A_ = std::move(A);
  s.b_ = std::move(b);
  s.lower_ = std::move(lower);
  s.upper_ = std::move(upper);
  s.center_ = dykstra_project(s.A_, s.b_, s.lower_, s.upper_, bounding.center());
  if (s.residual(s.center_) > 1e-9 * (1.0 + bounding.diameter())) {
    throw DomainError("polytope: {Ax <= b} does not meet its bounding box");
  }
  return s;
}

double AdmissibleSet::box_residual(const Vector& x) const {
  return std::max((lower_ - x).maxCoeff(), (x - upper_).maxCoeff());
}

double AdmissibleSet::residual(const Vector& x) const {
  require_dim(x.size(), dim(), "admissible set point");
  switch (kind_) {
    case Kind::kBox: return box_residual(x);
    case Kind::kBall: return (x - center_).norm() - radius_;
    case Kind::kPolytope: {
      double r = box_residual(x);
      if (A_.rows() > 0) r = std::max(r, (A_ * x - b_).maxCoeff());
      return r;
    }
  }
  return kInf;
}

std::optional<std::pair<double, double>> AdmissibleSet::ray_interval(
    const Vector& anchor, const Vector& direction) const {
  require_dim(anchor.size(), dim(), "ray anchor");
  require_dim(direction.size(), dim(), "ray direction");
  require(direction.norm() > 0.0, "ray direction must be nonzero");

  std::pair<double, double> interval{-kInf, kInf};
  if (kind_ == Kind::kBall) {
    const Vector offset = anchor - center_;
    const double a = direction.squaredNorm();
    const double half_b = direction.dot(offset);
    const double c = offset.squaredNorm() - radius_ * radius_;
    const double disc = half_b * half_b - a * c;
    if (disc < 0.0) return std::nullopt;
    const double root = std::sqrt(disc);
    // Stable pair of roots.
    const double q = -(half_b + std::copysign(root, half_b));
    double r1 = q / a;
    double r2 = q != 0.0 ? c / q : -r1;
    if (r1 > r2) std::swap(r1, r2);
    return std::pair{r1, r2};
  }

  for (Eigen::Index i = 0; i < dim(); ++i) {
    if (!clip_halfline(interval, direction(i), upper_(i) - anchor(i))) return std::nullopt;
    if (!clip_halfline(interval, -direction(i), anchor(i) - lower_(i))) return std::nullopt;
  }
  if (kind_ == Kind::kPolytope) {
    for (Eigen::Index k = 0; k < A_.rows(); ++k) {
      if (!clip_halfline(interval, A_.row(k).dot(direction), b_(k) - A_.row(k).dot(anchor))) {
        return std::nullopt;
      }
    }
  }
  return interval;
}

double AdmissibleSet::diameter() const {
  if (kind_ == Kind::kBall) return 2.0 * radius_;
  return (upper_ - lower_).norm();
}

Vector AdmissibleSet::project(const Vector& x) const {
  require_dim(x.size(), dim(), "projection point");
  switch (kind_) {
    case Kind::kBox: return x.cwiseMax(lower_).cwiseMin(upper_);
    case Kind::kBall: {
      const Vector offset = x - center_;
      const double dist = offset.norm();
      if (dist <= radius_) return x;
      return center_ + offset * (radius_ / dist);
    }
    case Kind::kPolytope: return dykstra_project(A_, b_, lower_, upper_, x);
  }
  return x;
}

Vector AdmissibleSet::sample_uniform(CounterRng& rng) const {
  const Eigen::Index n = dim();
  Vector x(n);
  switch (kind_) {
    case Kind::kBox:
      for (Eigen::Index i = 0; i < n; ++i) x(i) = rng.uniform(lower_(i), upper_(i));
      return x;
    case Kind::kBall: {
      for (Eigen::Index i = 0; i < n; ++i) x(i) = rng.normal();
      const double r = radius_ * std::pow(rng.uniform(), 1.0 / static_cast<double>(n));
      return center_ + x * (r / x.norm());
    }
    case Kind::kPolytope:
      for (int attempt = 0; attempt < 10000; ++attempt) {
        for (Eigen::Index i = 0; i < n; ++i) x(i) = rng.uniform(lower_(i), upper_(i));
        if (residual(x) <= 0.0) return x;
      }
      return center_;
  }
  return center_;
}

// ---------------------------------------------------------------------------
// UncertaintySpace

UncertaintySpace UncertaintySpace::uniform_box(Vector lower, Vector upper) {
  require(lower.size() > 0, "uniform_box: dimension must be positive");
  require_dim(upper.size(), lower.size(), "uniform_box upper bound");
  require(((upper - lower).array() >= 0.0).all() && lower.allFinite() && upper.allFinite(),
          "uniform_box: need finite lower <= upper");
  UncertaintySpace s;
  s.sampler_ = Sampler::kUniformBox;
  s.dim_ = lower.size();
  s.first_ = std::move(lower);
  s.second_ = std::move(upper);
  return s;
}

UncertaintySpace UncertaintySpace::gaussian(Vector mean, Vector stddev) {
  require(mean.size() > 0, "gaussian: dimension must be positive");
  require_dim(stddev.size(), mean.size(), "gaussian stddev");
  require((stddev.array() >= 0.0).all() && stddev.allFinite() && mean.allFinite(),
          "gaussian: need finite mean and non-negative stddev");
  UncertaintySpace s;
  s.sampler_ = Sampler::kGaussian;
  s.dim_ = mean.size();
  s.first_ = std::move(mean);
  s.second_ = std::move(stddev);
  return s;
}

UncertaintySpace UncertaintySpace::finite_support(std::vector<Vector> atoms,
                                                  std::vector<double> weights) {
  require(!atoms.empty(), "finite_support: need at least one atom");
  const Eigen::Index m = atoms.front().size();
  require(m > 0, "finite_support: atoms must have positive dimension");
  for (const auto& a : atoms) require_dim(a.size(), m, "finite_support atom");
  if (weights.empty()) weights.assign(atoms.size(), 1.0);
  require(weights.size() == atoms.size(), "finite_support: one weight per atom");
  double total = 0.0;
  std::vector<double> cumulative;
  for (double w : weights) {
    require(w >= 0.0 && std::isfinite(w), "finite_support: weights must be non-negative");
    total += w;
    cumulative.push_back(total);
  }
  require(total > 0.0, "finite_support: weights must not all be zero");
  for (double& c : cumulative) c /= total;
  cumulative.back() = 1.0;

  UncertaintySpace s;
  s.sampler_ = Sampler::kFiniteSupport;
  s.dim_ = m;
  s.atoms_ = std::move(atoms);
  s.cumulative_ = std::move(cumulative);
  return s;
}

UncertaintySpace UncertaintySpace::circle_equispaced(int count, double jitter) {
  require(count >= 1, "circle_equispaced: count must be >= 1");
  require(jitter >= 0.0 && std::isfinite(jitter), "circle_equispaced: jitter must be >= 0");
  UncertaintySpace s;
  s.sampler_ = Sampler::kCircleEquispaced;
  s.dim_ = 1;
  s.count_ = count;
  s.jitter_ = jitter;
  return s;
}

Vector UncertaintySpace::draw(CounterRng& rng) const {
  Vector d(dim_);
  switch (sampler_) {
    case Sampler::kUniformBox:
      for (Eigen::Index i = 0; i < dim_; ++i) d(i) = rng.uniform(first_(i), second_(i));
      return d;
    case Sampler::kGaussian:
      for (Eigen::Index i = 0; i < dim_; ++i) d(i) = first_(i) + second_(i) * rng.normal();
      return d;
    case Sampler::kFiniteSupport: {
      const double u = rng.uniform();
      const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
      const auto index = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()),
                                               atoms_.size() - 1);
      return atoms_[index];
    }
    case Sampler::kCircleEquispaced: {
      const auto k = static_cast<double>(rng.next_u64() % static_cast<std::uint64_t>(count_));
      d(0) = 2.0 * std::numbers::pi * k / count_ + jitter_ * (rng.uniform() - 0.5);
      return d;
    }
  }
  return d;
}

UncertaintySpace::Sampler sampler_from_string(std::string_view name) {
  if (name == "uniform_box") return UncertaintySpace::Sampler::kUniformBox;
  if (name == "gaussian") return UncertaintySpace::Sampler::kGaussian;
  if (name == "finite_support") return UncertaintySpace::Sampler::kFiniteSupport;
  if (name == "circle_equispaced") return UncertaintySpace::Sampler::kCircleEquispaced;
  throw DomainError("unknown sampler id '" + std::string(name) + "'");
}

std::string_view to_string(UncertaintySpace::Sampler sampler) {
  switch (sampler) {
    case UncertaintySpace::Sampler::kUniformBox: return "uniform_box";
    case UncertaintySpace::Sampler::kGaussian: return "gaussian";
    case UncertaintySpace::Sampler::kFiniteSupport: return "finite_support";
    case UncertaintySpace::Sampler::kCircleEquispaced: return "circle_equispaced";
  }
  return "unknown";
}

MultiSample draw_multisample(const UncertaintySpace& space, std::size_t N, std::uint64_t seed,
                             std::uint64_t stream) {
  require(N >= 1, "draw_multisample: N must be >= 1");
  MultiSample sample;
  sample.seed = seed;
  sample.stream = stream;
  sample.draws.reserve(N);
  const std::uint64_t stream_key = derive_key(seed, stream);
  for (std::size_t i = 0; i < N; ++i) {
    CounterRng rng(derive_key(stream_key, i));
    sample.draws.push_back(space.draw(rng));
  }
  return sample;
}

// ---------------------------------------------------------------------------
// ConstraintSpec

ConstraintSpec ConstraintSpec::affine(Vector a0, Matrix a_matrix, double b0, Vector b_vector) {
  require(a0.size() > 0, "affine: decision dimension must be positive");
  require_dim(a_matrix.rows(), a0.size(), "affine A rows");
  require(a_matrix.cols() > 0, "affine: uncertainty dimension must be positive");
  require_dim(b_vector.size(), a_matrix.cols(), "affine b vector");
  ConstraintSpec c;
  c.family_ = Family::kAffine;
  c.n_ = a0.size();
  c.m_ = a_matrix.cols();
  c.name_ = "affine";
  c.a0_ = std::move(a0);
  c.a_matrix_ = std::move(a_matrix);
  c.b0_ = b0;
  c.b_vector_ = std::move(b_vector);
  return c;
}

ConstraintSpec ConstraintSpec::norm_offset(double rho) {
  require(std::isfinite(rho), "norm_offset: rho must be finite");
  ConstraintSpec c;
  c.family_ = Family::kNormOffset;
  c.name_ = "norm_offset";
  c.rho_ = rho;
  return c;
}

ConstraintSpec ConstraintSpec::counterexample() {
  ConstraintSpec c;
  c.family_ = Family::kCounterexample;
  c.n_ = 3;
  c.m_ = 1;
  c.name_ = "counterexample";
  return c;
}

ConstraintSpec ConstraintSpec::custom(Evaluator g, std::optional<Eigen::Index> decision_dim,
                                      std::optional<Eigen::Index> uncertainty_dim,
                                      std::string name) {
  require(static_cast<bool>(g), "custom constraint needs an evaluator");
  ConstraintSpec c;
  c.family_ = Family::kCustom;
  c.n_ = decision_dim;
  c.m_ = uncertainty_dim;
  c.name_ = std::move(name);
  c.custom_ = std::move(g);
  return c;
}

double ConstraintSpec::operator()(const Vector& x, const Vector& delta) const {
  switch (family_) {
    case Family::kAffine:
      return (a0_ + a_matrix_ * delta).dot(x) - (b0_ + b_vector_.dot(delta));
    case Family::kNormOffset: return (x - delta).norm() - rho_;
    case Family::kCounterexample: {
      const double cone = -std::hypot(x(0), x(1)) - x(2);
      const double plane = std::cos(delta(0)) * x(0) + std::sin(delta(0)) * x(1) - 1.0 - x(2);
      return std::max(cone, plane);
    }
    case Family::kCustom: return custom_(x, delta);
  }
  return kInf;
}

// ---------------------------------------------------------------------------
// ProblemInstance

ProblemInstance::ProblemInstance(AdmissibleSet admissible_, UncertaintySpace uncertainty_,
                                 ConstraintSpec constraint_, Objective objective_)
    : admissible(std::move(admissible_)),
      uncertainty(std::move(uncertainty_)),
      constraint(std::move(constraint_)),
      objective(std::move(objective_)) {
  if (auto n = constraint.decision_dim()) require_dim(admissible.dim(), *n, "admissible set");
  if (auto m = constraint.uncertainty_dim()) require_dim(uncertainty.dim(), *m, "uncertainty");
  if (constraint.family() == ConstraintSpec::Family::kNormOffset) {
    require_dim(uncertainty.dim(), admissible.dim(), "norm_offset uncertainty");
  }
  if (!objective) objective = [](const Vector&) { return 0.0; };
}

double evaluate_constraint(const ProblemInstance& problem, const Vector& x, const Vector& delta) {
  require_dim(x.size(), problem.decision_dim(), "decision vector");
  require_dim(delta.size(), problem.uncertainty_dim(), "uncertainty vector");
  const double value = problem.constraint(x, delta);
  if (std::isnan(value)) throw NumericalError("constraint evaluated to NaN");
  return value;
}

ProblemInstance lift_separable(const ProblemInstance& core, std::function<double(const Vector&)> f,
                               std::function<double(const Vector&)> varphi,
                               std::function<double(const Vector&)> h, double y_lower,
                               double y_upper) {
  const Eigen::Index n = core.decision_dim();
  Vector lower(n + 1), upper(n + 1);
  lower << core.admissible.lower(), y_lower;
  upper << core.admissible.upper(), y_upper;
  AdmissibleSet lifted_set = AdmissibleSet::box(lower, upper);

  ConstraintSpec g_core = core.constraint;
  ConstraintSpec lifted_constraint = ConstraintSpec::custom(
      [g_core, varphi](const Vector& xy, const Vector& delta) {
        const Eigen::Index k = xy.size() - 1;
        return g_core(xy.head(k), delta) + xy(k) * varphi(delta);
      },
      n + 1, core.uncertainty_dim(), "lifted_" + core.constraint.name());

  AdmissibleSet original_set = core.admissible;
  Objective J = core.objective;
  Objective lifted_objective = [J, f, h, original_set](const Vector& xy) {
    const Eigen::Index k = xy.size() - 1;
    const Vector x = xy.head(k);
    if (!original_set.contains(x)) return kInf;
    if (std::max(h(x), std::abs(xy(k) - f(x))) > 0.0) return kInf;
    return J(x);
  };

  return ProblemInstance(std::move(lifted_set), core.uncertainty, std::move(lifted_constraint),
                         std::move(lifted_objective));
}

}  // namespace scenario_hull::problems

// Copyright 2026 The scenario-hull Authors
// SPDX-License-Identifier: Apache-2.0

#include "scenario_hull/scenario_engine.hpp"

#include "scenario_hull/parallel.hpp"
#include "scenario_hull/rng.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace scenario_hull::engine {

namespace {

constexpr double kGolden = 0.6180339887498949;

bool is_enabled(const LineProgramSpec& spec, std::size_t i) {
  return spec.enabled.empty() || spec.enabled[i] != 0;
}

struct MaxResidual {
  double value = -std::numeric_limits<double>::infinity();
  std::optional<std::size_t> argmax;
};

MaxResidual max_residual(const LineProgramSpec& spec, double lambda) {
  const Vector point = spec.anchor + lambda * spec.direction;
  MaxResidual out;
  for (std::size_t i = 0; i < spec.sample_count; ++i) {
    if (!is_enabled(spec, i)) continue;
    const double r = spec.constraint(i, point);
    if (!std::isfinite(r)) {
      throw NumericalError("constraint residual is not finite for sample " + std::to_string(i));
    }
    if (r > out.value) {
      out.value = r;
      out.argmax = i;
    }
  }
  return out;
}

// Golden-section minimisation of a unimodal function on [lo, hi].
template <class F>
double golden_minimize(F&& f, double lo, double hi, double tol) {
  double a = lo, b = hi;
  double c = b - kGolden * (b - a), d = a + kGolden * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kGolden * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kGolden * (b - a);
      fd = f(d);
    }
  }
  return fc <= fd ? c : d;
}

double radical_inverse(std::uint64_t index, std::uint64_t base) {
  double result = 0.0, scale = 1.0 / static_cast<double>(base);
  while (index > 0) {
    result += static_cast<double>(index % base) * scale;
    index /= base;
    scale /= static_cast<double>(base);
  }
  return result;
}

std::vector<std::uint64_t> first_primes(std::size_t count) {
  std::vector<std::uint64_t> primes;
  for (std::uint64_t c = 2; primes.size() < count; ++c) {
    bool prime = true;
    for (std::uint64_t p : primes) {
      if (p * p > c) break;
      if (c % p == 0) {
        prime = false;
        break;
      }
    }
    if (prime) primes.push_back(c);
  }
  return primes;
}

bool lex_less(const Vector& a, const Vector& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a(i) < b(i)) return true;
    if (a(i) > b(i)) return false;
  }
  return false;
}

Vector dirichlet_weights(CounterRng& rng, std::size_t count) {
  Vector w(static_cast<Eigen::Index>(count));
  for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = rng.exponential();
  return w / w.sum();
}

}  // namespace

LineProgramSpec make_line_program(const ProblemInstance& problem, const MultiSample& sample,
                                  Vector anchor, Vector direction) {
  require_dim(anchor.size(), problem.decision_dim(), "line program anchor");
  require_dim(direction.size(), problem.decision_dim(), "line program direction");
  LineProgramSpec spec;
  spec.anchor = std::move(anchor);
  spec.direction = std::move(direction);
  spec.admissible = &problem.admissible;
  spec.sample_count = sample.size();
  spec.constraint = [&problem, &sample](std::size_t i, const Vector& x) {
    return evaluate_constraint(problem, x, sample[i]);
  };
  return spec;
}

LineSolution solve_line_program(const LineProgramSpec& spec, const LineSolveOptions& options) {
  require(spec.admissible != nullptr, "line program: admissible set is missing");
  require(static_cast<bool>(spec.constraint), "line program: constraint is missing");
  require_dim(spec.anchor.size(), spec.admissible->dim(), "line program anchor");
  require_dim(spec.direction.size(), spec.admissible->dim(), "line program direction");
  require(spec.enabled.empty() || spec.enabled.size() == spec.sample_count,
          "line program: enabled mask must match the sample count");
  const double dir_norm = spec.direction.norm();
  require(dir_norm > 0.0 && std::isfinite(dir_norm), "line program: direction must be nonzero");

  LineSolution out;
  out.tol_lambda = options.tol_lambda > 0.0 ? options.tol_lambda
                                            : 1e-9 * spec.admissible->diameter() / dir_norm;
  const double tol = out.tol_lambda;

  const auto interval = spec.admissible->ray_interval(spec.anchor, spec.direction);
  if (!interval) return out;
  const double lo = interval->first, hi = interval->second;

  auto H = [&](double lambda) { return max_residual(spec, lambda).value; };

  double feasible;
  const auto& start = options.feasible_start;
  if (start && lo <= *start && *start <= hi && H(*start) <= 0.0) {
    feasible = *start;
  } else if (lo <= 0.0 && 0.0 <= hi && H(0.0) <= 0.0) {
    feasible = 0.0;
  } else {
    const double best = golden_minimize(H, lo, hi, tol);
    if (H(best) <= 0.0) {
      feasible = best;
    } else if (H(hi) <= 0.0) {
      feasible = hi;
    } else if (H(lo) <= 0.0) {
      feasible = lo;
    } else {
      return out;
    }
  }

  if (H(hi) <= 0.0) {
    out.lambda = hi;
    return out;
  }

  // Geometric growth to bracket the exit point, then bisection.
  double a = feasible;
  double step = std::max(tol, (hi - feasible) / 1024.0);
  double b = hi;
  while (true) {
    const double probe = a + step;
    if (probe >= hi) {
      b = hi;
      break;
    }
    if (H(probe) > 0.0) {
      b = probe;
      break;
    }
    a = probe;
    step *= 2.0;
  }
  while (b - a > tol) {
    const double mid = 0.5 * (a + b);
    if (mid <= a || mid >= b) break;
    if (H(mid) <= 0.0) {
      a = mid;
    } else {
      b = mid;
    }
  }
  out.lambda = a;
  out.binding_index = max_residual(spec, b).argmax;
  return out;
}

Matrix HullSet::points() const {
  Matrix P(dim(), static_cast<Eigen::Index>(vertices.size()));
  for (std::size_t k = 0; k < vertices.size(); ++k) {
    P.col(static_cast<Eigen::Index>(k)) = vertices[k].point;
  }
  return P;
}

Vector HullSet::centroid() const {
  require(!vertices.empty(), "centroid of an empty hull");
  return points().rowwise().mean();
}

Vector HullSet::combine(const Vector& weights) const {
  require_dim(weights.size(), static_cast<Eigen::Index>(vertices.size()), "hull weights");
  return points() * weights;
}

std::vector<Vector> default_directions(Eigen::Index n, std::size_t M) {
  require(n >= 1, "default_directions: dimension must be positive");
  require(M >= 1, "default_directions: need at least one direction");
  std::vector<Vector> dirs;
  dirs.reserve(M);
  if (n == 1) {
    for (std::size_t k = 0; k < M; ++k) dirs.push_back(Vector::Constant(1, k % 2 == 0 ? 1.0 : -1.0));
    return dirs;
  }
  if (n == 2) {
    for (std::size_t k = 0; k < M; ++k) {
      const double t = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(M);
      Vector d(2);
      d << std::cos(t), std::sin(t);
      dirs.push_back(d);
    }
    return dirs;
  }
  const auto primes = first_primes(static_cast<std::size_t>(n));
  const boost::math::normal_distribution<double> normal;
  for (std::size_t k = 0; k < M; ++k) {
    Vector d(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      d(j) = boost::math::quantile(normal, radical_inverse(k + 1, primes[static_cast<std::size_t>(j)]));
    }
    dirs.push_back(d / d.norm());
  }
  return dirs;
}

HullSet build_hull(const AdmissibleSet& admissible, std::size_t sample_count,
                   const SampledConstraint& constraint, const Vector& anchor,
                   const std::vector<Vector>& directions, const HullBuildOptions& options) {
  require(!directions.empty(), "build_hull: need at least one direction");
  require_dim(anchor.size(), admissible.dim(), "hull anchor");
  for (const auto& d : directions) require_dim(d.size(), admissible.dim(), "hull direction");

  std::vector<LineSolution> solutions(directions.size());
  parallel_for(directions.size(), options.threads, [&](std::size_t k) {
    LineProgramSpec spec;
    spec.anchor = anchor;
    spec.direction = directions[k];
    spec.admissible = &admissible;
    spec.sample_count = sample_count;
    spec.constraint = constraint;
    solutions[k] = solve_line_program(spec, options.line);
  });

  HullSet hull;
  hull.tolerance = options.feasibility_tol;
  hull.attempted_directions = directions.size();
  for (std::size_t k = 0; k < directions.size(); ++k) {
    if (!solutions[k].lambda) {
      hull.infeasible_directions.push_back(k);
      continue;
    }
    const double lambda = *solutions[k].lambda;
    Vector point = anchor + lambda * directions[k];
    if (admissible.residual(point) > options.feasibility_tol) {
      throw NumericalError("hull vertex " + std::to_string(k) + " leaves the admissible set");
    }
    for (std::size_t i = 0; i < sample_count; ++i) {
      if (constraint(i, point) > options.feasibility_tol) {
        throw NumericalError("hull vertex " + std::to_string(k) + " violates sample " +
                             std::to_string(i));
      }
    }
    hull.vertices.push_back({k, std::move(point), lambda});
  }
  if (hull.vertices.empty()) {
    throw InfeasibleError("every direction program is infeasible for this multisample");
  }
  return hull;
}

HullSet build_hull(const ProblemInstance& problem, const MultiSample& sample, const Vector& anchor,
                   const std::vector<Vector>& directions, const HullBuildOptions& options) {
  for (const auto& d : sample.draws) require_dim(d.size(), problem.uncertainty_dim(), "sample");
  const SampledConstraint g = [&](std::size_t i, const Vector& x) {
    return evaluate_constraint(problem, x, sample[i]);
  };
  return build_hull(problem.admissible, sample.size(), g, anchor, directions, options);
}

MembershipResult hull_membership(const HullSet& hull, const Vector& x, double tol) {
  require(!hull.empty(), "membership in an empty hull");
  require_dim(x.size(), hull.dim(), "membership query");
  const Eigen::Index V = static_cast<Eigen::Index>(hull.vertices.size());
  const Matrix P = hull.points().colwise() - x;
  const double scale = std::max(1.0, P.colwise().squaredNorm().maxCoeff());

  // Start from the nearest vertex.
  Eigen::Index first = 0;
  P.colwise().squaredNorm().minCoeff(&first);
  std::vector<Eigen::Index> active{first};
  std::vector<double> w{1.0};
  Vector y = P.col(first);

  auto affine_minimizer = [&](const std::vector<Eigen::Index>& set) {
    const Eigen::Index s = static_cast<Eigen::Index>(set.size());
    Matrix K = Matrix::Zero(s + 1, s + 1);
    for (Eigen::Index a = 0; a < s; ++a) {
      for (Eigen::Index b = 0; b < s; ++b) K(a, b) = P.col(set[a]).dot(P.col(set[b]));
      K(a, s) = 1.0;
      K(s, a) = 1.0;
    }
    Vector rhs = Vector::Zero(s + 1);
    rhs(s) = 1.0;
    const Vector sol = K.colPivHouseholderQr().solve(rhs);
    return Vector(sol.head(s));
  };

  const int major_cap = 10 * static_cast<int>(V + x.size());
  for (int major = 0; major < major_cap; ++major) {
    Eigen::Index j = 0;
    (P.transpose() * y).minCoeff(&j);
    if (y.squaredNorm() - y.dot(P.col(j)) <= 1e-12 * scale) break;
    if (std::find(active.begin(), active.end(), j) != active.end()) break;
    active.push_back(j);
    w.push_back(0.0);

    for (std::size_t minor = 0; minor <= active.size() + 1; ++minor) {
      const Vector alpha = affine_minimizer(active);
      if (!alpha.allFinite()) break;
      if (alpha.minCoeff() > 1e-14) {
        for (std::size_t k = 0; k < active.size(); ++k) w[k] = alpha(static_cast<Eigen::Index>(k));
        break;
      }
      double theta = 1.0;
      for (std::size_t k = 0; k < active.size(); ++k) {
        const double ak = alpha(static_cast<Eigen::Index>(k));
        if (ak <= 1e-14 && w[k] - ak > 0.0) theta = std::min(theta, w[k] / (w[k] - ak));
      }
      for (std::size_t k = 0; k < active.size(); ++k) {
        w[k] = (1.0 - theta) * w[k] + theta * alpha(static_cast<Eigen::Index>(k));
      }
      // Drop the vertices whose weight vanished, always at least one.
      std::size_t smallest = 0;
      for (std::size_t k = 1; k < active.size(); ++k) {
        if (w[k] < w[smallest]) smallest = k;
      }
      std::vector<Eigen::Index> kept_idx;
      std::vector<double> kept_w;
      for (std::size_t k = 0; k < active.size(); ++k) {
        if (k == smallest || w[k] <= 1e-14) continue;
        kept_idx.push_back(active[k]);
        kept_w.push_back(w[k]);
      }
      if (kept_idx.empty()) {
        kept_idx.push_back(active[smallest == 0 && active.size() > 1 ? 1 : 0]);
        kept_w.push_back(1.0);
      }
      double total = 0.0;
      for (double v : kept_w) total += v;
      for (double& v : kept_w) v /= total;
      active = std::move(kept_idx);
      w = std::move(kept_w);
    }
    y = Vector::Zero(x.size());
    for (std::size_t k = 0; k < active.size(); ++k) y += w[k] * P.col(active[k]);
  }

  MembershipResult out;
  out.weights = Vector::Zero(V);
  for (std::size_t k = 0; k < active.size(); ++k) out.weights(active[k]) = w[k];
  out.slack = y.norm();
  out.inside = out.slack <= tol;
  return out;
}

HullOptimum optimize_over_hull(const Objective& J, const HullSet& hull, std::size_t budget,
                               std::uint64_t seed) {
  require(!hull.empty(), "optimize_over_hull: empty hull");
  require(static_cast<bool>(J), "optimize_over_hull: objective is missing");
  const std::size_t V = hull.vertices.size();
  const Matrix P = hull.points();
  CounterRng rng(seed, stream_id(StreamDomain::kOptimize, 0));

  HullOptimum best;
  bool have = false;
  auto consider = [&](const Vector& weights) {
    const Vector point = P * weights;
    const double value = J(point);
    if (std::isnan(value)) throw NumericalError("objective returned NaN");
    if (!have || value < best.value || (value == best.value && lex_less(point, best.point))) {
      best = {point, value, weights};
      have = true;
    }
  };

  for (std::size_t k = 0; k < V; ++k) consider(Vector::Unit(static_cast<Eigen::Index>(V), static_cast<Eigen::Index>(k)));
  consider(Vector::Constant(static_cast<Eigen::Index>(V), 1.0 / static_cast<double>(V)));
  for (std::size_t s = 0; s < budget; ++s) consider(dirichlet_weights(rng, V));

  if (V == 1) return best;
  // Line searches along chords from the incumbent.
  for (int round = 0; round < 4; ++round) {
    std::vector<Vector> targets;
    for (std::size_t k = 0; k < V; ++k) targets.push_back(Vector::Unit(static_cast<Eigen::Index>(V), static_cast<Eigen::Index>(k)));
    for (std::size_t k = 0; k < V; ++k) targets.push_back(dirichlet_weights(rng, V));
    for (const Vector& target : targets) {
      const Vector origin = best.weights;
      auto along = [&](double t) {
        const double v = J(P * ((1.0 - t) * origin + t * target));
        return std::isfinite(v) ? v : std::numeric_limits<double>::max();
      };
      const double t = golden_minimize(along, 0.0, 1.0, 1e-10);
      consider((1.0 - t) * origin + t * target);
    }
  }
  return best;
}

DiscardResult greedy_discard(const LineProgramSpec& spec, std::size_t r,
                             const LineSolveOptions& options) {
  require(r < spec.sample_count, "greedy_discard: need r < N");
  LineProgramSpec work = spec;
  if (work.enabled.empty()) work.enabled.assign(work.sample_count, 1);

  DiscardResult out;
  LineSolution sol = solve_line_program(work, options);
  if (!sol.lambda) return out;
  out.lambda_path.push_back(*sol.lambda);
  for (std::size_t step = 0; step < r; ++step) {
    std::size_t drop;
    if (sol.binding_index) {
      drop = *sol.binding_index;
    } else {
      // The admissible boundary binds; drop the tightest sample at λ⋆.
      const Vector point = work.anchor + *sol.lambda * work.direction;
      std::optional<std::size_t> arg;
      double top = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < work.sample_count; ++i) {
        if (!work.enabled[i]) continue;
        const double v = work.constraint(i, point);
        if (v > top) {
          top = v;
          arg = i;
        }
      }
      if (!arg) break;
      drop = *arg;
    }
    work.enabled[drop] = 0;
    out.removed.push_back(drop);
    LineSolveOptions warm = options;
    warm.feasible_start = sol.lambda;
    sol = solve_line_program(work, warm);
    if (!sol.lambda) throw NumericalError("greedy_discard: program became infeasible after a removal");
    out.lambda_path.push_back(*sol.lambda);
  }
  out.lambda = out.lambda_path.back();
  return out;
}

std::vector<HullSet> build_union_hulls(const AdmissibleSet& admissible,
                                       const std::vector<ConstraintSpec>& modes,
                                       const MultiSample& sample, const Vector& anchor,
                                       const std::vector<Vector>& directions,
                                       const HullBuildOptions& options) {
  require(!modes.empty(), "build_union_hulls: need at least one mode");
  std::vector<HullSet> hulls;
  bool any = false;
  for (const auto& mode : modes) {
    const SampledConstraint g = [&](std::size_t i, const Vector& x) {
      const double v = mode(x, sample[i]);
      if (std::isnan(v)) throw NumericalError("constraint returned NaN");
      return v;
    };
    try {
      hulls.push_back(build_hull(admissible, sample.size(), g, anchor, directions, options));
      any = true;
    } catch (const InfeasibleError&) {
      HullSet empty;
      empty.tolerance = options.feasibility_tol;
      empty.attempted_directions = directions.size();
      for (std::size_t k = 0; k < directions.size(); ++k) empty.infeasible_directions.push_back(k);
      hulls.push_back(std::move(empty));
    }
  }
  if (!any) throw InfeasibleError("every mode hull is empty");
  return hulls;
}

UnionOptimum optimize_over_union(const Objective& J, const std::vector<HullSet>& hulls,
                                 std::size_t budget, std::uint64_t seed) {
  UnionOptimum best;
  bool have = false;
  for (std::size_t j = 0; j < hulls.size(); ++j) {
    if (hulls[j].empty()) continue;
    const HullOptimum opt = optimize_over_hull(J, hulls[j], budget, derive_key(seed, j));
    if (!have || opt.value < best.value) {
      best = {opt.point, j, opt.value};
      have = true;
    }
  }
  if (!have) throw InfeasibleError("every mode hull is empty");
  return best;
}

}  // namespace scenario_hull::engine

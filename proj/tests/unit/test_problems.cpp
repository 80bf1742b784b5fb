// Copyright 2026 The scenario-hull Authors
// SPDX-License-Identifier: Apache-2.0

#include "scenario_hull/counterexample.hpp"
#include "scenario_hull/problems.hpp"
#include "scenario_hull/rng.hpp"
#include "scenario_hull/validation.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace scenario_hull;
using namespace scenario_hull::problems;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

ProblemInstance affine_uniform_problem() {
  return ProblemInstance(AdmissibleSet::box(vec({-1, -1}), vec({1, 1})),
                         UncertaintySpace::uniform_box(vec({0, 0}), vec({1, 1})),
                         ConstraintSpec::affine(Vector::Zero(2), Matrix::Identity(2, 2), 1.0, Vector::Zero(2)),
                         nullptr);
}

}  // namespace

TEST_CASE("rng streams are addressable and reproducible") {
  CounterRng a(42, 7), b(42, 7), c(42, 8);
  for (int i = 0; i < 10; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    CHECK(x != c.next_u64());
  }
  CounterRng u(1);
  for (int i = 0; i < 1000; ++i) {
    const double v = u.uniform();
    CHECK(v >= 0.0);
    CHECK(v < 1.0);
    CHECK(u.uniform_open() > 0.0);
  }
}

TEST_CASE("admissible sets") {
  const auto box = AdmissibleSet::box(vec({-1, 0}), vec({1, 2}));
  CHECK(box.contains(vec({0, 1})));
  CHECK_FALSE(box.contains(vec({2, 1})));
  CHECK(box.residual(vec({2, 1})) == doctest::Approx(1.0));
  const auto ray = box.ray_interval(vec({0, 1}), vec({1, 0}));
  REQUIRE(ray);
  CHECK(ray->first == doctest::Approx(-1.0));
  CHECK(ray->second == doctest::Approx(1.0));
  CHECK_FALSE(box.ray_interval(vec({5, 5}), vec({1, 0})));
  CHECK(box.project(vec({3, -1})).isApprox(vec({1, 0})));

  const auto ball = AdmissibleSet::ball(vec({0, 0}), 1.0);
  const auto bray = ball.ray_interval(vec({0, 0}), vec({1, 0}));
  REQUIRE(bray);
  CHECK(bray->second == doctest::Approx(1.0));
  CHECK(ball.diameter() == 2.0);
  CHECK(ball.project(vec({3, 4})).isApprox(vec({0.6, 0.8})));

  Matrix A(1, 2);
  A << 1, 1;
  const auto poly = AdmissibleSet::polytope(A, vec({1}), vec({0, 0}), vec({2, 2}));
  CHECK(poly.contains(poly.center(), 1e-9));
  CHECK_FALSE(poly.contains(vec({1, 1})));
  const auto pray = poly.ray_interval(vec({0, 0}), vec({1, 1}));
  REQUIRE(pray);
  CHECK(pray->second == doctest::Approx(0.5));
  CHECK_THROWS_AS(AdmissibleSet::polytope(A, vec({-1}), vec({0, 0}), vec({2, 2})), DomainError);
  CHECK_THROWS_AS(AdmissibleSet::box(vec({1}), vec({0})), DomainError);
  CHECK_THROWS_AS(AdmissibleSet::ball(vec({0}), 0.0), DomainError);

  CounterRng rng(3);
  for (int i = 0; i < 200; ++i) {
    CHECK(ball.contains(ball.sample_uniform(rng), 1e-12));
    CHECK(poly.contains(poly.sample_uniform(rng), 1e-12));
  }
}

TEST_CASE("draw_multisample") {
  const auto atom = UncertaintySpace::finite_support({vec({0.3, -1.0})});
  const auto s = draw_multisample(atom, 3, 1, 1);
  REQUIRE(s.size() == 3);
  for (const auto& d : s.draws) CHECK(d.isApprox(vec({0.3, -1.0})));

  const auto box = UncertaintySpace::uniform_box(vec({0, 0}), vec({1, 1}));
  const auto big = draw_multisample(box, 1000, 99, 5);
  Vector mean = Vector::Zero(2);
  for (const auto& d : big.draws) mean += d;
  mean /= 1000.0;
  // 3σ of a Uniform(0,1) mean over 1000 draws is ≈ 0.027.
  CHECK(std::abs(mean(0) - 0.5) < 0.05);
  CHECK(std::abs(mean(1) - 0.5) < 0.05);

  const auto again = draw_multisample(box, 1000, 99, 5);
  for (std::size_t i = 0; i < 1000; ++i) CHECK(big[i] == again[i]);
  // A shorter multisample is a prefix of a longer one.
  const auto prefix = draw_multisample(box, 10, 99, 5);
  for (std::size_t i = 0; i < 10; ++i) CHECK(prefix[i] == big[i]);

  CHECK(sampler_from_string("gaussian") == UncertaintySpace::Sampler::kGaussian);
  CHECK(to_string(UncertaintySpace::Sampler::kUniformBox) == "uniform_box");
  CHECK_THROWS_AS(sampler_from_string("cauchy"), DomainError);
}

TEST_CASE("constraint families") {
  const auto affine = ConstraintSpec::affine(Vector::Zero(2), Matrix::Identity(2, 2), 1.0, Vector::Zero(2));
  CHECK(affine(vec({0, 0}), vec({0.3, 0.8})) == doctest::Approx(-1.0));
  const auto norm = ConstraintSpec::norm_offset(1.0);
  CHECK(norm(vec({0.5, 0.2}), vec({0.5, 0.2})) == doctest::Approx(-1.0));
  const auto cex = ConstraintSpec::counterexample();
  CHECK(cex(vec({0, 0, 0}), vec({0})) == doctest::Approx(0.0));
  // At (0, 0, 1) the affine branch is −2 and the cone branch −1.
  CHECK(cex(vec({0, 0, 1}), vec({0})) == doctest::Approx(-1.0));

  const auto prob = affine_uniform_problem();
  CHECK_THROWS_AS(evaluate_constraint(prob, vec({0, 0, 0}), vec({0, 0})), DimensionError);
  const ProblemInstance nan_prob(AdmissibleSet::box(vec({-1}), vec({1})),
                                 UncertaintySpace::uniform_box(vec({0}), vec({1})),
                                 ConstraintSpec::custom([](const Vector&, const Vector&) { return std::nan(""); }),
                                 nullptr);
  CHECK_THROWS_AS(evaluate_constraint(nan_prob, vec({0}), vec({0.5})), NumericalError);
}

TEST_CASE("constraint families are convex along random segments") {
  CounterRng rng(11);
  const auto affine = ConstraintSpec::affine(vec({0.2, -0.4}), Matrix::Random(2, 2), 0.5, vec({0.1, 0.3}));
  const auto norm = ConstraintSpec::norm_offset(0.7);
  for (int trial = 0; trial < 500; ++trial) {
    Vector x(2), y(2), d(2);
    for (int i = 0; i < 2; ++i) {
      x(i) = rng.uniform(-3, 3);
      y(i) = rng.uniform(-3, 3);
      d(i) = rng.uniform(-1, 1);
    }
    const double t = rng.uniform();
    const Vector mid = (1 - t) * x + t * y;
    for (const auto* g : {&affine, &norm}) {
      CHECK((*g)(mid, d) <= (1 - t) * (*g)(x, d) + t * (*g)(y, d) + 1e-12);
    }
  }
}

TEST_CASE("lift_separable") {
  const auto core = affine_uniform_problem();
  const auto zero = [](const Vector&) { return 0.0; };
  const auto lifted = lift_separable(core, zero, zero, [](const Vector&) { return -1.0; }, -1.0, 1.0);
  CHECK(lifted.decision_dim() == 3);
  CHECK(lifted.constraint(vec({0.3, 0.2, 0.0}), vec({0.5, 0.5})) ==
        doctest::Approx(core.constraint(vec({0.3, 0.2}), vec({0.5, 0.5}))));
  CHECK(std::isinf(lifted.objective(vec({0.3, 0.2, 0.5}))));
  CHECK(lifted.objective(vec({0.3, 0.2, 0.0})) == 0.0);

  const auto f = [](const Vector& x) { return x(0) * x(0); };
  const auto phi = [](const Vector& d) { return d(0); };
  const auto lifted2 = lift_separable(core, f, phi, [](const Vector&) { return -1.0; }, -2.0, 2.0);
  const Vector x = vec({0.6, -0.3});
  const Vector d = vec({0.25, 0.75});
  CHECK(lifted2.constraint(vec({0.6, -0.3, 0.36}), d) ==
        doctest::Approx(core.constraint(x, d) + 0.36 * 0.25));

  // Violation at (x, f(x)) under the lift equals the violation of x under
  // g + f·φ, estimated on the same draws.
  const ProblemInstance direct(core.admissible, core.uncertainty,
                               ConstraintSpec::custom([&](const Vector& xx, const Vector& dd) {
                                 return core.constraint(xx, dd) + f(xx) * phi(dd);
                               }),
                               nullptr);
  const auto a = validation::estimate_point_violation(lifted2, vec({0.6, -0.3, 0.36}), 20000, 5);
  const auto b = validation::estimate_point_violation(direct, x, 20000, 5);
  CHECK(a.violations == b.violations);
}

TEST_CASE("counterexample samples") {
  const auto s5 = counterexample_samples(5);
  REQUIRE(s5.size() == 5);
  CHECK(s5[0](0) == 0.0);
  for (int i = 0; i < 5; ++i) CHECK(s5[static_cast<std::size_t>(i)](0) == doctest::Approx(2 * std::numbers::pi * i / 5));
  const auto s8 = counterexample_samples(8);
  CHECK(s8.size() == 8);
  CHECK(s8[0](0) == 0.0);
  CHECK_THROWS_AS(counterexample_samples(4), DomainError);
}

TEST_CASE("counterexample closed form") {
  const auto p5 = counterexample_optimum(5);
  CHECK(p5.x == doctest::Approx(0.4472135955).epsilon(1e-9));
  CHECK(p5.y == doctest::Approx(0.324919696233).epsilon(1e-9));
  CHECK(p5.z == doctest::Approx(-0.5527864045).epsilon(1e-9));
  for (int N : {5, 6, 9, 12, 100}) {
    const auto p = counterexample_optimum(N);
    CHECK(p.z == p.x - 1.0);
  }
  const auto big = counterexample_optimum(1'000'000);
  CHECK(std::abs(big.x - 0.5) < 1e-6);
  CHECK(std::abs(big.z + 0.5) < 1e-6);
  const auto p6 = counterexample_optimum(6);
  CHECK(p6.x == doctest::Approx(0.464101615138).epsilon(1e-9));
  CHECK(p6.y == doctest::Approx(0.267949192431).epsilon(1e-9));
}

TEST_CASE("counterexample grid oracle and support constraints") {
  const auto rep = verify_support_constraints(5, 400);
  CHECK(rep.all_support);
  CHECK(std::abs(rep.full_value - rep.closed_form_value) < 1e-3);
  // Removing sample 2 leaves a gap of 2θ, whose optimum is −0.7639320225.
  CHECK(std::abs(rep.removal_values[1] + 0.7639320225) < 1e-3);
  CHECK(counterexample_point_for_gap(4 * std::numbers::pi / 5).z == doctest::Approx(-0.7639320225).epsilon(1e-9));

  const auto s = counterexample_samples(6);
  std::vector<double> angles;
  for (const auto& d : s.draws) angles.push_back(d(0));
  const auto grid = counterexample_grid_optimum(angles, 400);
  CHECK(std::abs(grid.value - counterexample_optimum(6).z) < 1e-3);
  CHECK(grid.error_bound > 0.0);
  CHECK_THROWS_AS(verify_support_constraints(5, 10), DomainError);
}

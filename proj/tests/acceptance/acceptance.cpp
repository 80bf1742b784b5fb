// Copyright 2026 The scenario-hull Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance suite: one PASS/FAIL line per criterion, exit status 0 only if
// every selected criterion passes.  CSV artifacts of the determinism runs are
// written to --out.

#include "scenario_hull/certificates.hpp"
#include "scenario_hull/cli.hpp"
#include "scenario_hull/counterexample.hpp"
#include "scenario_hull/problems.hpp"
#include "scenario_hull/rng.hpp"
#include "scenario_hull/scenario_engine.hpp"
#include "scenario_hull/validation.hpp"

#include "oracles/affine_uniform.hpp"
#include "oracles/exact_tail.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <set>
#include <sstream>
#include <string>

using namespace scenario_hull;
using problems::AdmissibleSet;
using problems::ConstraintSpec;
using problems::ProblemInstance;
using problems::UncertaintySpace;

namespace {

constexpr std::uint64_t kSeed = 2026;

struct Outcome {
  bool passed = false;
  std::string detail;
};

struct Settings {
  std::size_t threads_a = 1;
  std::size_t threads_b = 4;
  std::string out_dir = "acceptance_out";
};

// CSV bytes of the runs reused by the determinism criterion.
struct Artifacts {
  std::string c4_a, c4_b;
  std::string c5_a, c5_b;
  std::string c8_a, c8_b;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

void save(const Settings& s, const std::string& name, const std::string& text) {
  std::filesystem::create_directories(s.out_dir);
  std::ofstream(std::filesystem::path(s.out_dir) / name, std::ios::binary) << text;
}

std::string report_csv(const cli::Report& r) {
  std::string all;
  for (const auto& t : r.tables) all += cli::to_csv(r, t);
  return all;
}

ProblemInstance random_affine_problem(CounterRng& rng) {
  Vector a0(2), b(2);
  Matrix A(2, 2);
  for (int i = 0; i < 2; ++i) {
    a0(i) = rng.uniform(-0.5, 0.5);
    b(i) = rng.uniform(-0.2, 0.2);
    for (int j = 0; j < 2; ++j) A(i, j) = rng.uniform(-1.0, 1.0);
  }
  // b0 ≥ 0.5 keeps the origin strictly feasible for every δ ∈ [0,1]².
  const double b0 = rng.uniform(0.5, 1.5);
  return ProblemInstance(AdmissibleSet::box(Vector::Constant(2, -2.0), Vector::Constant(2, 2.0)),
                         UncertaintySpace::uniform_box(Vector::Zero(2), Vector::Ones(2)),
                         ConstraintSpec::affine(a0, A, b0, b), nullptr);
}

// 1. Log-domain Φ against exact rational summation.
Outcome tail_oracle() {
  double worst = 0.0;
  std::size_t cases = 0;
  for (int N = 1; N <= 60; ++N) {
    for (int zeta = 1; zeta <= 10; ++zeta) {
      for (int p = 1; p <= 99; ++p) {
        const double exact = oracle::exact_binomial_tail(p, zeta, N);
        const double got = certificates::binomial_tail(p / 100.0, zeta, N).value;
        worst = std::max(worst, std::abs(got - exact) / exact);
        ++cases;
      }
    }
  }
  return {worst <= 1e-10, std::to_string(cases) + " cases, max relative error " + fmt("%.3g", worst)};
}

// 2. Closed-form sample sizes and their implicit-bound checks.
Outcome sample_sizes() {
  const auto hull = certificates::hull_sample_size(0.1, 0.1, 2, 8, 1);
  const auto single = certificates::sample_size_single(0.05, 0.01, 3);
  const double hull_check = certificates::hull_bound(0.1, 2, 8, 1, hull).value;
  const double single_check = certificates::binomial_tail(0.05, 3, single).value;
  const bool ok = hull == 208 && single == 209 && hull_check <= 0.1 && single_check <= 0.01;
  return {ok, "hull_sample_size=" + std::to_string(hull) + " (bound " + fmt("%.3g", hull_check) +
                  "), sample_size_single=" + std::to_string(single) + " (tail " + fmt("%.3g", single_check) + ")"};
}

// 3. Counterexample: grid optimum vs closed form, every sample a support constraint.
Outcome counterexample() {
  double worst = 0.0;
  bool all_support = true;
  for (int N = 5; N <= 12; ++N) {
    const auto rep = problems::verify_support_constraints(N, 800);
    worst = std::max(worst, std::abs(rep.full_value - rep.closed_form_value));
    all_support = all_support && rep.all_support;
  }
  return {worst <= 1e-3 && all_support, "N=5..12 at 800^2, max |grid - closed form| " + fmt("%.3g", worst) +
                                            (all_support ? ", all constraints support" : ", support check FAILED")};
}

// 4. Random hull members satisfy every sampled constraint.
std::string hull_feasibility_csv(std::size_t threads, std::size_t& failures, double& worst) {
  cli::Report report;
  report.command = "acceptance_hull_feasibility";
  report.config_hash = cli::fnv1a64_hex("criterion-4 problems=100 members=100 eps=0.1 beta=0.1 M=8");
  report.master_seed = kSeed;
  cli::Table t{"members", {"problem", "N", "vertices", "members", "max_residual", "passed"}, {}};
  const auto N = certificates::hull_sample_size(0.1, 0.1, 2, 8, 1);
  const auto dirs = engine::default_directions(2, 8);
  failures = 0;
  worst = -INFINITY;
  for (std::uint64_t p = 0; p < 100; ++p) {
    CounterRng gen(derive_key(kSeed, p), 0);
    const auto prob = random_affine_problem(gen);
    const auto sample = problems::draw_multisample(prob.uncertainty, static_cast<std::size_t>(N),
                                                   derive_key(kSeed, p), stream_id(StreamDomain::kScenario, 0));
    engine::HullBuildOptions opts;
    opts.threads = threads;
    const auto hull = engine::build_hull(prob, sample, Vector::Zero(2), dirs, opts);
    const Matrix P = hull.points();
    double max_res = -INFINITY;
    for (Eigen::Index v = 0; v < P.cols(); ++v) {
      for (const auto& d : sample.draws) max_res = std::max(max_res, problems::evaluate_constraint(prob, P.col(v), d));
    }
    for (int k = 0; k < 100; ++k) {
      Vector w(P.cols());
      for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = gen.exponential();
      const Vector x = P * (w / w.sum());
      for (const auto& d : sample.draws) max_res = std::max(max_res, problems::evaluate_constraint(prob, x, d));
    }
    const bool ok = max_res <= 1e-7;
    failures += ok ? 0 : 1;
    worst = std::max(worst, max_res);
    t.add({static_cast<std::int64_t>(p), N, static_cast<std::int64_t>(hull.vertices.size()), std::int64_t{100},
           max_res, std::int64_t{ok}});
  }
  return cli::to_csv(report, t);
}

Outcome hull_feasibility(const Settings& s, Artifacts& art) {
  std::size_t failures = 0;
  double worst = 0.0;
  art.c4_a = hull_feasibility_csv(s.threads_a, failures, worst);
  save(s, "c4_threads_a.csv", art.c4_a);
  return {failures == 0, "100 problems x (vertices + 100 members), N=208, max residual " + fmt("%.3g", worst) + ", " +
                             std::to_string(failures) + " failing problems"};
}

// 5. End-to-end (ε, β) trials through the CLI pipeline.
const char* kTrialConfig = R"({
  "command": "validate",
  "master_seed": 2026,
  "validate": {
    "problem": {
      "admissible": {"kind": "box", "lower": [-1, -1], "upper": [1, 1]},
      "uncertainty": {"kind": "uniform_box", "lower": [0, 0], "upper": [1, 1]},
      "constraint": {"family": "affine", "a0": [0, 0], "a_matrix": [[1, 0], [0, 1]], "b0": 1, "b_vector": [0, 0]}
    },
    "mode": "trials",
    "epsilon": 0.1,
    "beta": 0.1,
    "directions": 8,
    "trials": 200,
    "n_probe": 20,
    "K_mc": 20000
  }
})";

std::string summary_value(const cli::Report& r, const std::string& quantity) {
  for (const auto& row : r.table("summary").rows) {
    if (std::get<std::string>(row[0]) != quantity) continue;
    if (const auto* i = std::get_if<std::int64_t>(&row[1])) return std::to_string(*i);
    if (const auto* d = std::get_if<double>(&row[1])) return cli::format_real(*d);
    return std::get<std::string>(row[1]);
  }
  return "?";
}

Outcome trials(const Settings& s, Artifacts& art) {
  cli::RunOptions opts;
  opts.threads = s.threads_a;
  const auto r = cli::run_command(kTrialConfig, opts);
  art.c5_a = report_csv(r);
  save(s, "c5_threads_a.csv", art.c5_a);
  const double frac = std::stod(summary_value(r, "failure_fraction"));
  return {frac <= 0.1, "T=200, N=" + summary_value(r, "N") + ", failures " + summary_value(r, "failures") +
                           ", failure fraction " + fmt("%.3g", frac) + " (limit 0.1)"};
}

// 6. Inflation: hulls of points on the analytic ε level set.
Outcome inflation() {
  const ProblemInstance prob(AdmissibleSet::box(Vector::Constant(2, -4.0), Vector::Constant(2, 4.0)),
                             UncertaintySpace::uniform_box(Vector::Zero(2), Vector::Ones(2)),
                             ConstraintSpec::affine(Vector::Zero(2), Matrix::Identity(2, 2), 1.0, Vector::Zero(2)),
                             nullptr);
  std::size_t bad = 0, precondition_misses = 0, probes = 0;
  double worst_ratio = 0.0;
  for (std::uint64_t inst = 0; inst < 50; ++inst) {
    CounterRng gen(derive_key(kSeed, 600 + inst), 0);
    const double eps = gen.uniform(0.05, 0.25);
    const int count = 2 + static_cast<int>(gen.uniform() * 5.0);
    std::vector<Vector> points;
    for (int k = 0; k < count; ++k) {
      // Directions with a positive component reach the level set.
      const double angle = gen.uniform(-0.4, std::numbers::pi / 2 + 0.4);
      const double t = oracle::level_set_scale(std::cos(angle), std::sin(angle), eps);
      Vector x(2);
      x << t * std::cos(angle), t * std::sin(angle);
      points.push_back(x);
    }
    const auto rep = validation::convex_hull_inflation_check(prob, points, eps, {20, 20000, 0},
                                                             derive_key(kSeed, 700 + inst));
    precondition_misses += rep.precondition_failures.size();
    for (const auto& e : rep.hull.probes) {
      ++probes;
      if (e.ci_low > rep.bound) ++bad;
      worst_ratio = std::max(worst_ratio, e.estimate / rep.bound);
    }
  }
  return {bad == 0, std::to_string(probes) + " probes over 50 instances, " + std::to_string(bad) +
                        " with ci_low above (n+1)eps, max estimate/bound " + fmt("%.3g", worst_ratio) +
                        " (Monte Carlo precondition misses on exact level-set points: " +
                        std::to_string(precondition_misses) + ")"};
}

// 7. Discarding: monotone λ⋆ and the r = 0 identity.
Outcome discarding() {
  std::size_t decreases = 0, programs = 0;
  for (std::uint64_t p = 0; p < 50; ++p) {
    CounterRng gen(derive_key(kSeed, 900 + p), 0);
    const auto prob = random_affine_problem(gen);
    const auto sample = problems::draw_multisample(prob.uncertainty, 100, derive_key(kSeed, 900 + p),
                                                   stream_id(StreamDomain::kScenario, 0));
    const double angle = gen.uniform(0.0, 2.0 * std::numbers::pi);
    Vector dir(2);
    dir << std::cos(angle), std::sin(angle);
    const auto spec = engine::make_line_program(prob, sample, Vector::Zero(2), dir);
    const auto res = engine::greedy_discard(spec, 5);
    if (!res.lambda || res.lambda_path.size() != 6) {
      ++decreases;
      continue;
    }
    ++programs;
    for (std::size_t r = 1; r < res.lambda_path.size(); ++r) {
      if (res.lambda_path[r] < res.lambda_path[r - 1]) ++decreases;
    }
  }
  double identity_gap = 0.0;
  for (int N = 1; N <= 200; N += 7) {
    for (int zeta = 1; zeta <= 6; ++zeta) {
      for (double eps : {0.01, 0.05, 0.1, 0.3, 0.7}) {
        const double a = certificates::discarding_bound(eps, zeta, 0, N).value;
        const double b = certificates::binomial_tail(eps, zeta, N).value;
        if (a != b) identity_gap = std::max(identity_gap, std::abs(a - b) / std::max(b, 1e-300));
      }
    }
  }
  return {decreases == 0 && identity_gap == 0.0,
          std::to_string(programs) + " programs with r=0..5, " + std::to_string(decreases) +
              " decreases; discarding_bound(r=0) vs Phi max relative gap " + fmt("%.3g", identity_gap)};
}

// 8. Closed-loop MPC violation rate.
const char* kMpcConfig = R"({"command": "mpc", "master_seed": 2026, "mpc": {"steps": 5000}})";

Outcome mpc_rate(const Settings& s, Artifacts& art) {
  cli::RunOptions opts;
  opts.threads = s.threads_a;
  const auto r = cli::run_command(kMpcConfig, opts);
  art.c8_a = report_csv(r);
  save(s, "c8_threads_a.csv", art.c8_a);
  const double rate = std::stod(summary_value(r, "violation_rate"));
  const double limit = 0.1 + 3.0 * std::sqrt(0.1 * 0.9 / 5000.0);
  return {rate <= limit, "T=5000, N=" + summary_value(r, "first_stage_samples") + ", rate " + fmt("%.4g", rate) +
                             " (limit " + fmt("%.4g", limit) + "), infeasibility events " +
                             summary_value(r, "infeasibility_events")};
}

// 9. Byte-identical CSV across thread counts.
Outcome determinism(const Settings& s, Artifacts& art) {
  std::size_t f = 0;
  double w = 0.0;
  art.c4_b = hull_feasibility_csv(s.threads_b, f, w);
  cli::RunOptions opts;
  opts.threads = s.threads_b;
  art.c5_b = report_csv(cli::run_command(kTrialConfig, opts));
  art.c8_b = report_csv(cli::run_command(kMpcConfig, opts));
  save(s, "c4_threads_b.csv", art.c4_b);
  save(s, "c5_threads_b.csv", art.c5_b);
  save(s, "c8_threads_b.csv", art.c8_b);
  const bool same4 = !art.c4_a.empty() && art.c4_a == art.c4_b;
  const bool same5 = !art.c5_a.empty() && art.c5_a == art.c5_b;
  const bool same8 = !art.c8_a.empty() && art.c8_a == art.c8_b;
  auto word = [](bool b) { return b ? "identical" : "DIFFER"; };
  return {same4 && same5 && same8, "threads " + std::to_string(s.threads_a) + " vs " + std::to_string(s.threads_b) +
                                       ": c4 " + word(same4) + ", c5 " + word(same5) + ", c8 " + word(same8)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"scenario-hull acceptance suite"};
  Settings settings;
  std::vector<int> only;
  app.add_option("--threads-a", settings.threads_a, "thread count of the reference runs");
  app.add_option("--threads-b", settings.threads_b, "thread count of the determinism re-runs");
  app.add_option("--out", settings.out_dir, "directory for CSV artifacts");
  app.add_option("--only", only, "criteria to run (default: all)")->delimiter(',');
  CLI11_PARSE(app, argc, argv);

  // Criterion 9 needs the reference runs of 4, 5 and 8.
  std::set<int> selected(only.begin(), only.end());
  if (selected.empty()) selected = {1, 2, 3, 4, 5, 6, 7, 8, 9};
  if (selected.count(9)) selected.insert({4, 5, 8});

  Artifacts art;
  struct Criterion {
    int id;
    std::string name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "tail-bound oracle equivalence", 10, [] { return tail_oracle(); }},
      {2, "closed-form sample sizes", 1, [] { return sample_sizes(); }},
      {3, "counterexample support constraints", 60, [] { return counterexample(); }},
      {4, "hull feasibility invariant", 60, [&] { return hull_feasibility(settings, art); }},
      {5, "end-to-end (eps, beta) guarantee", 600, [&] { return trials(settings, art); }},
      {6, "hull inflation check", 300, [] { return inflation(); }},
      {7, "sampling and discarding", 30, [] { return discarding(); }},
      {8, "MPC closed-loop violation rate", 600, [&] { return mpc_rate(settings, art); }},
      {9, "determinism across thread counts", 1260, [&] { return determinism(settings, art); }},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    if (!selected.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs <= c.budget_s;
    const bool pass = out.passed && in_time;
    failed += pass ? 0 : 1;
    std::cout << (pass ? "[PASS] " : "[FAIL] ") << c.id << ". " << c.name << ": " << out.detail << " ("
              << fmt("%.2f", secs) << " s, budget " << fmt("%.0f", c.budget_s) << " s"
              << (in_time ? "" : ", OVER BUDGET") << ")" << std::endl;
  }
  std::cout << (failed == 0 ? "acceptance: all selected criteria passed" : "acceptance: " + std::to_string(failed) + " criteria failed")
            << std::endl;
  return failed == 0 ? 0 : 1;
}

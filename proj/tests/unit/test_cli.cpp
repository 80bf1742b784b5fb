// Copyright 2026 The scenario-hull Authors
// SPDX-License-Identifier: Apache-2.0

#include "scenario_hull/certificates.hpp"
#include "scenario_hull/cli.hpp"
#include "scenario_hull/problems.hpp"
#include "scenario_hull/rng.hpp"
#include "scenario_hull/scenario_engine.hpp"

#include <doctest.h>

#include <string>

using namespace scenario_hull;
using namespace scenario_hull::cli;

namespace {

const char* kProblem = R"("problem": {
  "admissible": {"kind": "box", "lower": [-1, -1], "upper": [1, 1]},
  "uncertainty": {"kind": "uniform_box", "lower": [0, 0], "upper": [1, 1]},
  "constraint": {"family": "affine", "a0": [0, 0], "a_matrix": [[1, 0], [0, 1]], "b0": 1, "b_vector": [0, 0]},
  "objective": {"kind": "linear", "c": [-1, -1]}
})";

std::string config(const std::string& command, const std::string& body, int seed = 3) {
  return R"({"command": ")" + command + R"(", "master_seed": )" + std::to_string(seed) + R"(, ")" + command +
         R"(": {)" + body + "}}";
}

std::string lookup(const Report& r, const std::string& table, const std::string& quantity) {
  for (const auto& row : r.table(table).rows) {
    if (std::get<std::string>(row[0]) == quantity) {
      if (const auto* i = std::get_if<std::int64_t>(&row[1])) return std::to_string(*i);
      if (const auto* d = std::get_if<double>(&row[1])) return format_real(*d);
      return std::get<std::string>(row[1]);
    }
  }
  FAIL("missing quantity " << quantity);
  return {};
}

int exit_of(const std::string& text, RunOptions opts = {}) {
  try {
    run_command(text, opts);
    return 0;
  } catch (const std::exception& e) {
    return exit_code(e);
  }
}

}  // namespace

TEST_CASE("formatting primitives") {
  CHECK(fnv1a64_hex("") == "cbf29ce484222325");
  CHECK(fnv1a64_hex("a") == "af63dc4c8601ec8c");
  CHECK(format_real(0.1) == "0.10000000000000001");
  CHECK(format_real(-2.0) == "-2");
  CHECK(format_real(1e300) == "1.0000000000000001e+300");
  CHECK(format_real(-INFINITY) == "-inf");
  CHECK(format_from_string("both") == Format::kBoth);
  CHECK_THROWS_AS(format_from_string("xml"), ConfigError);
}

TEST_CASE("certify") {
  const auto r = run_command(config("certify", R"("epsilon": 0.1, "beta": 0.1, "n": 2, "directions": 8, "helly": 1)"));
  CHECK(lookup(r, "bounds", "hull_sample_size") == "208");
  const std::string csv = to_csv(r, r.table("bounds"));
  CHECK(csv.find("\nhull_sample_size,208\n") != std::string::npos);
  CHECK(csv.rfind("# command=certify table=bounds config_hash=" + r.config_hash + " master_seed=3\n", 0) == 0);

  const auto single = run_command(config("certify", R"("epsilon": 0.05, "beta": 0.01, "n": 3, "helly": 3)"));
  CHECK(lookup(single, "bounds", "sample_size_single") == "209");
  // With one direction the hull size collapses to the classic size.
  const auto one = run_command(config("certify", R"("epsilon": 0.05, "beta": 0.01, "n": 2, "directions": 1, "helly": 1)"));
  CHECK(lookup(one, "bounds", "hull_sample_size") == lookup(one, "bounds", "sample_size_single"));
  // vc row only when ξ is supplied.
  bool has_vc = false;
  for (const auto& row : r.table("bounds").rows) has_vc = has_vc || std::get<std::string>(row[0]) == "vc_sample_size";
  CHECK_FALSE(has_vc);
}

TEST_CASE("schema errors") {
  CHECK(exit_of("{\"command\": \"certify\",") == 2);
  CHECK(exit_of(config("certify", R"("epsilon": 0.1, "gamma": 2)")) == 2);
  CHECK(exit_of(config("certify", R"("epsilon": "0.1")")) == 2);
  CHECK(exit_of(config("certify", R"("epsilon": 1.5)")) == 2);
  CHECK(exit_of(R"({"command": "plot"})") == 2);
  CHECK(exit_of(R"({"command": "certify", "extra": 1})") == 2);
  CHECK(exit_of(R"({"command": "certify", "master_seed": -1})") == 2);
  RunOptions wrong;
  wrong.command = "run";
  CHECK(exit_of(config("certify", ""), wrong) == 2);
  try {
    run_command(config("run", R"("problem": {"admissible": {"kind": "box", "lower": [0], "upper": [1], "pad": 1}})"));
    FAIL("expected a schema error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("$.run.problem.admissible.pad") != std::string::npos);
  }
  // An empty-feasible-set problem is an infeasible construction.
  const std::string infeasible = R"("problem": {
    "admissible": {"kind": "box", "lower": [-1, -1], "upper": [1, 1]},
    "uncertainty": {"kind": "uniform_box", "lower": [0, 0], "upper": [1, 1]},
    "constraint": {"family": "affine", "a0": [0, 0], "a_matrix": [[1, 0], [0, 1]], "b0": -5, "b_vector": [0, 0]}
  }, "N": 10)";
  CHECK(exit_of(config("run", infeasible)) == 3);
}

TEST_CASE("run mirrors build_hull") {
  const auto r = run_command(config("run", std::string(kProblem)));
  CHECK(lookup(r, "summary", "N") == "208");
  const auto& vt = r.table("vertices");
  REQUIRE(vt.rows.size() == 8);

  const problems::ProblemInstance prob(
      problems::AdmissibleSet::box(Vector::Constant(2, -1), Vector::Constant(2, 1)),
      problems::UncertaintySpace::uniform_box(Vector::Zero(2), Vector::Ones(2)),
      problems::ConstraintSpec::affine(Vector::Zero(2), Matrix::Identity(2, 2), 1.0, Vector::Zero(2)), nullptr);
  const auto sample = problems::draw_multisample(prob.uncertainty, 208, 3, stream_id(StreamDomain::kScenario, 0));
  const auto hull = engine::build_hull(prob, sample, Vector::Zero(2), engine::default_directions(2, 8));
  for (std::size_t k = 0; k < 8; ++k) {
    CHECK(std::get<double>(vt.rows[k][2]) == hull.vertices[k].point(0));
    CHECK(std::get<double>(vt.rows[k][3]) == hull.vertices[k].point(1));
  }
  // Maximising x₀ + x₁ lands on the diagonal vertex.
  CHECK(lookup(r, "summary", "objective_value") == format_real(-hull.vertices[1].point.sum()));

  // Seed override and thread counts.
  RunOptions other;
  other.seed = 4;
  CHECK(run_command(config("run", kProblem), other).master_seed == 4);
  RunOptions threaded;
  threaded.threads = 3;
  const auto again = run_command(config("run", kProblem), threaded);
  for (const auto& [name, text] : render(r, Format::kBoth)) {
    bool found = false;
    for (const auto& [name2, text2] : render(again, Format::kBoth)) {
      if (name2 == name) {
        found = true;
        CHECK(text2 == text);
      }
    }
    CHECK(found);
  }
}

TEST_CASE("render layout") {
  const auto r = run_command(config("run", kProblem));
  const auto csv = render(r, Format::kCsv);
  REQUIRE(csv.size() == 2);
  CHECK(csv[0].first == "run_vertices.csv");
  CHECK(csv[1].first == "run_summary.csv");
  const auto js = render(r, Format::kJson);
  REQUIRE(js.size() == 1);
  CHECK(js[0].first == "run.json");
  CHECK(js[0].second.find("\"config_hash\": \"" + r.config_hash + "\"") != std::string::npos);
  // Key order in the config does not change the hash.
  const std::string a = R"({"command": "certify", "certify": {"n": 2, "epsilon": 0.2}})";
  const std::string b = R"({"certify": {"epsilon": 0.2, "n": 2}, "command": "certify"})";
  CHECK(run_command(a).config_hash == run_command(b).config_hash);
}

TEST_CASE("validate, discard, counterexample and mpc commands") {
  const auto v = run_command(config("validate", std::string(kProblem) + R"(, "trials": 4, "K_mc": 2000, "n_probe": 10)"));
  CHECK(v.table("trials").rows.size() == 4);
  CHECK(lookup(v, "summary", "failures") == "0");

  const auto infl = run_command(config(
      "validate", std::string(kProblem) + R"(, "mode": "inflation", "epsilon": 0.3, "points": [[0.5, 0.2], [0.1, 0.6]])"));
  CHECK(lookup(infl, "summary", "passed") == "1");
  CHECK(exit_of(config("validate", std::string(kProblem) + R"(, "mode": "inflation", "trials": 3, "points": [[0, 0]])")) == 2);

  const auto d = run_command(config("discard", std::string(kProblem) + R"(, "direction": [1, 1], "N": 100, "r": 4)"));
  const auto& path = d.table("path");
  REQUIRE(path.rows.size() == 5);
  for (std::size_t k = 1; k < 5; ++k) {
    CHECK(std::get<double>(path.rows[k][1]) >= std::get<double>(path.rows[k - 1][1]) - 1e-8);
  }
  CHECK(std::get<double>(path.rows[0][3]) ==
        doctest::Approx(certificates::binomial_tail(0.1, 1, 100).value).epsilon(1e-14));

  const auto x = run_command(R"({"command": "counterexample", "counterexample": {"N": 7, "grid_resolution": 400}})");
  CHECK(x.table("optimum").rows.size() == 1);
  CHECK(x.table("removals").rows.size() == 7);
  CHECK(std::get<std::int64_t>(x.table("optimum").rows[0][8]) == 1);

  const std::string m = R"({"command": "mpc", "master_seed": 5, "mpc": {"steps": 30}})";
  RunOptions one, three;
  one.threads = 1;
  three.threads = 3;
  const auto m1 = run_command(m, one);
  const auto m3 = run_command(m, three);
  CHECK(to_csv(m1, m1.table("steps")) == to_csv(m3, m3.table("steps")));
  CHECK(lookup(m1, "summary", "certified_samples") == "179");
  CHECK(exit_of(R"({"command": "mpc", "mpc": {"steps": 3, "first_stage_samples": 10}})") == 2);
}

// Copyright 2026 The scenario-hull Authors
// SPDX-License-Identifier: Apache-2.0

#include "scenario_hull/cli.hpp"

#include "scenario_hull/certificates.hpp"
#include "scenario_hull/counterexample.hpp"
#include "scenario_hull/mpc.hpp"
#include "scenario_hull/problems.hpp"
#include "scenario_hull/rng.hpp"
#include "scenario_hull/scenario_engine.hpp"
#include "scenario_hull/validation.hpp"

#include <json.hpp>

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace scenario_hull::cli {

namespace {

using json = nlohmann::json;
using certificates::SampleCount;
using problems::AdmissibleSet;
using problems::ConstraintSpec;
using problems::ProblemInstance;
using problems::UncertaintySpace;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError(path + ": " + what);
}

double as_real(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

std::int64_t as_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<std::int64_t>();
}

std::uint64_t as_u64(const json& j, const std::string& path) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer() && j.get<std::int64_t>() >= 0) return j.get<std::uint64_t>();
  fail(path, "expected a non-negative integer");
}

std::size_t as_count(const json& j, const std::string& path) {
  const auto v = as_int(j, path);
  if (v < 0) fail(path, "expected a non-negative integer");
  return static_cast<std::size_t>(v);
}

Vector as_vector(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) fail(path, "expected a non-empty array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = as_real(j[i], path + "[" + std::to_string(i) + "]");
  }
  return v;
}

std::vector<Vector> as_vector_list(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) fail(path, "expected a non-empty array of arrays");
  std::vector<Vector> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_vector(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

Matrix as_matrix(const json& j, const std::string& path) {
  const auto rows = as_vector_list(j, path);
  Matrix m(static_cast<Eigen::Index>(rows.size()), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != m.cols()) fail(path + "[" + std::to_string(r) + "]", "ragged matrix row");
    m.row(static_cast<Eigen::Index>(r)) = rows[r].transpose();
  }
  return m;
}

// Object reader that remembers which keys were consumed so that finish()
// can reject the rest.
class Obj {
 public:
  Obj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_, "expected an object");
  }

  std::string at(const std::string& key) const { return path_ + "." + key; }

  const json* find(const std::string& key) {
    used_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  const json& need(const std::string& key) {
    const json* p = find(key);
    if (p == nullptr) fail(at(key), "missing required field");
    return *p;
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  double real(const std::string& key) { return as_real(need(key), at(key)); }
  double real(const std::string& key, double fallback) {
    const json* p = find(key);
    return p ? as_real(*p, at(key)) : fallback;
  }
  std::int64_t integer(const std::string& key) { return as_int(need(key), at(key)); }
  std::int64_t integer(const std::string& key, std::int64_t fallback) {
    const json* p = find(key);
    return p ? as_int(*p, at(key)) : fallback;
  }
  std::optional<std::int64_t> maybe_integer(const std::string& key) {
    const json* p = find(key);
    if (p == nullptr) return std::nullopt;
    return as_int(*p, at(key));
  }
  std::size_t count(const std::string& key, std::size_t fallback) {
    const json* p = find(key);
    return p ? as_count(*p, at(key)) : fallback;
  }
  bool flag(const std::string& key, bool fallback) {
    const json* p = find(key);
    if (p == nullptr) return fallback;
    if (!p->is_boolean()) fail(at(key), "expected true or false");
    return p->get<bool>();
  }
  std::string text(const std::string& key) {
    const json& p = need(key);
    if (!p.is_string()) fail(at(key), "expected a string");
    return p.get<std::string>();
  }
  std::string text(const std::string& key, const std::string& fallback) {
    if (has(key)) return text(key);
    used_.insert(key);
    return fallback;
  }
  Vector vector(const std::string& key) { return as_vector(need(key), at(key)); }
  std::optional<Vector> maybe_vector(const std::string& key) {
    const json* p = find(key);
    if (p == nullptr) return std::nullopt;
    return as_vector(*p, at(key));
  }
  Matrix matrix(const std::string& key) { return as_matrix(need(key), at(key)); }
  Obj object(const std::string& key) { return Obj(need(key), at(key)); }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (used_.count(item.key()) == 0) fail(at(item.key()), "unknown key");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

// Rethrows library domain errors with the config path that caused them.
template <typename F>
auto at_path(const std::string& path, F&& build) {
  try {
    return build();
  } catch (const DomainError& e) {
    fail(path, e.what());
  }
}

AdmissibleSet parse_admissible(Obj o) {
  const std::string kind = o.text("kind");
  const std::string path = o.at("kind");
  if (kind == "box") {
    Vector lo = o.vector("lower"), hi = o.vector("upper");
    o.finish();
    return at_path(path, [&] { return AdmissibleSet::box(lo, hi); });
  }
  if (kind == "ball") {
    Vector c = o.vector("center");
    const double r = o.real("radius");
    o.finish();
    return at_path(path, [&] { return AdmissibleSet::ball(c, r); });
  }
  if (kind == "polytope") {
    Matrix A = o.matrix("A");
    Vector b = o.vector("b"), lo = o.vector("lower"), hi = o.vector("upper");
    o.finish();
    return at_path(path, [&] { return AdmissibleSet::polytope(A, b, lo, hi); });
  }
  fail(path, "unknown admissible kind '" + kind + "' (box, ball, polytope)");
}

UncertaintySpace parse_uncertainty(Obj o) {
  const std::string kind = o.text("kind");
  const std::string path = o.at("kind");
  if (kind == "uniform_box") {
    Vector lo = o.vector("lower"), hi = o.vector("upper");
    o.finish();
    return at_path(path, [&] { return UncertaintySpace::uniform_box(lo, hi); });
  }
  if (kind == "gaussian") {
    Vector mean = o.vector("mean"), sd = o.vector("stddev");
    o.finish();
    return at_path(path, [&] { return UncertaintySpace::gaussian(mean, sd); });
  }
  if (kind == "finite_support") {
    auto atoms = as_vector_list(o.need("atoms"), o.at("atoms"));
    std::vector<double> weights;
    if (const json* w = o.find("weights")) {
      const Vector wv = as_vector(*w, o.at("weights"));
      weights.assign(wv.data(), wv.data() + wv.size());
    }
    o.finish();
    return at_path(path, [&] { return UncertaintySpace::finite_support(atoms, weights); });
  }
  if (kind == "circle_equispaced") {
    const auto count = o.integer("count");
    const double jitter = o.real("jitter", 0.0);
    o.finish();
    return at_path(path, [&] { return UncertaintySpace::circle_equispaced(static_cast<int>(count), jitter); });
  }
  fail(path, "unknown uncertainty kind '" + kind + "' (uniform_box, gaussian, finite_support, circle_equispaced)");
}

ConstraintSpec parse_constraint(Obj o) {
  const std::string family = o.text("family");
  const std::string path = o.at("family");
  if (family == "affine") {
    Vector a0 = o.vector("a0");
    Matrix A = o.matrix("a_matrix");
    const double b0 = o.real("b0");
    Vector b = o.vector("b_vector");
    o.finish();
    return at_path(path, [&] { return ConstraintSpec::affine(a0, A, b0, b); });
  }
  if (family == "norm_offset") {
    const double rho = o.real("rho");
    o.finish();
    return at_path(path, [&] { return ConstraintSpec::norm_offset(rho); });
  }
  if (family == "counterexample") {
    o.finish();
    return ConstraintSpec::counterexample();
  }
  fail(path, "unknown constraint family '" + family + "' (affine, norm_offset, counterexample)");
}

problems::Objective parse_objective(Obj o, Eigen::Index n) {
  const std::string kind = o.text("kind");
  if (kind == "linear") {
    const Vector c = o.vector("c");
    if (c.size() != n) fail(o.at("c"), "expected " + std::to_string(n) + " entries");
    o.finish();
    return [c](const Vector& x) { return c.dot(x); };
  }
  if (kind == "distance_squared") {
    const Vector t = o.vector("target");
    if (t.size() != n) fail(o.at("target"), "expected " + std::to_string(n) + " entries");
    o.finish();
    return [t](const Vector& x) { return (x - t).squaredNorm(); };
  }
  if (kind == "neg_norm_squared") {
    o.finish();
    return [](const Vector& x) { return -x.squaredNorm(); };
  }
  fail(o.at("kind"), "unknown objective kind '" + kind + "' (linear, distance_squared, neg_norm_squared)");
}

ProblemInstance parse_problem(Obj o) {
  auto admissible = parse_admissible(o.object("admissible"));
  auto uncertainty = parse_uncertainty(o.object("uncertainty"));
  auto constraint = parse_constraint(o.object("constraint"));
  problems::Objective objective;
  if (o.has("objective")) objective = parse_objective(o.object("objective"), admissible.dim());
  o.finish();
  return at_path(o.at("constraint"), [&] {
    return ProblemInstance(std::move(admissible), std::move(uncertainty), std::move(constraint), objective);
  });
}

std::vector<Vector> parse_directions(Obj& o, Eigen::Index n, std::size_t default_count) {
  if (o.has("direction_vectors")) {
    if (o.has("directions")) fail(o.at("directions"), "give either directions or direction_vectors");
    auto dirs = as_vector_list(o.need("direction_vectors"), o.at("direction_vectors"));
    for (std::size_t k = 0; k < dirs.size(); ++k) {
      const std::string p = o.at("direction_vectors") + "[" + std::to_string(k) + "]";
      if (dirs[k].size() != n) fail(p, "expected " + std::to_string(n) + " entries");
      if (!(dirs[k].norm() > 0.0)) fail(p, "direction must be nonzero");
    }
    return dirs;
  }
  const std::size_t M = o.count("directions", default_count);
  if (M < 1) fail(o.at("directions"), "need at least one direction");
  return engine::default_directions(n, M);
}

Vector parse_anchor(Obj& o, const AdmissibleSet& admissible) {
  auto anchor = o.maybe_vector("anchor");
  if (!anchor) return admissible.center();
  if (anchor->size() != admissible.dim()) fail(o.at("anchor"), "dimension does not match the admissible set");
  return *anchor;
}

void add_point_columns(std::vector<std::string>& columns, const std::string& prefix, Eigen::Index n) {
  for (Eigen::Index i = 0; i < n; ++i) columns.push_back(prefix + std::to_string(i));
}

void append_point(std::vector<Cell>& row, const Vector& x) {
  for (Eigen::Index i = 0; i < x.size(); ++i) row.emplace_back(x(i));
}

std::int64_t i64(std::size_t v) { return static_cast<std::int64_t>(v); }

// ---------------------------------------------------------------- certify

void cmd_certify(Obj o, Report& report) {
  certificates::CertificateQuery q;
  q.epsilon = o.real("epsilon", q.epsilon);
  q.beta = o.real("beta", q.beta);
  q.n = o.integer("n", q.n);
  q.m = o.integer("m", q.m);
  q.directions = o.integer("directions", q.directions);
  q.modes = o.integer("modes", q.modes);
  q.helly = o.integer("helly", q.helly);
  q.removals = o.integer("removals", q.removals);
  q.vc_dimension = o.maybe_integer("vc_dimension");
  o.finish();
  at_path("$.certify", [&] {
    q.validate();
    return 0;
  });

  using namespace certificates;
  Table t{"bounds", {"quantity", "value"}, {}};
  const double eps = q.epsilon, beta = q.beta;

  const SampleCount single = sample_size_single(eps, beta, q.helly);
  t.add({std::string("sample_size_single"), single});
  t.add({std::string("sample_size_single_tail"), binomial_tail(eps, q.helly, single).value});
  t.add({std::string("classic_implicit_sample_size"),
         invert_min_N([&](SampleCount N) { return binomial_tail(eps, q.helly, N).value; }, beta, single)});
  if (q.vc_dimension) t.add({std::string("vc_sample_size"), vc_sample_size(eps, beta, *q.vc_dimension)});

  const SampleCount hull = hull_sample_size(eps, beta, q.n, q.directions, q.helly);
  t.add({std::string("hull_sample_size"), hull});
  t.add({std::string("hull_bound_at_sample_size"), hull_bound(eps, q.n, q.directions, q.helly, hull).value});
  t.add({std::string("hull_alt_bound_at_sample_size"), hull_bound_alt(eps, q.n, q.directions, q.helly, hull).value});
  t.add({std::string("hull_implicit_sample_size"),
         invert_min_N([&](SampleCount N) { return best_hull_bound(eps, q.n, q.directions, q.helly, N).value; },
                      beta, hull)});

  const SampleCount mixed = mixed_integer_sample_size(eps, beta, q.n, q.directions, q.modes, q.helly);
  t.add({std::string("mixed_integer_sample_size"), mixed});
  t.add({std::string("mixed_integer_bound_at_sample_size"),
         mixed_integer_bound(eps, q.n, q.directions, q.modes, q.helly, mixed).value});

  const auto r = q.removals;
  t.add({std::string("discarding_sample_size"), invert_min_N(
                                                    [&](SampleCount N) {
                                                      return N <= r ? 1.0 : discarding_bound(eps, q.helly, r, N).value;
                                                    },
                                                    beta, single)});
  t.add({std::string("hull_discarding_sample_size"),
         invert_min_N(
             [&](SampleCount N) {
               return N <= r ? 1.0 : hull_discarding_bound(eps, q.n, q.directions, q.helly, r, N).value;
             },
             beta, hull)});

  const SampleCount mpc = mpc_sample_size(eps, beta, q.m, q.directions);
  t.add({std::string("mpc_sample_size"), mpc});
  t.add({std::string("mpc_bound_at_sample_size"), mpc_bound(eps, q.m, q.directions, mpc).value});
  const SampleCount admissible = admissible_mpc_sample_size(eps, q.m, q.directions);
  t.add({std::string("admissible_mpc_sample_size"), admissible});
  t.add({std::string("admissible_integral_at_sample_size"), admissible_integral(q.m, q.directions, admissible)});
  report.tables.push_back(std::move(t));
}

// -------------------------------------------------------------------- run

struct SampleQuery {
  double epsilon = 0.1;
  double beta = 0.1;
  std::int64_t helly = 1;
};

SampleQuery parse_sample_query(Obj& o) {
  SampleQuery s;
  s.epsilon = o.real("epsilon", s.epsilon);
  s.beta = o.real("beta", s.beta);
  s.helly = o.integer("helly", s.helly);
  return s;
}

certificates::CertificateQuery make_query(const SampleQuery& s, Eigen::Index n, std::size_t M) {
  certificates::CertificateQuery q;
  q.epsilon = s.epsilon;
  q.beta = s.beta;
  q.n = n;
  q.directions = i64(M);
  q.helly = s.helly;
  at_path("$", [&] {
    q.validate();
    return 0;
  });
  return q;
}

void cmd_run(Obj o, const RunOptions& opts, Report& report) {
  const ProblemInstance problem = parse_problem(o.object("problem"));
  const Eigen::Index n = problem.decision_dim();
  const SampleQuery sq = parse_sample_query(o);
  const auto dirs = parse_directions(o, n, 8);
  const Vector anchor = parse_anchor(o, problem.admissible);
  const auto N_given = o.maybe_integer("N");
  const std::size_t budget = o.count("budget", 256);
  o.finish();

  const auto q = make_query(sq, n, dirs.size());
  const SampleCount N = N_given ? *N_given : certificates::hull_sample_size(q.epsilon, q.beta, n, q.directions, q.helly);
  if (N < 1) fail("$.run.N", "must be at least 1");
  const auto sample = problems::draw_multisample(problem.uncertainty, static_cast<std::size_t>(N),
                                                 report.master_seed, stream_id(StreamDomain::kScenario, 0));
  engine::HullBuildOptions hopts;
  hopts.threads = opts.threads;
  const auto hull = engine::build_hull(problem, sample, anchor, dirs, hopts);

  Table vt{"vertices", {"direction_index", "lambda"}, {}};
  add_point_columns(vt.columns, "x_", n);
  for (const auto& v : hull.vertices) {
    std::vector<Cell> row{i64(v.direction_index), v.lambda};
    append_point(row, v.point);
    vt.add(std::move(row));
  }

  Table st{"summary", {"quantity", "value"}, {}};
  st.add({std::string("N"), N});
  st.add({std::string("directions"), i64(dirs.size())});
  st.add({std::string("vertices"), i64(hull.vertices.size())});
  st.add({std::string("infeasible_directions"), i64(hull.infeasible_directions.size())});
  st.add({std::string("epsilon"), q.epsilon});
  st.add({std::string("beta"), q.beta});
  st.add({std::string("helly"), q.helly});
  st.add({std::string("hull_bound"), certificates::best_hull_bound(q.epsilon, n, q.directions, q.helly, N).value});
  if (problem.objective) {
    const auto opt = engine::optimize_over_hull(problem.objective, hull, budget, report.master_seed);
    st.add({std::string("objective_value"), opt.value});
    for (Eigen::Index i = 0; i < n; ++i) st.add({"point_" + std::to_string(i), opt.point(i)});
  }
  report.tables.push_back(std::move(vt));
  report.tables.push_back(std::move(st));
}

// --------------------------------------------------------------- validate

void cmd_validate(Obj o, const RunOptions& opts, Report& report) {
  const ProblemInstance problem = parse_problem(o.object("problem"));
  const Eigen::Index n = problem.decision_dim();
  const std::string mode = o.text("mode", "trials");
  validation::ProbeOptions probe;
  probe.n_probe = o.count("n_probe", probe.n_probe);
  probe.K_mc = o.integer("K_mc", probe.K_mc);
  probe.threads = opts.threads;
  if (probe.K_mc < 1) fail(o.at("K_mc"), "must be at least 1");

  if (mode == "trials") {
    const SampleQuery sq = parse_sample_query(o);
    validation::TrialOptions topts;
    topts.directions = parse_directions(o, n, 8);
    if (o.has("anchor")) topts.anchor = parse_anchor(o, problem.admissible);
    topts.N_override = o.maybe_integer("N_override");
    const std::size_t T = o.count("trials", 200);
    o.finish();
    if (T < 1) fail("$.validate.trials", "must be at least 1");
    topts.probe = probe;
    topts.threads = opts.threads;
    const auto q = make_query(sq, n, topts.directions.size());
    const auto rep = validation::run_feasibility_trials(problem, q, T, report.master_seed, topts);

    Table tt{"trials", {"trial", "N", "vertices", "infeasible", "estimate", "ci_low", "ci_high", "failure"}, {}};
    for (const auto& t : rep.per_trial) {
      tt.add({i64(t.trial), t.N, i64(t.vertices), std::int64_t{t.infeasible}, t.violation.estimate,
              t.violation.ci_low, t.violation.ci_high, std::int64_t{t.failure}});
    }
    Table st{"summary", {"quantity", "value"}, {}};
    st.add({std::string("trials"), i64(rep.trials)});
    st.add({std::string("failures"), i64(rep.failures)});
    st.add({std::string("infeasible"), i64(rep.infeasible)});
    st.add({std::string("failure_fraction"), rep.failure_fraction()});
    st.add({std::string("epsilon"), rep.epsilon});
    st.add({std::string("beta"), rep.beta});
    st.add({std::string("N"), rep.N});
    st.add({std::string("n_probe"), i64(probe.n_probe)});
    st.add({std::string("K_mc"), probe.K_mc});
    st.add({std::string("passed"), std::int64_t{rep.failure_fraction() <= rep.beta}});
    report.tables.push_back(std::move(tt));
    report.tables.push_back(std::move(st));
    return;
  }
  if (mode == "inflation") {
    const double eps = o.real("epsilon", 0.1);
    auto points = as_vector_list(o.need("points"), o.at("points"));
    for (std::size_t k = 0; k < points.size(); ++k) {
      if (points[k].size() != n) fail(o.at("points") + "[" + std::to_string(k) + "]", "dimension mismatch");
    }
    o.finish();
    const auto rep = at_path("$.validate", [&] {
      return validation::convex_hull_inflation_check(problem, points, eps, probe, report.master_seed);
    });

    Table pt{"points", {"index", "estimate", "ci_low", "ci_high", "precondition_ok"}, {}};
    for (std::size_t k = 0; k < rep.point_estimates.size(); ++k) {
      const auto& e = rep.point_estimates[k];
      pt.add({i64(k), e.estimate, e.ci_low, e.ci_high, std::int64_t{e.ci_low <= eps}});
    }
    Table probes{"probes", {"probe_id", "estimate", "ci_low", "ci_high"}, {}};
    add_point_columns(probes.columns, "x_", n);
    for (std::size_t k = 0; k < rep.hull.probes.size(); ++k) {
      const auto& e = rep.hull.probes[k];
      std::vector<Cell> row{e.probe_id, e.estimate, e.ci_low, e.ci_high};
      append_point(row, rep.hull.probe_points[k]);
      probes.add(std::move(row));
    }
    Table st{"summary", {"quantity", "value"}, {}};
    st.add({std::string("precondition_ok"), std::int64_t{rep.precondition_ok}});
    st.add({std::string("max_estimate"), rep.hull.max.estimate});
    st.add({std::string("argmax_probe"), rep.hull.max.probe_id});
    st.add({std::string("bound"), rep.bound});
    st.add({std::string("slack"), rep.slack});
    st.add({std::string("margin"), rep.margin});
    st.add({std::string("passed"), std::int64_t{rep.passed}});
    report.tables.push_back(std::move(pt));
    report.tables.push_back(std::move(probes));
    report.tables.push_back(std::move(st));
    return;
  }
  fail("$.validate.mode", "unknown mode '" + mode + "' (trials, inflation)");
}

// --------------------------------------------------------- counterexample

void cmd_counterexample(Obj o, Report& report) {
  std::vector<int> Ns;
  if (const json* p = o.find("N")) {
    if (p->is_array()) {
      for (std::size_t i = 0; i < p->size(); ++i) {
        Ns.push_back(static_cast<int>(as_int((*p)[i], o.at("N") + "[" + std::to_string(i) + "]")));
      }
    } else {
      Ns.push_back(static_cast<int>(as_int(*p, o.at("N"))));
    }
  } else {
    for (int N = 5; N <= 12; ++N) Ns.push_back(N);
  }
  const auto res = o.integer("grid_resolution", 800);
  o.finish();

  Table ot{"optimum",
           {"N", "x", "y", "closed_form_value", "grid_value", "abs_error", "grid_error_bound", "margin",
            "all_support"},
           {}};
  Table rt{"removals", {"N", "removed_sample", "value", "decrease", "is_support"}, {}};
  for (int N : Ns) {
    const auto rep = at_path("$.counterexample.N", [&] {
      return problems::verify_support_constraints(N, static_cast<int>(res));
    });
    const auto p = problems::counterexample_optimum(N);
    const auto samples = problems::counterexample_samples(N);
    std::vector<double> angles;
    for (const auto& d : samples.draws) angles.push_back(d(0));
    const auto grid = problems::counterexample_grid_optimum(angles, rep.grid_resolution);
    ot.add({std::int64_t{N}, p.x, p.y, rep.closed_form_value, rep.full_value,
            std::abs(rep.full_value - rep.closed_form_value), grid.error_bound, rep.margin,
            std::int64_t{rep.all_support}});
    for (std::size_t i = 0; i < rep.removal_values.size(); ++i) {
      rt.add({std::int64_t{N}, i64(i), rep.removal_values[i], rep.full_value - rep.removal_values[i],
              std::int64_t{rep.is_support[i]}});
    }
  }
  report.tables.push_back(std::move(ot));
  report.tables.push_back(std::move(rt));
}

// -------------------------------------------------------------------- mpc

void cmd_mpc(Obj o, const RunOptions& opts, Report& report) {
  mpc::BenchmarkParameters bp;
  if (o.has("system")) {
    Obj s = o.object("system");
    const std::string kind = s.text("kind", "benchmark");
    if (kind != "benchmark") fail(s.at("kind"), "only the 'benchmark' system is available");
    bp.dt = s.real("dt", bp.dt);
    bp.omega = s.real("omega", bp.omega);
    bp.heading_gain = s.real("heading_gain", bp.heading_gain);
    bp.heading_noise = s.real("heading_noise", bp.heading_noise);
    bp.position_noise = s.real("position_noise", bp.position_noise);
    s.finish();
  }
  const auto system = mpc::benchmark_system(bp);
  auto cfg = mpc::benchmark_config();
  cfg.horizon = static_cast<int>(o.integer("horizon", cfg.horizon));
  cfg.epsilon = o.real("epsilon", cfg.epsilon);
  cfg.beta = o.real("beta", cfg.beta);
  if (o.has("state_set")) cfg.state_set = parse_admissible(o.object("state_set"));
  if (o.has("input_set")) cfg.input_set = parse_admissible(o.object("input_set"));
  cfg.directions = parse_directions(o, system.input_dim, 6);
  cfg.anchor = o.has("anchor") ? parse_anchor(o, cfg.input_set) : Vector(Vector::Zero(system.input_dim));
  cfg.cost_samples = o.count("cost_samples", cfg.cost_samples);
  cfg.later_samples = o.count("later_samples", cfg.later_samples);
  cfg.shooting_budget = o.count("shooting_budget", cfg.shooting_budget);
  cfg.violation_penalty = o.real("violation_penalty", cfg.violation_penalty);
  cfg.certify = o.flag("certify", cfg.certify);
  Vector target(2);
  target << 1.2, 0.0;
  if (auto t = o.maybe_vector("target")) {
    if (t->size() != system.state_dim) fail(o.at("target"), "expected 2 entries");
    target = *t;
  }
  const double input_weight = o.real("input_weight", 0.01);
  Vector x0 = Vector::Zero(system.state_dim);
  if (auto x = o.maybe_vector("x0")) {
    if (x->size() != system.state_dim) fail(o.at("x0"), "expected 2 entries");
    x0 = *x;
  }
  const std::size_t T = o.count("steps", 5000);
  const auto M = cfg.directions.size();
  const auto certified = at_path("$.mpc", [&] {
    return certificates::admissible_mpc_sample_size(cfg.epsilon, system.input_dim, i64(M));
  });
  cfg.first_stage_samples = o.count("first_stage_samples", static_cast<std::size_t>(certified));
  o.finish();

  cfg.stage_cost = [target, input_weight](const Vector& x, const Vector& u) {
    return (x - target).squaredNorm() + input_weight * u.squaredNorm();
  };
  cfg.terminal_cost = [target](const Vector& x) { return (x - target).squaredNorm(); };
  cfg.threads = opts.threads;
  const auto log = at_path("$.mpc", [&] { return mpc::closed_loop_run(system, x0, T, cfg, report.master_seed); });

  Table steps{"steps", {"k"}, {}};
  add_point_columns(steps.columns, "x_", system.state_dim);
  add_point_columns(steps.columns, "u_", system.input_dim);
  add_point_columns(steps.columns, "x_next_", system.state_dim);
  steps.columns.insert(steps.columns.end(), {"violation", "recovery"});
  for (const auto& s : log.steps) {
    std::vector<Cell> row{i64(s.k)};
    append_point(row, s.x);
    append_point(row, s.u);
    append_point(row, s.x_next);
    row.emplace_back(std::int64_t{s.violation});
    row.emplace_back(std::int64_t{s.recovery});
    steps.add(std::move(row));
  }
  Table st{"summary", {"quantity", "value"}, {}};
  st.add({std::string("steps"), i64(log.steps.size())});
  st.add({std::string("first_stage_samples"), i64(log.first_stage_samples)});
  st.add({std::string("certified_samples"), log.certified_samples});
  st.add({std::string("infeasibility_events"), i64(log.infeasibility_events)});
  if (!log.steps.empty()) {
    const auto rate = mpc::empirical_violation_rate(log);
    const double threshold =
        cfg.epsilon + 3.0 * std::sqrt(cfg.epsilon * (1.0 - cfg.epsilon) / static_cast<double>(rate.steps));
    st.add({std::string("violations"), i64(rate.violations)});
    st.add({std::string("violation_rate"), rate.rate});
    st.add({std::string("ci_low"), rate.ci_low});
    st.add({std::string("ci_high"), rate.ci_high});
    st.add({std::string("rate_threshold"), threshold});
    st.add({std::string("within_threshold"), std::int64_t{rate.rate <= threshold}});
  }
  report.tables.push_back(std::move(steps));
  report.tables.push_back(std::move(st));
}

// ---------------------------------------------------------------- discard

void cmd_discard(Obj o, Report& report) {
  const ProblemInstance problem = parse_problem(o.object("problem"));
  const Eigen::Index n = problem.decision_dim();
  const Vector direction = o.vector("direction");
  if (direction.size() != n || !(direction.norm() > 0.0)) fail(o.at("direction"), "expected a nonzero vector of the decision dimension");
  const Vector anchor = parse_anchor(o, problem.admissible);
  const SampleQuery sq = parse_sample_query(o);
  const std::size_t r = o.count("r", 5);
  const auto N_given = o.maybe_integer("N");
  o.finish();
  const SampleCount N = N_given ? *N_given : certificates::sample_size_single(sq.epsilon, sq.beta, sq.helly);
  if (N < 1 || static_cast<std::size_t>(N) <= r) fail("$.discard.N", "must exceed r");

  const auto sample = problems::draw_multisample(problem.uncertainty, static_cast<std::size_t>(N),
                                                 report.master_seed, stream_id(StreamDomain::kScenario, 0));
  const auto spec = engine::make_line_program(problem, sample, anchor, direction);
  const auto res = engine::greedy_discard(spec, r);
  if (!res.lambda) throw InfeasibleError("discard: the direction program is infeasible");

  Table pt{"path", {"removals", "lambda", "removed_sample", "discarding_bound"}, {}};
  for (std::size_t k = 0; k < res.lambda_path.size(); ++k) {
    const std::int64_t removed = k == 0 ? -1 : i64(res.removed[k - 1]);
    pt.add({i64(k), res.lambda_path[k], removed,
            certificates::discarding_bound(sq.epsilon, sq.helly, i64(k), N).value});
  }
  Table st{"summary", {"quantity", "value"}, {}};
  st.add({std::string("N"), N});
  st.add({std::string("r"), i64(r)});
  st.add({std::string("removed"), i64(res.removed.size())});
  st.add({std::string("lambda"), *res.lambda});
  report.tables.push_back(std::move(pt));
  report.tables.push_back(std::move(st));
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string cell_text(const Cell& c) {
  if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
  if (const auto* d = std::get_if<double>(&c)) return format_real(*d);
  return csv_escape(std::get<std::string>(c));
}

}  // namespace

Format format_from_string(const std::string& name) {
  if (name == "csv") return Format::kCsv;
  if (name == "json") return Format::kJson;
  if (name == "both") return Format::kBoth;
  throw ConfigError("--format: expected csv, json or both, got '" + name + "'");
}

void Table::add(std::vector<Cell> row) {
  if (row.size() != columns.size()) {
    throw NumericalError("table " + name + ": row has " + std::to_string(row.size()) + " cells for " +
                         std::to_string(columns.size()) + " columns");
  }
  rows.push_back(std::move(row));
}

const Table& Report::table(const std::string& name) const {
  for (const auto& t : tables) {
    if (t.name == name) return t;
  }
  throw DomainError("report has no table '" + name + "'");
}

std::string fnv1a64_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

Report run_command(const std::string& config_text, const RunOptions& options) {
  json doc;
  try {
    doc = json::parse(config_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  Obj top(doc, "$");
  Report report;
  report.command = top.text("command");
  report.master_seed = 0;
  if (const json* s = top.find("master_seed")) report.master_seed = as_u64(*s, top.at("master_seed"));
  if (options.seed) report.master_seed = *options.seed;
  report.config_hash = fnv1a64_hex(doc.dump());

  const std::string& cmd = report.command;
  static const std::set<std::string> known{"certify", "run", "validate", "counterexample", "mpc", "discard"};
  if (known.count(cmd) == 0) {
    fail(top.at("command"), "unknown command '" + cmd + "' (certify, run, validate, counterexample, mpc, discard)");
  }
  if (options.command && *options.command != cmd) {
    fail(top.at("command"), "config is for '" + cmd + "' but '" + *options.command + "' was requested");
  }
  const json empty = json::object();
  const json* block_json = top.find(cmd);
  Obj block(block_json ? *block_json : empty, top.at(cmd));
  top.finish();

  if (cmd == "certify") cmd_certify(std::move(block), report);
  if (cmd == "run") cmd_run(std::move(block), options, report);
  if (cmd == "validate") cmd_validate(std::move(block), options, report);
  if (cmd == "counterexample") cmd_counterexample(std::move(block), report);
  if (cmd == "mpc") cmd_mpc(std::move(block), options, report);
  if (cmd == "discard") cmd_discard(std::move(block), report);
  return report;
}

std::string format_real(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  // Guard against a non-"C" LC_NUMERIC set by an embedding process.
  for (char& c : buf) {
    if (c == ',') c = '.';
  }
  return buf;
}

std::string to_csv(const Report& report, const Table& table) {
  std::ostringstream out;
  out << "# command=" << report.command << " table=" << table.name << " config_hash=" << report.config_hash
      << " master_seed=" << report.master_seed << "\n";
  for (std::size_t c = 0; c < table.columns.size(); ++c) out << (c ? "," : "") << csv_escape(table.columns[c]);
  out << "\n";
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << cell_text(row[c]);
    out << "\n";
  }
  return out.str();
}

std::string to_json(const Report& report) {
  nlohmann::ordered_json doc;
  doc["command"] = report.command;
  doc["config_hash"] = report.config_hash;
  doc["master_seed"] = report.master_seed;
  auto& tables = doc["tables"] = nlohmann::ordered_json::object();
  for (const auto& t : report.tables) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& row : t.rows) {
      nlohmann::ordered_json r = nlohmann::ordered_json::array();
      for (const auto& c : row) {
        if (const auto* i = std::get_if<std::int64_t>(&c)) {
          r.push_back(*i);
        } else if (const auto* d = std::get_if<double>(&c)) {
          // Non-finite reals keep their CSV spelling.
          if (std::isfinite(*d)) {
            r.push_back(*d);
          } else {
            r.push_back(format_real(*d));
          }
        } else {
          r.push_back(std::get<std::string>(c));
        }
      }
      rows.push_back(std::move(r));
    }
    tables[t.name] = {{"columns", t.columns}, {"rows", std::move(rows)}};
  }
  return doc.dump(2) + "\n";
}

std::vector<std::pair<std::string, std::string>> render(const Report& report, Format format) {
  std::vector<std::pair<std::string, std::string>> files;
  if (format != Format::kJson) {
    for (const auto& t : report.tables) files.emplace_back(report.command + "_" + t.name + ".csv", to_csv(report, t));
  }
  if (format != Format::kCsv) files.emplace_back(report.command + ".json", to_json(report));
  return files;
}

void write_report(const Report& report, const std::string& out_dir, Format format) {
  const auto files = render(report, format);
  std::filesystem::create_directories(out_dir);
  for (const auto& [name, contents] : files) {
    const auto path = std::filesystem::path(out_dir) / name;
    std::ofstream f(path, std::ios::binary);
    f << contents;
    if (!f) throw std::runtime_error("cannot write " + path.string());
  }
}

int exit_code(const std::exception& error) {
  if (dynamic_cast<const ConfigError*>(&error) != nullptr) return 2;
  if (dynamic_cast<const DomainError*>(&error) != nullptr) return 2;
  if (dynamic_cast<const InfeasibleError*>(&error) != nullptr) return 3;
  return 4;
}

}  // namespace scenario_hull::cli

// Copyright 2026 The scenario-hull Authors
// SPDX-License-Identifier: Apache-2.0

#include "scenario_hull/certificates.hpp"
#include "scenario_hull/cli.hpp"
#include "scenario_hull/counterexample.hpp"
#include "scenario_hull/problems.hpp"
#include "scenario_hull/rng.hpp"
#include "scenario_hull/scenario_engine.hpp"
#include "scenario_hull/validation.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
namespace sh = scenario_hull;

using sh::Matrix;
using sh::Vector;
using sh::problems::AdmissibleSet;
using sh::problems::ConstraintSpec;
using sh::problems::ProblemInstance;
using sh::problems::UncertaintySpace;

namespace {

py::object cell_to_py(const sh::cli::Cell& c) {
  if (const auto* i = std::get_if<std::int64_t>(&c)) return py::int_(*i);
  if (const auto* d = std::get_if<double>(&c)) return py::float_(*d);
  return py::str(std::get<std::string>(c));
}

py::dict report_to_dict(const sh::cli::Report& r) {
  py::dict tables;
  for (const auto& t : r.tables) {
    py::list rows;
    for (const auto& row : t.rows) {
      py::list out;
      for (const auto& c : row) out.append(cell_to_py(c));
      rows.append(out);
    }
    tables[py::str(t.name)] = py::dict(py::arg("columns") = t.columns, py::arg("rows") = rows);
  }
  py::dict files;
  for (const auto& [name, text] : sh::cli::render(r, sh::cli::Format::kBoth)) files[py::str(name)] = text;
  return py::dict(py::arg("command") = r.command, py::arg("config_hash") = r.config_hash,
                  py::arg("master_seed") = r.master_seed, py::arg("tables") = tables, py::arg("files") = files);
}

Matrix hull_points(const sh::engine::HullSet& h) {
  if (h.empty()) return Matrix(0, 0);
  return h.points().transpose();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Certified scenario hulls: sample-size certificates, hull construction and validation.";

  auto domain = py::register_exception<sh::DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<sh::ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<sh::InfeasibleError>(m, "InfeasibleError", PyExc_RuntimeError);
  py::register_exception<sh::NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
  (void)domain;

  // certificates
  m.def(
      "binomial_tail", [](double eps, std::int64_t zeta, std::int64_t N) { return sh::certificates::binomial_tail(eps, zeta, N).value; },
      py::arg("epsilon"), py::arg("zeta"), py::arg("N"),
      "P(Binomial(N, epsilon) < zeta), evaluated in the log domain.");
  m.def("sample_size_single", &sh::certificates::sample_size_single, py::arg("epsilon"), py::arg("beta"),
        py::arg("zeta"));
  m.def(
      "hull_bound",
      [](double eps, std::int64_t n, std::int64_t M, std::int64_t zeta, std::int64_t N) {
        return sh::certificates::hull_bound(eps, n, M, zeta, N).value;
      },
      py::arg("epsilon"), py::arg("n"), py::arg("M"), py::arg("zeta"), py::arg("N"));
  m.def("hull_sample_size", &sh::certificates::hull_sample_size, py::arg("epsilon"), py::arg("beta"), py::arg("n"),
        py::arg("M"), py::arg("zeta") = 1);
  m.def("mpc_sample_size", &sh::certificates::mpc_sample_size, py::arg("epsilon"), py::arg("beta"), py::arg("m"),
        py::arg("M"));
  m.def("admissible_mpc_sample_size", &sh::certificates::admissible_mpc_sample_size, py::arg("epsilon"),
        py::arg("m"), py::arg("M"));

  // problems
  py::class_<AdmissibleSet>(m, "AdmissibleSet")
      .def_static("box", &AdmissibleSet::box, py::arg("lower"), py::arg("upper"))
      .def_static("ball", &AdmissibleSet::ball, py::arg("center"), py::arg("radius"))
      .def_static("polytope", &AdmissibleSet::polytope, py::arg("A"), py::arg("b"), py::arg("lower"),
                  py::arg("upper"))
      .def_property_readonly("dim", &AdmissibleSet::dim)
      .def("contains", &AdmissibleSet::contains, py::arg("x"), py::arg("tol") = 0.0)
      .def("center", &AdmissibleSet::center);

  py::class_<UncertaintySpace>(m, "UncertaintySpace")
      .def_static("uniform_box", &UncertaintySpace::uniform_box, py::arg("lower"), py::arg("upper"))
      .def_static("gaussian", &UncertaintySpace::gaussian, py::arg("mean"), py::arg("stddev"))
      .def_static("finite_support", &UncertaintySpace::finite_support, py::arg("atoms"),
                  py::arg("weights") = std::vector<double>{})
      .def_static("circle_equispaced", &UncertaintySpace::circle_equispaced, py::arg("count"),
                  py::arg("jitter") = 0.0)
      .def_property_readonly("dim", &UncertaintySpace::dim);

  py::class_<ConstraintSpec>(m, "ConstraintSpec")
      .def_static("affine", &ConstraintSpec::affine, py::arg("a0"), py::arg("a_matrix"), py::arg("b0"),
                  py::arg("b_vector"))
      .def_static("norm_offset", &ConstraintSpec::norm_offset, py::arg("rho"))
      .def_static("counterexample", &ConstraintSpec::counterexample)
      .def("__call__", &ConstraintSpec::operator(), py::arg("x"), py::arg("delta"));

  py::class_<ProblemInstance>(m, "ProblemInstance")
      .def(py::init([](AdmissibleSet a, UncertaintySpace u, ConstraintSpec g) {
             return ProblemInstance(std::move(a), std::move(u), std::move(g), nullptr);
           }),
           py::arg("admissible"), py::arg("uncertainty"), py::arg("constraint"))
      .def_property_readonly("decision_dim", &ProblemInstance::decision_dim);

  m.def("counterexample_optimum", [](int N) {
    const auto p = sh::problems::counterexample_optimum(N);
    return py::make_tuple(p.x, p.y, p.z);
  }, py::arg("N"), "Closed-form optimizer (x, y, z) for N equispaced samples.");
  m.def(
      "verify_support_constraints",
      [](int N, int resolution) {
        const auto r = sh::problems::verify_support_constraints(N, resolution);
        return py::dict(py::arg("closed_form_value") = r.closed_form_value, py::arg("grid_value") = r.full_value,
                        py::arg("removal_values") = r.removal_values, py::arg("all_support") = r.all_support);
      },
      py::arg("N"), py::arg("grid_resolution") = 400);

  // scenario engine
  py::class_<sh::engine::HullSet>(m, "HullSet")
      .def_property_readonly("vertices", &hull_points, "Vertices as rows.")
      .def_property_readonly("direction_indices",
                             [](const sh::engine::HullSet& h) {
                               std::vector<std::size_t> out;
                               for (const auto& v : h.vertices) out.push_back(v.direction_index);
                               return out;
                             })
      .def_property_readonly("lambdas",
                             [](const sh::engine::HullSet& h) {
                               std::vector<double> out;
                               for (const auto& v : h.vertices) out.push_back(v.lambda);
                               return out;
                             })
      .def_readonly("infeasible_directions", &sh::engine::HullSet::infeasible_directions)
      .def("centroid", &sh::engine::HullSet::centroid)
      .def("__len__", [](const sh::engine::HullSet& h) { return h.vertices.size(); });

  m.def("default_directions", &sh::engine::default_directions, py::arg("n"), py::arg("M"));
  m.def(
      "build_hull",
      [](const ProblemInstance& problem, std::size_t N, std::uint64_t seed, std::optional<Vector> anchor,
         std::optional<std::vector<Vector>> directions, std::size_t threads) {
        const auto sample = sh::problems::draw_multisample(problem.uncertainty, N, seed,
                                                           sh::stream_id(sh::StreamDomain::kScenario, 0));
        const auto dirs = directions ? *directions : sh::engine::default_directions(problem.decision_dim(), 8);
        sh::engine::HullBuildOptions opts;
        opts.threads = threads;
        py::gil_scoped_release release;
        return sh::engine::build_hull(problem, sample, anchor ? *anchor : problem.admissible.center(), dirs, opts);
      },
      py::arg("problem"), py::arg("N"), py::arg("seed"), py::arg("anchor") = py::none(),
      py::arg("directions") = py::none(), py::arg("threads") = 0,
      "Draws N scenarios from stream (seed, scenario 0) and builds the certified hull.");
  m.def(
      "hull_membership",
      [](const sh::engine::HullSet& h, const Vector& x, double tol) {
        const auto r = sh::engine::hull_membership(h, x, tol);
        return py::make_tuple(r.inside, r.weights, r.slack);
      },
      py::arg("hull"), py::arg("x"), py::arg("tol") = 1e-9, "Returns (inside, weights, distance).");
  m.def(
      "optimize_over_hull",
      [](const std::function<double(const Vector&)>& J, const sh::engine::HullSet& h, std::size_t budget,
         std::uint64_t seed) {
        const auto r = sh::engine::optimize_over_hull(J, h, budget, seed);
        return py::make_tuple(r.point, r.value);
      },
      py::arg("objective"), py::arg("hull"), py::arg("budget") = 256, py::arg("seed") = 0);

  // validation
  m.def(
      "clopper_pearson",
      [](std::int64_t k, std::int64_t K, double conf) {
        const auto ci = sh::validation::clopper_pearson(k, K, conf);
        return py::make_tuple(ci.low, ci.high);
      },
      py::arg("k"), py::arg("K"), py::arg("confidence") = 0.95);
  m.def(
      "estimate_point_violation",
      [](const ProblemInstance& problem, const Vector& x, std::int64_t K_mc, std::uint64_t seed) {
        const auto e = sh::validation::estimate_point_violation(problem, x, K_mc, seed);
        return py::dict(py::arg("estimate") = e.estimate, py::arg("ci_low") = e.ci_low,
                        py::arg("ci_high") = e.ci_high, py::arg("violations") = e.violations);
      },
      py::arg("problem"), py::arg("x"), py::arg("K_mc") = 20000, py::arg("seed") = 0);
  m.def(
      "run_feasibility_trials",
      [](const ProblemInstance& problem, double eps, double beta, std::size_t M, std::size_t T, std::uint64_t seed,
         std::size_t n_probe, std::int64_t K_mc, std::size_t threads) {
        sh::certificates::CertificateQuery q;
        q.epsilon = eps;
        q.beta = beta;
        q.n = problem.decision_dim();
        q.directions = static_cast<std::int64_t>(M);
        sh::validation::TrialOptions opts;
        opts.probe.n_probe = n_probe;
        opts.probe.K_mc = K_mc;
        opts.threads = threads;
        sh::validation::TrialReport rep;
        {
          py::gil_scoped_release release;
          rep = sh::validation::run_feasibility_trials(problem, q, T, seed, opts);
        }
        return py::dict(py::arg("trials") = rep.trials, py::arg("failures") = rep.failures,
                        py::arg("infeasible") = rep.infeasible, py::arg("N") = rep.N,
                        py::arg("failure_fraction") = rep.failure_fraction());
      },
      py::arg("problem"), py::arg("epsilon") = 0.1, py::arg("beta") = 0.1, py::arg("M") = 8, py::arg("T") = 20,
      py::arg("seed") = 0, py::arg("n_probe") = 20, py::arg("K_mc") = 20000, py::arg("threads") = 0);

  // cli
  m.def(
      "run_command",
      [](const std::string& config, std::optional<std::uint64_t> seed, std::size_t threads) {
        sh::cli::RunOptions opts;
        opts.seed = seed;
        opts.threads = threads;
        sh::cli::Report r;
        {
          py::gil_scoped_release release;
          r = sh::cli::run_command(config, opts);
        }
        return report_to_dict(r);
      },
      py::arg("config"), py::arg("seed") = py::none(), py::arg("threads") = 0,
      "Runs a JSON config exactly as the command-line tool does; returns tables and rendered files.");

#ifdef VERSION_INFO
  m.attr("__version__") = VERSION_INFO;
#else
  m.attr("__version__") = "dev";
#endif
}

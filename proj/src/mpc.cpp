// Copyright 2026 The scenario-hull Authors
// SPDX-License-Identifier: Apache-2.0

#include "scenario_hull/mpc.hpp"

#include "scenario_hull/certificates.hpp"
#include "scenario_hull/parallel.hpp"
#include "scenario_hull/rng.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace scenario_hull::mpc {

namespace {

std::vector<NoiseSequence> draw_sequences(const UncertaintySpace& noise, std::size_t count,
                                          int horizon, std::uint64_t seed, std::uint64_t stream) {
  const auto K = static_cast<std::size_t>(horizon);
  if (count == 0) return {};
  const auto flat = problems::draw_multisample(noise, count * K, seed, stream);
  std::vector<NoiseSequence> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    out[i].assign(flat.draws.begin() + static_cast<std::ptrdiff_t>(i * K),
                  flat.draws.begin() + static_cast<std::ptrdiff_t>((i + 1) * K));
  }
  return out;
}

}  // namespace

ControlAffineSystem benchmark_system(const BenchmarkParameters& params) {
  ControlAffineSystem sys;
  sys.state_dim = 2;
  sys.input_dim = 2;
  sys.noise_dim = 3;
  sys.drift = [params](const Vector& x, const Vector& v) {
    Vector out(2);
    out(0) = x(0) - params.dt * params.omega * x(1) + params.position_noise * v(1);
    out(1) = x(1) + params.dt * params.omega * x(0) + params.position_noise * v(2);
    return out;
  };
  sys.input_matrix = [params](const Vector& x, const Vector& v) {
    const double theta = params.heading_gain * x(0) + params.heading_noise * v(0);
    Matrix G(2, 2);
    G << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
    return Matrix(params.dt * G);
  };
  sys.noise = UncertaintySpace::gaussian(Vector::Zero(3), Vector::Ones(3));
  return sys;
}

void MPCConfig::validate(const ControlAffineSystem& system) const {
  require(horizon >= 1, "mpc: horizon must be at least 1");
  require(epsilon > 0.0 && epsilon < 1.0, "mpc: epsilon must lie in (0, 1)");
  require(beta > 0.0 && beta < 1.0, "mpc: beta must lie in (0, 1)");
  require(!directions.empty(), "mpc: need at least one direction");
  require(first_stage_samples >= 1, "mpc: first_stage_samples must be at least 1");
  require(shooting_budget >= 1, "mpc: shooting_budget must be at least 1");
  require(static_cast<bool>(stage_cost) && static_cast<bool>(terminal_cost),
          "mpc: stage and terminal costs are required");
  require(static_cast<bool>(system.drift) && static_cast<bool>(system.input_matrix),
          "mpc: system dynamics are incomplete");
  require_dim(state_set.dim(), system.state_dim, "mpc state set");
  require_dim(input_set.dim(), system.input_dim, "mpc input set");
  require_dim(anchor.size(), system.input_dim, "mpc anchor");
  require_dim(system.noise.dim(), system.noise_dim, "mpc noise");
  for (const auto& c : directions) {
    require_dim(c.size(), system.input_dim, "mpc direction");
    require(c.norm() > 0.0, "mpc: directions must be nonzero");
  }
}

MPCConfig benchmark_config() {
  MPCConfig cfg;
  cfg.horizon = 3;
  cfg.epsilon = 0.1;
  cfg.beta = 0.1;
  cfg.directions = engine::default_directions(2, 6);
  cfg.anchor = Vector::Zero(2);
  cfg.cost_samples = 20;
  cfg.later_samples = 20;
  cfg.first_stage_samples =
      static_cast<std::size_t>(certificates::admissible_mpc_sample_size(cfg.epsilon, 2, 6));
  Vector target(2);
  target << 1.2, 0.0;
  cfg.stage_cost = [target](const Vector& x, const Vector& u) {
    return (x - target).squaredNorm() + 0.01 * u.squaredNorm();
  };
  cfg.terminal_cost = [target](const Vector& x) { return (x - target).squaredNorm(); };
  cfg.certify = true;
  return cfg;
}

Vector simulate_step(const ControlAffineSystem& system, const Vector& x, const Vector& u,
                     const Vector& v) {
  require_dim(x.size(), system.state_dim, "state");
  require_dim(u.size(), system.input_dim, "input");
  require_dim(v.size(), system.noise_dim, "noise");
  const Vector fx = system.drift(x, v);
  const Matrix gx = system.input_matrix(x, v);
  require_dim(fx.size(), system.state_dim, "drift output");
  require_dim(gx.rows(), system.state_dim, "input matrix rows");
  require_dim(gx.cols(), system.input_dim, "input matrix columns");
  Vector next = fx + gx * u;
  if (!next.allFinite()) throw NumericalError("simulate_step: non-finite next state");
  return next;
}

FirstStageSet first_stage_set(const ControlAffineSystem& system, const Vector& x,
                              const MPCConfig& config, const std::vector<Vector>& v_samples) {
  require(!v_samples.empty(), "first_stage_set: need at least one sample");
  // The next state is affine in u: precompute f and g once per sample.
  std::vector<Vector> drift(v_samples.size());
  std::vector<Matrix> gain(v_samples.size());
  const Vector zero_u = Vector::Zero(system.input_dim);
  for (std::size_t i = 0; i < v_samples.size(); ++i) {
    drift[i] = simulate_step(system, x, zero_u, v_samples[i]);
    gain[i] = system.input_matrix(x, v_samples[i]);
  }
  const engine::SampledConstraint g = [&](std::size_t i, const Vector& u) {
    return config.state_set.residual(drift[i] + gain[i] * u);
  };
  engine::HullBuildOptions opts;
  opts.threads = config.threads;
  FirstStageSet out;
  out.hull = engine::build_hull(config.input_set, v_samples.size(), g, config.anchor,
                                config.directions, opts);
  out.lambdas.assign(config.directions.size(), std::nullopt);
  for (const auto& v : out.hull.vertices) out.lambdas[v.direction_index] = v.lambda;
  return out;
}

ShootingResult choose_input(const ControlAffineSystem& system, const Vector& x,
                            const MPCConfig& config, const engine::HullSet& u_set,
                            const std::vector<NoiseSequence>& cost_samples,
                            const std::vector<NoiseSequence>& later_samples, std::uint64_t seed) {
  require(!u_set.empty(), "choose_input: empty first-stage set");
  require(config.shooting_budget >= 1, "choose_input: shooting_budget must be at least 1");
  const auto K = static_cast<std::size_t>(config.horizon);
  for (const auto& s : cost_samples) require(s.size() == K, "choose_input: cost sample length must equal the horizon");
  for (const auto& s : later_samples) require(s.size() == K, "choose_input: later sample length must equal the horizon");

  const Matrix P = u_set.points();
  const auto V = P.cols();
  CounterRng rng(seed);
  std::vector<std::vector<Vector>> candidates(config.shooting_budget);
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    auto& seq = candidates[c];
    // Vertices first (the extreme first-stage inputs), then random mixtures.
    if (c < static_cast<std::size_t>(V) && candidates.size() > static_cast<std::size_t>(V)) {
      seq.push_back(P.col(static_cast<Eigen::Index>(c)));
    } else {
      Vector w(V);
      for (Eigen::Index i = 0; i < V; ++i) w(i) = rng.exponential();
      seq.push_back(P * (w / w.sum()));
    }
    for (std::size_t k = 1; k < K; ++k) seq.push_back(config.input_set.sample_uniform(rng));
  }

  std::vector<ShootingResult> scored(candidates.size());
  parallel_for(candidates.size(), config.threads, [&](std::size_t c) {
    const auto& seq = candidates[c];
    ShootingResult r;
    r.u0 = seq.front();
    r.sequence = seq;
    r.candidate = c;
    for (const auto& v : cost_samples) {
      Vector state = x;
      double J = 0.0;
      for (std::size_t k = 0; k < K; ++k) {
        J += config.stage_cost(state, seq[k]);
        state = simulate_step(system, state, seq[k], v[k]);
      }
      r.cost += J + config.terminal_cost(state);
    }
    for (const auto& v : later_samples) {
      Vector state = x;
      for (std::size_t k = 0; k < K; ++k) {
        state = simulate_step(system, state, seq[k], v[k]);
        if (k + 1 >= 2 && config.state_set.residual(state) > 0.0) ++r.later_violations;
      }
    }
    r.score = r.cost + config.violation_penalty * static_cast<double>(r.later_violations);
    scored[c] = std::move(r);
  });

  std::size_t best = 0;
  for (std::size_t c = 1; c < scored.size(); ++c) {
    if (scored[c].score < scored[best].score) best = c;
  }
  return scored[best];
}

ClosedLoopLog closed_loop_run(const ControlAffineSystem& system, const Vector& x0,
                              std::size_t T_steps, const MPCConfig& config,
                              std::uint64_t master_seed) {
  config.validate(system);
  require_dim(x0.size(), system.state_dim, "initial state");
  ClosedLoopLog log;
  log.master_seed = master_seed;
  log.first_stage_samples = config.first_stage_samples;
  log.certified_samples = certificates::admissible_mpc_sample_size(
      config.epsilon, system.input_dim, static_cast<std::int64_t>(config.directions.size()));
  if (config.certify && static_cast<std::int64_t>(config.first_stage_samples) < log.certified_samples) {
    throw DomainError("mpc: N = " + std::to_string(config.first_stage_samples) +
                      " is below the admissible sample size " +
                      std::to_string(log.certified_samples));
  }

  Vector x = x0;
  for (std::size_t k = 0; k < T_steps; ++k) {
    StepRecord rec;
    rec.k = k;
    rec.x = x;
    const auto first = problems::draw_multisample(
        system.noise, config.first_stage_samples, master_seed,
        stream_id(StreamDomain::kMpcFirstStage, k));
    std::optional<FirstStageSet> u_set;
    try {
      u_set = first_stage_set(system, x, config, first.draws);
    } catch (const InfeasibleError&) {
      u_set.reset();
    }
    if (u_set) {
      rec.lambdas = u_set->lambdas;
      const auto cost = draw_sequences(system.noise, config.cost_samples, config.horizon,
                                       master_seed, stream_id(StreamDomain::kMpcCost, k));
      const auto later = draw_sequences(system.noise, config.later_samples, config.horizon,
                                        master_seed, stream_id(StreamDomain::kMpcLater, k));
      rec.u = choose_input(system, x, config, u_set->hull, cost, later,
                           derive_key(master_seed, stream_id(StreamDomain::kMpcShooting, k)))
                  .u0;
    } else {
      rec.lambdas.assign(config.directions.size(), std::nullopt);
      rec.u = config.input_set.project(config.anchor);
      rec.recovery = true;
      ++log.infeasibility_events;
    }
    CounterRng plant(master_seed, stream_id(StreamDomain::kMpcPlant, k));
    const Vector v = system.noise.draw(plant);
    rec.x_next = simulate_step(system, x, rec.u, v);
    rec.violation = config.state_set.residual(rec.x_next) > 0.0;
    x = rec.x_next;
    log.steps.push_back(std::move(rec));
  }
  return log;
}

RateEstimate empirical_violation_rate(const ClosedLoopLog& log) {
  require(!log.steps.empty(), "empirical_violation_rate: empty log");
  RateEstimate out;
  out.steps = log.steps.size();
  for (const auto& s : log.steps) out.violations += s.violation ? 1 : 0;
  out.rate = static_cast<double>(out.violations) / static_cast<double>(out.steps);
  const auto ci = validation::clopper_pearson(static_cast<std::int64_t>(out.violations),
                                              static_cast<std::int64_t>(out.steps));
  out.ci_low = ci.low;
  out.ci_high = ci.high;
  return out;
}

}  // namespace scenario_hull::mpc

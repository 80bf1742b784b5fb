// Copyright 2026 The scenario-hull Authors
// SPDX-License-Identifier: Apache-2.0

#include "scenario_hull/counterexample.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace scenario_hull::problems {

namespace {

void check_sample_count(int N) {
  if (N < 5) throw DomainError("counterexample needs N >= 5, got " + std::to_string(N));
}

struct GridSearch {
  const std::vector<double>& cosines;
  const std::vector<double>& sines;

  double operator()(double x, double y) const {
    double plane = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < cosines.size(); ++j) {
      plane = std::max(plane, cosines[j] * x + sines[j] * y);
    }
    return std::max(-std::hypot(x, y), plane - 1.0);
  }

  // Best node of a res×res grid on [cx−half, cx+half]×[cy−half, cy+half].
  // Ties keep the first node in row-major order.
  GridOptimum scan(double cx, double cy, double half, int res) const {
    GridOptimum best;
    best.value = std::numeric_limits<double>::infinity();
    const double step = 2.0 * half / (res - 1);
    for (int i = 0; i < res; ++i) {
      const double x = cx - half + step * i;
      for (int j = 0; j < res; ++j) {
        const double y = cy - half + step * j;
        const double v = (*this)(x, y);
        if (v < best.value) {
          best.value = v;
          best.x = x;
          best.y = y;
        }
      }
    }
    best.coarse_spacing = step;
    return best;
  }
};

}  // namespace

MultiSample counterexample_samples(int N) {
  check_sample_count(N);
  MultiSample sample;
  sample.draws.reserve(static_cast<std::size_t>(N));
  for (int i = 0; i < N; ++i) {
    Vector angle(1);
    angle(0) = i * (2.0 * std::numbers::pi / N);
    sample.draws.push_back(angle);
  }
  return sample;
}

CounterexamplePoint counterexample_point_for_gap(double theta) {
  require(theta > 0.0 && theta < std::numbers::pi, "gap angle must lie in (0, pi)");
  const double s = std::sin(theta) / (1.0 + std::cos(theta));
  CounterexamplePoint p;
  p.x = 1.0 / (std::sqrt(1.0 + s * s) + 1.0);
  p.y = s * p.x;
  p.z = p.x - 1.0;
  return p;
}

CounterexamplePoint counterexample_optimum(int N) {
  check_sample_count(N);
  return counterexample_point_for_gap(2.0 * std::numbers::pi / N);
}

double counterexample_value(double x, double y, const std::vector<double>& angles) {
  std::vector<double> c, s;
  for (double a : angles) {
    c.push_back(std::cos(a));
    s.push_back(std::sin(a));
  }
  return GridSearch{c, s}(x, y);
}

GridOptimum counterexample_grid_optimum(const std::vector<double>& angles, int grid_resolution) {
  require(grid_resolution >= 2, "grid resolution must be >= 2");
  std::vector<double> c, s;
  for (double a : angles) {
    c.push_back(std::cos(a));
    s.push_back(std::sin(a));
  }
  const GridSearch search{c, s};

  GridOptimum coarse = search.scan(0.0, 0.0, 2.0, grid_resolution);
  const double spacing = coarse.coarse_spacing;
  GridOptimum best = coarse;
  double half = 2.0 * spacing;
  for (int level = 0; level < 2; ++level) {
    const GridOptimum fine = search.scan(best.x, best.y, half, 101);
    if (fine.value < best.value) best = fine;
    half = 2.0 * fine.coarse_spacing;
  }
  best.coarse_spacing = spacing;
  best.error_bound = spacing / std::numbers::sqrt2;
  return best;
}

SupportReport verify_support_constraints(int N, int grid_resolution) {
  if (N < 5 || N > 12) throw DomainError("verify_support_constraints: N must lie in [5, 12]");
  if (grid_resolution < 400) {
    throw DomainError("verify_support_constraints: grid_resolution must be >= 400");
  }
  const MultiSample sample = counterexample_samples(N);
  std::vector<double> angles;
  for (const auto& d : sample.draws) angles.push_back(d(0));

  SupportReport report;
  report.N = N;
  report.grid_resolution = grid_resolution;
  report.closed_form_value = counterexample_optimum(N).z;
  const GridOptimum full = counterexample_grid_optimum(angles, grid_resolution);
  report.full_value = full.value;
  report.margin = full.error_bound;

  report.all_support = true;
  for (int i = 0; i < N; ++i) {
    std::vector<double> reduced = angles;
    reduced.erase(reduced.begin() + i);
    const double value = counterexample_grid_optimum(reduced, grid_resolution).value;
    const bool strict = value < report.full_value - report.margin;
    report.removal_values.push_back(value);
    report.is_support.push_back(strict);
    report.all_support = report.all_support && strict;
  }
  return report;
}

}  // namespace scenario_hull::problems

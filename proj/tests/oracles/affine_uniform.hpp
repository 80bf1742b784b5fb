// Copyright 2026 The scenario-hull Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// δ uniform on [0,1]², g(x, δ) = δᵀx − 1.  The violation probability of x
// is the area of {δ ∈ [0,1]² : δᵀx > 1}, computed by clipping the square.

#include <array>
#include <cmath>
#include <vector>

namespace oracle {

inline double halfplane_square_area(double a, double b, double c) {
  // Area of {(u, v) ∈ [0,1]² : a·u + b·v ≥ c}.
  std::vector<std::array<double, 2>> poly{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  std::vector<std::array<double, 2>> out;
  const auto side = [&](const std::array<double, 2>& p) { return a * p[0] + b * p[1] - c; };
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const auto& p = poly[i];
    const auto& q = poly[(i + 1) % poly.size()];
    const double sp = side(p), sq = side(q);
    if (sp >= 0) out.push_back(p);
    if ((sp >= 0) != (sq >= 0)) {
      const double t = sp / (sp - sq);
      out.push_back({p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])});
    }
  }
  double area = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto& p = out[i];
    const auto& q = out[(i + 1) % out.size()];
    area += p[0] * q[1] - q[0] * p[1];
  }
  return std::abs(area) / 2.0;
}

inline double affine_uniform_violation(double x1, double x2) {
  return halfplane_square_area(x1, x2, 1.0);
}

/// t > 0 with violation(t·u) = ε, for a direction u with a positive component.
inline double level_set_scale(double u1, double u2, double eps) {
  double lo = 0.0, hi = 1.0;
  while (affine_uniform_violation(hi * u1, hi * u2) < eps) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (affine_uniform_violation(mid * u1, mid * u2) < eps ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace oracle

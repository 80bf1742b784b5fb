// Copyright 2026 The scenario-hull Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Exact rational evaluation of the binomial lower tail for ε = p/100.

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>

namespace oracle {

inline double exact_binomial_tail(int p_percent, int zeta, int N) {
  using boost::multiprecision::cpp_int;
  using boost::multiprecision::cpp_rational;
  cpp_int numerator = 0;
  cpp_int choose = 1;  // C(N, j)
  for (int j = 0; j < zeta && j <= N; ++j) {
    if (j > 0) choose = choose * (N - j + 1) / j;
    cpp_int term = choose;
    for (int k = 0; k < j; ++k) term *= p_percent;
    for (int k = 0; k < N - j; ++k) term *= (100 - p_percent);
    numerator += term;
  }
  cpp_int denominator = 1;
  for (int k = 0; k < N; ++k) denominator *= 100;
  const cpp_rational value(numerator, denominator);
  return value.convert_to<double>();
}

}  // namespace oracle

// Copyright 2026 The scenario-hull Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

namespace scenario_hull {

/// SplitMix64 output finalizer; a bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derive an independent key from a parent key and an index.  Used to split
/// (master seed) -> (stream) -> (draw), so every draw is addressable without
/// generating its predecessors.
constexpr std::uint64_t derive_key(std::uint64_t parent, std::uint64_t index) noexcept {
  return mix64(mix64(parent ^ 0x6a09e667f3bcc909ULL) + 0x9e3779b97f4a7c15ULL * (index + 1));
}

/// Stream domains.  Each subsystem draws from its own domain so that, for
/// instance, the plant noise in closed loop never shares numbers with the
/// scenario samples used to build the controller.
enum class StreamDomain : std::uint64_t {
  kScenario = 1,
  kValidation = 2,
  kProbe = 3,
  kOptimize = 4,
  kTrial = 5,
  kMpcFirstStage = 16,
  kMpcCost = 17,
  kMpcLater = 18,
  kMpcPlant = 19,
  kMpcShooting = 20,
};

constexpr std::uint64_t stream_id(StreamDomain domain, std::uint64_t index) noexcept {
  return derive_key(static_cast<std::uint64_t>(domain), index);
}

/// Counter-based generator: the i-th output is mix64(key + (i+1)·γ).  No
/// hidden state besides the counter, so a (key, counter) pair fully
/// determines every subsequent number.
class CounterRng {
 public:
  explicit constexpr CounterRng(std::uint64_t key) noexcept : key_(key) {}
  constexpr CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept
      : key_(derive_key(seed, stream)) {}

  constexpr std::uint64_t next_u64() noexcept {
    ++counter_;
    return mix64(key_ + counter_ * 0x9e3779b97f4a7c15ULL);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1]; safe to take the logarithm of.
  double uniform_open() noexcept { return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53; }

  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  /// Standard normal by Box-Muller (one output per call).
  double normal() noexcept;

  /// Standard exponential.
  double exponential() noexcept;

  /// Child generator keyed off this generator's key; does not advance it.
  constexpr CounterRng split(std::uint64_t index) const noexcept {
    return CounterRng(derive_key(key_, index));
  }

  constexpr std::uint64_t key() const noexcept { return key_; }
  constexpr std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace scenario_hull

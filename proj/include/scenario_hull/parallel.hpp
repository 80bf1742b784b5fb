// Copyright 2026 The scenario-hull Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>

namespace scenario_hull {

/// Number of worker threads used when a caller passes 0: the
/// SCENARIO_HULL_THREADS environment variable if set, else 1.
std::size_t default_thread_count();

/// Runs body(i) for i in [0, count) on up to `threads` workers.  Work is
/// handed out by index, callers write results into slot i, so the merged
/// output never depends on scheduling.  The first exception thrown by any
/// body is rethrown after all workers have joined.
void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& body);

}  // namespace scenario_hull

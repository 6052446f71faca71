// Copyright 2026 The robustsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>

namespace robustsim {

/// Simulated time in integer milliseconds. Integer time keeps event ordering
/// and every derived metric bit-exact across runs.
using SimTimeMs = std::int64_t;

constexpr SimTimeMs kMsPerSecond = 1000;

inline SimTimeMs ms_from_s(double seconds) {
  return static_cast<SimTimeMs>(std::llround(seconds * 1000.0));
}

inline double s_from_ms(SimTimeMs ms) {
  return static_cast<double>(ms) / 1000.0;
}

}  // namespace robustsim

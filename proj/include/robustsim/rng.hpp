// Copyright 2026 The robustsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string_view>

namespace robustsim {

/// Splittable deterministic generator (splitmix64 core). Child streams are
/// derived from the parent's seed and a tag, not from its position, so
/// consuming one subsystem's stream never perturbs another's.
class SplitRng {
 public:
  explicit SplitRng(std::uint64_t seed) : seed_(seed), state_(seed) {}

  std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1).
  double uniform() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  bool bernoulli(double p) { return uniform() < p; }

  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound) {
    return bound == 0 ? 0 : next() % bound;
  }

  SplitRng split(std::uint64_t tag) const {
    std::uint64_t mixed = seed_ ^ (0x2545f4914f6cdd1dULL * (tag + 1));
    SplitRng scrambler(mixed);
    return SplitRng(scrambler.next());
  }

  SplitRng split(std::string_view tag) const {
    // FNV-1a over the tag, then the integer split.
    std::uint64_t h = 1469598103934665603ULL;
    for (char c : tag) {
      h ^= static_cast<unsigned char>(c);
      h *= 1099511628211ULL;
    }
    return split(h);
  }

 private:
  std::uint64_t seed_;
  std::uint64_t state_;
};

}  // namespace robustsim

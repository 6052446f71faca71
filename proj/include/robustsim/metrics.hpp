// Copyright 2026 The robustsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "robustsim/time.hpp"

namespace robustsim {

/// How a wall-clock interval was spent. `productive` counts toward ETTR;
/// everything else is unproductive. Checkpoint stalls and fail-slow excess
/// get their own classes so a degraded-but-progressing job never inflates
/// the ratio.
enum class SegmentClass {
  productive,
  detection,
  localization,
  failover,
  recompute,
  ckpt_stall,
  degraded,
};

const char* segment_class_name(SegmentClass cls);

struct Segment {
  SimTimeMs start = 0;
  SimTimeMs end = 0;
  SegmentClass cls = SegmentClass::productive;

  friend bool operator==(const Segment&, const Segment&) = default;
};

/// Contiguous, gap-free partition of the run's wall-clock interval.
class MetricsLedger {
 public:
  /// Appends [start, end); start must equal the current end of the ledger.
  /// Adjacent same-class segments merge.
  void append(SimTimeMs start, SimTimeMs end, SegmentClass cls);

  SimTimeMs end_time() const;
  SimTimeMs total(SegmentClass cls) const;
  SimTimeMs productive_until(SimTimeMs t) const;
  bool partitions(SimTimeMs horizon_end) const;

  const std::vector<Segment>& segments() const { return segments_; }
  void set_segments(std::vector<Segment> segments);

  friend bool operator==(const MetricsLedger&, const MetricsLedger&) = default;

 private:
  std::vector<Segment> segments_;
};

/// Cumulative ETTR at time t: productive(0..t) / t. Reported as 1.0 at t=0
/// (empty-run convention).
double ettr_cumulative_at(const MetricsLedger& ledger, SimTimeMs t);

/// Trailing-window ETTR at time t: productive within [t - w, t] / w, with the
/// window clipped to the run start (so it equals the cumulative ratio while
/// t < w).
double ettr_sliding_at(const MetricsLedger& ledger, SimTimeMs t,
                       SimTimeMs window);

struct EttrPoint {
  SimTimeMs at = 0;
  double ratio = 1.0;

  friend bool operator==(const EttrPoint&, const EttrPoint&) = default;
};

/// Series sampled at every segment boundary.
std::vector<EttrPoint> ettr_series_cumulative(const MetricsLedger& ledger);
std::vector<EttrPoint> ettr_series_sliding(const MetricsLedger& ledger,
                                           SimTimeMs window);

}  // namespace robustsim

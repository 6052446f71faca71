// Copyright 2026 The robustsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "robustsim/metrics.hpp"

#include <algorithm>
#include <stdexcept>

namespace robustsim {

const char* segment_class_name(SegmentClass cls) {
  switch (cls) {
    case SegmentClass::productive:
      return "productive";
    case SegmentClass::detection:
      return "detection";
    case SegmentClass::localization:
      return "localization";
    case SegmentClass::failover:
      return "failover";
    case SegmentClass::recompute:
      return "recompute";
    case SegmentClass::ckpt_stall:
      return "ckpt-stall";
    case SegmentClass::degraded:
      return "degraded";
  }
  return "?";
}

void MetricsLedger::append(SimTimeMs start, SimTimeMs end, SegmentClass cls) {
  if (end < start) {
    throw std::invalid_argument("ledger: segment end before start");
  }
  if (end == start) {
    return;
  }
  if (start != end_time()) {
    throw std::logic_error("ledger: segment must start at the current end");
  }
  if (!segments_.empty() && segments_.back().cls == cls) {
    segments_.back().end = end;
    return;
  }
  segments_.push_back({start, end, cls});
}

SimTimeMs MetricsLedger::end_time() const {
  return segments_.empty() ? 0 : segments_.back().end;
}

SimTimeMs MetricsLedger::total(SegmentClass cls) const {
  SimTimeMs sum = 0;
  for (const Segment& seg : segments_) {
    if (seg.cls == cls) {
      sum += seg.end - seg.start;
    }
  }
  return sum;
}

SimTimeMs MetricsLedger::productive_until(SimTimeMs t) const {
  SimTimeMs sum = 0;
  for (const Segment& seg : segments_) {
    if (seg.cls != SegmentClass::productive || seg.start >= t) {
      continue;
    }
    sum += std::min(seg.end, t) - seg.start;
  }
  return sum;
}

bool MetricsLedger::partitions(SimTimeMs horizon_end) const {
  SimTimeMs cursor = 0;
  for (const Segment& seg : segments_) {
    if (seg.start != cursor || seg.end < seg.start) {
      return false;
    }
    cursor = seg.end;
  }
  return cursor == horizon_end;
}

void MetricsLedger::set_segments(std::vector<Segment> segments) {
  segments_ = std::move(segments);
}

double ettr_cumulative_at(const MetricsLedger& ledger, SimTimeMs t) {
  if (t <= 0) {
    return 1.0;
  }
  return static_cast<double>(ledger.productive_until(t)) /
         static_cast<double>(t);
}

double ettr_sliding_at(const MetricsLedger& ledger, SimTimeMs t,
                       SimTimeMs window) {
  if (window <= 0) {
    throw std::invalid_argument("ettr: window must be positive");
  }
  if (t <= 0) {
    return 1.0;
  }
  const SimTimeMs lo = std::max<SimTimeMs>(0, t - window);
  const SimTimeMs len = t - lo;
  const SimTimeMs productive =
      ledger.productive_until(t) - ledger.productive_until(lo);
  return static_cast<double>(productive) / static_cast<double>(len);
}

namespace {

std::vector<SimTimeMs> boundaries(const MetricsLedger& ledger) {
  std::vector<SimTimeMs> points;
  points.push_back(0);
  for (const Segment& seg : ledger.segments()) {
    points.push_back(seg.end);
  }
  points.erase(std::unique(points.begin(), points.end()), points.end());
  return points;
}

}  // namespace

std::vector<EttrPoint> ettr_series_cumulative(const MetricsLedger& ledger) {
  std::vector<EttrPoint> series;
  for (SimTimeMs t : boundaries(ledger)) {
    series.push_back({t, ettr_cumulative_at(ledger, t)});
  }
  return series;
}

std::vector<EttrPoint> ettr_series_sliding(const MetricsLedger& ledger,
                                           SimTimeMs window) {
  std::vector<EttrPoint> series;
  for (SimTimeMs t : boundaries(ledger)) {
    series.push_back({t, ettr_sliding_at(ledger, t, window)});
  }
  return series;
}

}  // namespace robustsim

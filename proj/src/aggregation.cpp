// Copyright 2026 The robustsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "robustsim/aggregation.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <stdexcept>

namespace robustsim {

const char* process_role_name(ProcessRole role) {
  switch (role) {
    case ProcessRole::trainer:
      return "trainer";
    case ProcessRole::dataloader:
      return "dataloader";
    case ProcessRole::checkpointer:
      return "checkpointer";
  }
  return "?";
}

std::optional<ProcessRole> process_role_from_name(const std::string& name) {
  if (name == "trainer") return ProcessRole::trainer;
  if (name == "dataloader") return ProcessRole::dataloader;
  if (name == "checkpointer") return ProcessRole::checkpointer;
  return std::nullopt;
}

std::string strip_identifiers(std::string_view frame) {
  std::string out;
  out.reserve(frame.size());
  std::size_t i = 0;
  while (i < frame.size()) {
    char c = frame[i];
    if (c == '0' && i + 1 < frame.size() &&
        (frame[i + 1] == 'x' || frame[i + 1] == 'X')) {
      // hex address
      i += 2;
      while (i < frame.size() && std::isxdigit(static_cast<unsigned char>(frame[i]))) {
        ++i;
      }
      out += '#';
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      while (i < frame.size() &&
             std::isdigit(static_cast<unsigned char>(frame[i]))) {
        ++i;
      }
      out += '#';
      continue;
    }
    out += c;
    ++i;
  }
  return out;
}

StackGrouping cluster(const StackSnapshot& snapshot) {
  if (snapshot.machines.empty()) {
    throw std::invalid_argument("cluster: snapshot must be non-empty");
  }

  StackGrouping result;
  std::map<ProcessRole, std::map<std::string, std::set<int>>> by_role;
  for (const auto& [machine, entries] : snapshot.machines) {
    for (const StackEntry& entry : entries) {
      by_role[entry.role][strip_identifiers(entry.signature)].insert(machine);
    }
  }

  std::set<int> outliers;
  std::set<int> dominant;
  std::size_t dominant_count = 0;
  std::size_t contributor_count = 0;

  for (const auto& [role, groups] : by_role) {
    std::size_t largest = 0;
    for (const auto& [sig, members] : groups) {
      largest = std::max(largest, members.size());
    }
    std::set<int> role_contributors;
    for (const auto& [sig, members] : groups) {
      std::string key = std::string(process_role_name(role)) + ":" + sig;
      result.groups[key] = std::vector<int>(members.begin(), members.end());
      role_contributors.insert(members.begin(), members.end());
      if (members.size() == largest) {
        dominant.insert(members.begin(), members.end());
      } else {
        outliers.insert(members.begin(), members.end());
      }
    }
    contributor_count = std::max(contributor_count, role_contributors.size());
  }

  // A machine that is an outlier for any role is an outlier overall.
  for (int m : outliers) {
    dominant.erase(m);
  }
  result.outliers = std::vector<int>(outliers.begin(), outliers.end());
  result.dominant = std::vector<int>(dominant.begin(), dominant.end());
  dominant_count = result.dominant.size();
  result.dominant_share =
      contributor_count == 0
          ? 0.0
          : static_cast<double>(dominant_count) /
                static_cast<double>(snapshot.machines.size());
  return result;
}

std::vector<int> isolate(const StackGrouping& grouping,
                         const ParallelTopology& topo) {
  if (grouping.outliers.empty()) {
    throw std::invalid_argument("isolate: outlier set must be non-empty");
  }
  std::vector<int> outlier_ranks;
  for (int machine : grouping.outliers) {
    for (int rank : topo.ranks_on_machine(machine)) {
      outlier_ranks.push_back(rank);
    }
  }
  if (auto group = shared_group(outlier_ranks, topo)) {
    return group_machines(*group, topo);
  }
  return grouping.outliers;
}

std::optional<std::vector<int>> flag_round(const StackGrouping& grouping,
                                           const ParallelTopology& topo) {
  if (grouping.outliers.empty()) {
    return std::nullopt;
  }
  std::set<int> outliers(grouping.outliers.begin(), grouping.outliers.end());

  std::optional<std::vector<int>> best;
  std::size_t best_hits = 0;
  for (Axis axis : {Axis::PP, Axis::DP, Axis::TP}) {
    for (const std::vector<int>& span : machine_spans(axis, topo)) {
      std::size_t hits = 0;
      for (int machine : span) {
        if (outliers.count(machine)) {
          ++hits;
        }
      }
      if (hits > best_hits) {
        best_hits = hits;
        best = span;
      }
    }
  }
  return best;
}

std::optional<std::vector<int>> fail_slow_rounds(
    std::span<const StackSnapshot> rounds, const ParallelTopology& topo) {
  // Fixed span enumeration so vote ties resolve to the lowest group index.
  std::vector<std::vector<int>> spans;
  for (Axis axis : {Axis::PP, Axis::DP, Axis::TP}) {
    for (std::vector<int>& span : machine_spans(axis, topo)) {
      if (std::find(spans.begin(), spans.end(), span) == spans.end()) {
        spans.push_back(std::move(span));
      }
    }
  }

  std::vector<int> votes(spans.size(), 0);
  bool any = false;
  for (const StackSnapshot& snapshot : rounds) {
    if (snapshot.machines.empty()) {
      continue;
    }
    auto flagged = flag_round(cluster(snapshot), topo);
    if (!flagged) {
      continue;
    }
    auto it = std::find(spans.begin(), spans.end(), *flagged);
    if (it != spans.end()) {
      votes[static_cast<std::size_t>(it - spans.begin())] += 1;
      any = true;
    }
  }
  if (!any) {
    return std::nullopt;
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < spans.size(); ++i) {
    if (votes[i] > votes[best]) {
      best = i;
    }
  }
  return spans[best];
}

}  // namespace robustsim

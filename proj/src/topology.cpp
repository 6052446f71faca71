// Copyright 2026 The robustsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "robustsim/topology.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace robustsim {

const char* axis_name(Axis axis) {
  switch (axis) {
    case Axis::TP:
      return "TP";
    case Axis::PP:
      return "PP";
    case Axis::DP:
      return "DP";
  }
  return "?";
}

ParallelTopology::ParallelTopology(int tp_size, int pp_size, int dp_size,
                                   int ranks_per_machine)
    : tp_size_(tp_size),
      pp_size_(pp_size),
      dp_size_(dp_size),
      ranks_per_machine_(ranks_per_machine) {
  if (tp_size < 1 || pp_size < 1 || dp_size < 1) {
    throw std::invalid_argument("topology: axis sizes must be positive");
  }
  if (ranks_per_machine < 1) {
    throw std::invalid_argument("topology: ranks_per_machine must be >= 1");
  }
  rank_count_ = tp_size * pp_size * dp_size;
  if (rank_count_ % ranks_per_machine != 0) {
    throw std::invalid_argument(
        "topology: ranks_per_machine must divide the total rank count");
  }
  machine_count_ = rank_count_ / ranks_per_machine;
}

int ParallelTopology::axis_size(Axis axis) const {
  switch (axis) {
    case Axis::TP:
      return tp_size_;
    case Axis::PP:
      return pp_size_;
    case Axis::DP:
      return dp_size_;
  }
  return 0;
}

void ParallelTopology::check_rank(int rank) const {
  if (rank < 0 || rank >= rank_count_) {
    throw std::out_of_range("topology: rank " + std::to_string(rank) +
                            " outside [0, " + std::to_string(rank_count_) +
                            ")");
  }
}

void ParallelTopology::check_coord(const RankCoord& coord) const {
  if (coord.tp < 0 || coord.tp >= tp_size_ || coord.pp < 0 ||
      coord.pp >= pp_size_ || coord.dp < 0 || coord.dp >= dp_size_) {
    throw std::out_of_range("topology: coordinate outside axis bounds");
  }
}

RankCoord ParallelTopology::rank_to_coord(int rank) const {
  check_rank(rank);
  RankCoord coord;
  coord.tp = rank % tp_size_;
  coord.pp = (rank / tp_size_) % pp_size_;
  coord.dp = rank / (tp_size_ * pp_size_);
  return coord;
}

int ParallelTopology::coord_to_rank(const RankCoord& coord) const {
  check_coord(coord);
  return coord.dp * (pp_size_ * tp_size_) + coord.pp * tp_size_ + coord.tp;
}

int ParallelTopology::machine_of(int rank) const {
  check_rank(rank);
  return rank / ranks_per_machine_;
}

std::vector<int> ParallelTopology::ranks_on_machine(int machine) const {
  if (machine < 0 || machine >= machine_count_) {
    throw std::out_of_range("topology: machine " + std::to_string(machine) +
                            " outside [0, " + std::to_string(machine_count_) +
                            ")");
  }
  std::vector<int> ranks(static_cast<std::size_t>(ranks_per_machine_));
  for (int i = 0; i < ranks_per_machine_; ++i) {
    ranks[static_cast<std::size_t>(i)] = machine * ranks_per_machine_ + i;
  }
  return ranks;
}

std::vector<int> ParallelTopology::machines_of_ranks(
    std::span<const int> ranks) const {
  std::set<int> machines;
  for (int rank : ranks) {
    machines.insert(machine_of(rank));
  }
  return std::vector<int>(machines.begin(), machines.end());
}

std::string ParallelTopology::describe() const {
  std::ostringstream os;
  os << "TP=" << tp_size_ << ",PP=" << pp_size_ << ",DP=" << dp_size_
     << ",ranks/machine=" << ranks_per_machine_;
  return os.str();
}

GroupRef group_of(int rank, Axis axis, const ParallelTopology& topo) {
  RankCoord base = topo.rank_to_coord(rank);
  switch (axis) {
    case Axis::TP:
      base.tp = 0;
      break;
    case Axis::PP:
      base.pp = 0;
      break;
    case Axis::DP:
      base.dp = 0;
      break;
  }
  return GroupRef{axis, base};
}

std::vector<int> group_members(const GroupRef& group,
                               const ParallelTopology& topo) {
  const int size = topo.axis_size(group.axis);
  std::vector<int> members;
  members.reserve(static_cast<std::size_t>(size));
  RankCoord coord = group.base;
  for (int i = 0; i < size; ++i) {
    switch (group.axis) {
      case Axis::TP:
        coord.tp = i;
        break;
      case Axis::PP:
        coord.pp = i;
        break;
      case Axis::DP:
        coord.dp = i;
        break;
    }
    members.push_back(topo.coord_to_rank(coord));
  }
  std::sort(members.begin(), members.end());
  return members;
}

std::vector<int> group_machines(const GroupRef& group,
                                const ParallelTopology& topo) {
  std::vector<int> members = group_members(group, topo);
  return topo.machines_of_ranks(members);
}

std::vector<GroupRef> groups_on_axis(Axis axis, const ParallelTopology& topo) {
  std::vector<GroupRef> groups;
  std::set<GroupRef> seen;
  for (int rank = 0; rank < topo.rank_count(); ++rank) {
    GroupRef g = group_of(rank, axis, topo);
    if (seen.insert(g).second) {
      groups.push_back(g);
    }
  }
  return groups;
}

std::vector<std::vector<int>> machine_spans(Axis axis,
                                            const ParallelTopology& topo) {
  std::vector<std::vector<int>> spans;
  std::set<std::vector<int>> seen;
  for (const GroupRef& g : groups_on_axis(axis, topo)) {
    std::vector<int> span = group_machines(g, topo);
    if (seen.insert(span).second) {
      spans.push_back(std::move(span));
    }
  }
  return spans;
}

std::optional<GroupRef> shared_group(std::span<const int> outlier_ranks,
                                     const ParallelTopology& topo) {
  if (outlier_ranks.empty()) {
    throw std::invalid_argument("shared_group: outlier set must be non-empty");
  }
  std::vector<int> outlier_machines = topo.machines_of_ranks(outlier_ranks);

  std::optional<GroupRef> best;
  int best_size = 0;
  auto rank_of_axis = [](Axis a) {
    // Tie-break preference order.
    switch (a) {
      case Axis::PP:
        return 0;
      case Axis::DP:
        return 1;
      case Axis::TP:
        return 2;
    }
    return 3;
  };

  for (Axis axis : {Axis::PP, Axis::DP, Axis::TP}) {
    for (const GroupRef& g : groups_on_axis(axis, topo)) {
      std::vector<int> span = group_machines(g, topo);
      if (!std::includes(span.begin(), span.end(), outlier_machines.begin(),
                         outlier_machines.end())) {
        continue;
      }
      const int size = topo.axis_size(axis);
      if (!best || size < best_size ||
          (size == best_size &&
           rank_of_axis(axis) < rank_of_axis(best->axis))) {
        best = g;
        best_size = size;
      }
      break;  // instances on one axis all have the same size
    }
  }
  return best;
}

bool cross_group_ok(int rank, int peer, const ParallelTopology& topo) {
  if (rank == peer) {
    return false;
  }
  RankCoord a = topo.rank_to_coord(rank);
  RankCoord b = topo.rank_to_coord(peer);
  const bool same_tp_group = a.pp == b.pp && a.dp == b.dp;
  const bool same_pp_group = a.tp == b.tp && a.dp == b.dp;
  const bool same_dp_group = a.tp == b.tp && a.pp == b.pp;
  return !same_tp_group && !same_pp_group && !same_dp_group;
}

namespace {

bool machine_level_exchange(const std::vector<int>& peer_of,
                            const ParallelTopology& topo) {
  for (int machine = 0; machine < topo.machine_count(); ++machine) {
    int target = -1;
    for (int rank : topo.ranks_on_machine(machine)) {
      int peer_machine = topo.machine_of(peer_of[static_cast<std::size_t>(rank)]);
      if (target == -1) {
        target = peer_machine;
      } else if (target != peer_machine) {
        return false;
      }
    }
    if (target == machine && topo.machine_count() > 1) {
      return false;
    }
  }
  return true;
}

bool plan_satisfies_constraints(const std::vector<int>& peer_of,
                                const ParallelTopology& topo) {
  for (int rank = 0; rank < topo.rank_count(); ++rank) {
    int peer = peer_of[static_cast<std::size_t>(rank)];
    if (peer < 0 || peer >= topo.rank_count()) {
      return false;
    }
    if (!cross_group_ok(rank, peer, topo)) {
      return false;
    }
    if (peer_of[static_cast<std::size_t>(peer)] != rank) {
      return false;
    }
  }
  return machine_level_exchange(peer_of, topo);
}

std::optional<std::vector<int>> closed_form_plan(const ParallelTopology& topo) {
  if (topo.pp_size() % 2 != 0 || topo.dp_size() % 2 != 0) {
    return std::nullopt;
  }
  std::vector<int> peer_of(static_cast<std::size_t>(topo.rank_count()));
  const int dp_shift = topo.dp_size() / 2;
  for (int rank = 0; rank < topo.rank_count(); ++rank) {
    RankCoord c = topo.rank_to_coord(rank);
    RankCoord p{c.tp, c.pp ^ 1, (c.dp + dp_shift) % topo.dp_size()};
    peer_of[static_cast<std::size_t>(rank)] = topo.coord_to_rank(p);
  }
  if (!plan_satisfies_constraints(peer_of, topo)) {
    return std::nullopt;
  }
  return peer_of;
}

// Pairs whole machines, slot i on one machine with slot i on the other, so
// the machine-level exchange property holds by construction.
std::optional<std::vector<int>> greedy_machine_plan(
    const ParallelTopology& topo) {
  const int mc = topo.machine_count();
  if (mc % 2 != 0) {
    return std::nullopt;
  }
  auto pair_ok = [&](int a, int b) {
    for (int i = 0; i < topo.ranks_per_machine(); ++i) {
      int ra = a * topo.ranks_per_machine() + i;
      int rb = b * topo.ranks_per_machine() + i;
      if (!cross_group_ok(ra, rb, topo)) {
        return false;
      }
    }
    return true;
  };

  std::vector<int> machine_peer(static_cast<std::size_t>(mc), -1);
  for (int a = 0; a < mc; ++a) {
    if (machine_peer[static_cast<std::size_t>(a)] != -1) {
      continue;
    }
    bool paired = false;
    for (int b = a + 1; b < mc; ++b) {
      if (machine_peer[static_cast<std::size_t>(b)] == -1 && pair_ok(a, b)) {
        machine_peer[static_cast<std::size_t>(a)] = b;
        machine_peer[static_cast<std::size_t>(b)] = a;
        paired = true;
        break;
      }
    }
    if (!paired) {
      return std::nullopt;
    }
  }

  std::vector<int> peer_of(static_cast<std::size_t>(topo.rank_count()));
  for (int rank = 0; rank < topo.rank_count(); ++rank) {
    int machine = topo.machine_of(rank);
    int slot = rank % topo.ranks_per_machine();
    peer_of[static_cast<std::size_t>(rank)] =
        machine_peer[static_cast<std::size_t>(machine)] *
            topo.ranks_per_machine() +
        slot;
  }
  if (!plan_satisfies_constraints(peer_of, topo)) {
    return std::nullopt;
  }
  return peer_of;
}

std::vector<int> neighbor_plan(const ParallelTopology& topo) {
  if (topo.rank_count() % 2 != 0) {
    throw std::domain_error(
        "plan_backups: no pairing exists for an odd rank count");
  }
  std::vector<int> peer_of(static_cast<std::size_t>(topo.rank_count()));
  if (topo.machine_count() % 2 == 0) {
    for (int rank = 0; rank < topo.rank_count(); ++rank) {
      int machine = topo.machine_of(rank);
      int slot = rank % topo.ranks_per_machine();
      peer_of[static_cast<std::size_t>(rank)] =
          (machine ^ 1) * topo.ranks_per_machine() + slot;
    }
  } else {
    // Odd machine count: fall back to rank-level neighbor exchange. Pairs may
    // land on the same machine; this is the documented degenerate case.
    for (int rank = 0; rank < topo.rank_count(); ++rank) {
      peer_of[static_cast<std::size_t>(rank)] = rank ^ 1;
    }
  }
  return peer_of;
}

}  // namespace

BackupPlan plan_backups(const ParallelTopology& topo) {
  if (auto plan = closed_form_plan(topo)) {
    return BackupPlan{std::move(*plan), false};
  }
  if (auto plan = greedy_machine_plan(topo)) {
    return BackupPlan{std::move(*plan), false};
  }
  return BackupPlan{neighbor_plan(topo), true};
}

int backup_peer(int rank, const ParallelTopology& topo) {
  if (rank < 0 || rank >= topo.rank_count()) {
    throw std::out_of_range("backup_peer: rank out of range");
  }
  return plan_backups(topo).peer_of[static_cast<std::size_t>(rank)];
}

}  // namespace robustsim

// Copyright 2026 The robustsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "robustsim/topology.hpp"

#include <algorithm>
#include <set>
#include <vector>

#include <stdexcept>

#include <doctest.h>

using namespace robustsim;

namespace {

// Enumeration oracle: the covering group instance with the fewest members,
// at machine granularity, preferring PP over DP over TP on size ties.
std::optional<GroupRef> shared_group_oracle(const std::vector<int>& outliers,
                                            const ParallelTopology& topo) {
  std::vector<int> outlier_machines = topo.machines_of_ranks(outliers);
  std::optional<GroupRef> best;
  int best_size = 0;
  int best_pref = 99;
  auto pref = [](Axis a) { return a == Axis::PP ? 0 : a == Axis::DP ? 1 : 2; };
  for (Axis axis : {Axis::TP, Axis::PP, Axis::DP}) {
    for (const GroupRef& g : groups_on_axis(axis, topo)) {
      std::vector<int> span = group_machines(g, topo);
      if (!std::includes(span.begin(), span.end(), outlier_machines.begin(),
                         outlier_machines.end())) {
        continue;
      }
      int size = topo.axis_size(axis);
      if (!best || size < best_size ||
          (size == best_size && pref(axis) < best_pref)) {
        best = g;
        best_size = size;
        best_pref = pref(axis);
      }
    }
  }
  return best;
}

}  // namespace

TEST_CASE("rank/coord layout is TP-fastest, PP-middle, DP-slowest") {
  ParallelTopology topo(2, 4, 2);
  CHECK(topo.rank_to_coord(0) == RankCoord{0, 0, 0});
  CHECK(topo.rank_to_coord(8) == RankCoord{0, 0, 1});
  CHECK(topo.rank_to_coord(2) == RankCoord{0, 1, 0});
  CHECK(topo.coord_to_rank({0, 0, 1}) == 8);
  CHECK_THROWS_AS(topo.rank_to_coord(16), std::out_of_range);
  CHECK_THROWS_AS(topo.rank_to_coord(-1), std::out_of_range);
}

TEST_CASE("coord<->rank round-trips over assorted topologies") {
  for (int tp : {1, 2, 3, 4}) {
    for (int pp : {1, 2, 4}) {
      for (int dp : {1, 2, 6}) {
        ParallelTopology topo(tp, pp, dp);
        std::set<int> seen;
        for (int rank = 0; rank < topo.rank_count(); ++rank) {
          RankCoord coord = topo.rank_to_coord(rank);
          CHECK(topo.coord_to_rank(coord) == rank);
          seen.insert(rank);
        }
        CHECK(static_cast<int>(seen.size()) == topo.rank_count());
      }
    }
  }
}

TEST_CASE("topology construction validates its inputs") {
  CHECK_THROWS_AS(ParallelTopology(0, 2, 2), std::invalid_argument);
  CHECK_THROWS_AS(ParallelTopology(2, 2, 2, 3), std::invalid_argument);
  CHECK_THROWS_AS(ParallelTopology(2, 2, 2, 0), std::invalid_argument);
  ParallelTopology topo(2, 4, 4, 2);
  CHECK(topo.machine_count() == 16);
  CHECK(topo.machine_of(24) == 12);
  CHECK(topo.ranks_on_machine(12) == std::vector<int>{24, 25});
}

TEST_CASE("group membership") {
  ParallelTopology topo(2, 4, 2);
  CHECK(group_members(group_of(8, Axis::PP, topo), topo) ==
        std::vector<int>{8, 10, 12, 14});
  CHECK(group_members(group_of(2, Axis::TP, topo), topo) ==
        std::vector<int>{2, 3});

  ParallelTopology single_dp(2, 4, 1);
  CHECK(group_members(group_of(0, Axis::DP, single_dp), single_dp) ==
        std::vector<int>{0});
}

TEST_CASE("shared_group finds the covering PP group in the hang example") {
  // TP=2, PP=4, DP=4, one TP group per machine: machines 12-15 host the
  // outlier ranks.
  ParallelTopology topo(2, 4, 4, 2);
  std::vector<int> outliers;
  for (int machine = 12; machine <= 15; ++machine) {
    for (int rank : topo.ranks_on_machine(machine)) {
      outliers.push_back(rank);
    }
  }
  auto group = shared_group(outliers, topo);
  REQUIRE(group.has_value());
  CHECK(group->axis == Axis::PP);
  CHECK(group_machines(*group, topo) == std::vector<int>{12, 13, 14, 15});
}

TEST_CASE("shared_group singleton picks the smallest covering axis") {
  ParallelTopology topo(2, 4, 2);
  auto group = shared_group(std::vector<int>{7}, topo);
  REQUIRE(group.has_value());
  // Smallest axis size is 2 (TP and DP tie); DP is preferred over TP.
  CHECK(group->axis == Axis::DP);
  std::vector<int> members = group_members(*group, topo);
  CHECK(std::find(members.begin(), members.end(), 7) != members.end());
}

TEST_CASE("shared_group absent when outliers span two PP and two DP groups") {
  ParallelTopology topo(2, 2, 2);
  // Ranks 0 (tp0,pp0,dp0) and 7 (tp1,pp1,dp1) share no group on any axis.
  CHECK(!shared_group(std::vector<int>{0, 7}, topo).has_value());
}

TEST_CASE("shared_group agrees with the enumeration oracle") {
  std::vector<ParallelTopology> topologies = {
      {2, 2, 2}, {2, 4, 4, 2}, {1, 2, 4}, {4, 2, 2, 4}, {2, 4, 2}};
  for (const ParallelTopology& topo : topologies) {
    // All singletons plus a spread of pairs and triples.
    std::vector<std::vector<int>> cases;
    for (int r = 0; r < topo.rank_count(); ++r) {
      cases.push_back({r});
    }
    for (int a = 0; a < topo.rank_count(); a += 3) {
      for (int b = a + 1; b < topo.rank_count(); b += 5) {
        cases.push_back({a, b});
        if (b + 2 < topo.rank_count()) {
          cases.push_back({a, b, b + 2});
        }
      }
    }
    for (const auto& outliers : cases) {
      auto got = shared_group(outliers, topo);
      auto want = shared_group_oracle(outliers, topo);
      REQUIRE(got.has_value() == want.has_value());
      if (got) {
        CHECK(topo.axis_size(got->axis) == topo.axis_size(want->axis));
        CHECK(got->axis == want->axis);
        // Covering property at machine granularity.
        std::vector<int> span = group_machines(*got, topo);
        std::vector<int> outlier_machines = topo.machines_of_ranks(outliers);
        CHECK(std::includes(span.begin(), span.end(), outlier_machines.begin(),
                            outlier_machines.end()));
        // With one rank per machine this is plain rank containment.
        if (topo.ranks_per_machine() == 1) {
          std::vector<int> members = group_members(*got, topo);
          CHECK(std::includes(members.begin(), members.end(),
                              outliers.begin(), outliers.end()));
        }
      }
    }
  }
}

TEST_CASE("backup_peer reproduces the optimizer-exchange example") {
  ParallelTopology topo(2, 4, 2);
  CHECK(backup_peer(8, topo) == 2);
  CHECK(backup_peer(9, topo) == 3);
  CHECK(backup_peer(2, topo) == 8);  // involution
}

TEST_CASE("backup_peer falls back to neighboring machines on one axis") {
  ParallelTopology topo(1, 1, 4);
  BackupPlan plan = plan_backups(topo);
  CHECK(plan.neighbor_fallback);
  CHECK(plan.peer_of == std::vector<int>{1, 0, 3, 2});
}

TEST_CASE("backup plans satisfy the cross-group constraints on the grid") {
  for (int tp : {1, 2, 4, 8}) {
    for (int pp : {2, 4, 8}) {
      for (int dp : {2, 4, 8}) {
        if (tp * pp * dp > 512) {
          continue;
        }
        for (int rpm : {1, 2}) {
          if ((tp * pp * dp) % rpm != 0) {
            continue;
          }
          ParallelTopology topo(tp, pp, dp, rpm);
          BackupPlan plan = plan_backups(topo);
          CHECK(!plan.neighbor_fallback);
          std::set<int> used;
          for (int rank = 0; rank < topo.rank_count(); ++rank) {
            int peer = plan.peer_of[static_cast<std::size_t>(rank)];
            CHECK(cross_group_ok(rank, peer, topo));
            CHECK(plan.peer_of[static_cast<std::size_t>(peer)] == rank);
            used.insert(peer);
            // Group-membership phrasing of the same constraint.
            for (Axis axis : {Axis::TP, Axis::PP, Axis::DP}) {
              std::vector<int> members =
                  group_members(group_of(rank, axis, topo), topo);
              CHECK(std::find(members.begin(), members.end(), peer) ==
                    members.end());
            }
          }
          // Perfect matching covers every rank.
          CHECK(static_cast<int>(used.size()) == topo.rank_count());
          // Machine-level exchange: all of a machine's peers on one machine.
          for (int machine = 0; machine < topo.machine_count(); ++machine) {
            std::set<int> peer_machines;
            for (int rank : topo.ranks_on_machine(machine)) {
              peer_machines.insert(topo.machine_of(
                  plan.peer_of[static_cast<std::size_t>(rank)]));
            }
            CHECK(peer_machines.size() == 1);
            CHECK(!peer_machines.count(machine));
          }
        }
      }
    }
  }
}

TEST_CASE("machine_spans deduplicates instances sharing a footprint") {
  ParallelTopology topo(2, 4, 4, 2);
  auto spans = machine_spans(Axis::PP, topo);
  // Two TP-siblings share each footprint: 8 PP instances, 4 distinct spans.
  CHECK(spans.size() == 4);
  CHECK(spans[3] == std::vector<int>{12, 13, 14, 15});
}

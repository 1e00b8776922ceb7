#pragma once

// Minimum-degree greedy partition of a conflict graph into SDMA groups.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <vector>

#include "mmiab/graphs.hpp"

namespace mmiab {

/// Ordered groups of links that transmit simultaneously. Each group is
/// sorted by link id.
struct SdmaGroups {
  std::vector<std::vector<LinkId>> groups;

  std::size_t count() const { return groups.size(); }

  friend bool operator==(const SdmaGroups&, const SdmaGroups&) = default;
};

/// Repeatedly peels a maximal independent set off the residual graph. Within
/// a group the vertex of minimum degree among the still-eligible candidates
/// is taken next; ties go to the lowest link id.
inline SdmaGroups cg_mis_schedule(const ConflictGraph& cg) {
  const std::size_t n = cg.size();
  std::vector<char> grouped(n, 0);
  std::size_t remaining = n;
  SdmaGroups out;

  std::vector<char> candidate(n);
  std::vector<std::size_t> degree(n);
  while (remaining > 0) {
    for (std::size_t v = 0; v < n; ++v) candidate[v] = !grouped[v];
    for (std::size_t v = 0; v < n; ++v) {
      if (!candidate[v]) continue;
      degree[v] = 0;
      for (auto u : cg.neighbors(v)) degree[v] += candidate[u] ? 1 : 0;
    }

    std::vector<LinkId> group;
    auto drop = [&](std::size_t v) {
      candidate[v] = 0;
      for (auto u : cg.neighbors(v))
        if (candidate[u]) --degree[u];
    };
    for (;;) {
      std::size_t best = n;
      for (std::size_t v = 0; v < n; ++v)
        if (candidate[v] && (best == n || degree[v] < degree[best])) best = v;
      if (best == n) break;
      group.push_back(cg.link(best));
      grouped[best] = 1;
      --remaining;
      const auto nbrs = cg.neighbors(best);
      drop(best);
      for (auto u : nbrs)
        if (candidate[u]) drop(u);
    }
    std::sort(group.begin(), group.end());
    out.groups.push_back(std::move(group));
  }
  return out;
}

/// True iff `groups` partitions the vertex set of `cg` into independent sets.
inline bool validate_schedule(const ConflictGraph& cg, const SdmaGroups& groups) {
  std::vector<int> owner(cg.size(), -1);
  for (std::size_t k = 0; k < groups.groups.size(); ++k) {
    for (LinkId l : groups.groups[k]) {
      const auto v = cg.index_of(l);
      if (!v || owner[*v] != -1) return false;
      owner[*v] = static_cast<int>(k);
    }
  }
  if (std::find(owner.begin(), owner.end(), -1) != owner.end()) return false;
  for (std::size_t v = 0; v < cg.size(); ++v)
    for (auto u : cg.neighbors(v))
      if (owner[v] == owner[u]) return false;
  return true;
}

}  // namespace mmiab

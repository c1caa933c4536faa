#pragma once

// Brute-force references for the page-graph algorithms.

#include <climits>
#include <functional>
#include <set>
#include <vector>

#include "mimir/graph.hpp"
#include "support/fixtures.hpp"

namespace test {

inline mimir::PageGraph from_link_graph(const test::LinkGraph& lg) {
  mimir::PageGraph g;
  for (const auto& h : lg.hosts) g.add_node(h);
  for (std::size_t u = 0; u < lg.out.size(); ++u) {
    for (std::size_t v : lg.out[u]) g.add_edge(u, v);
  }
  return g;
}

// Component label per node by repeated BFS over undirected adjacency lists.
inline std::vector<std::size_t> oracle_components(const test::LinkGraph& lg) {
  const std::size_t n = lg.hosts.size();
  std::vector<std::vector<std::size_t>> adj(n);
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v : lg.out[u]) {
      adj[u].push_back(v);
      adj[v].push_back(u);
    }
  }
  std::vector<std::size_t> label(n, SIZE_MAX);
  std::size_t next = 0;
  for (std::size_t s = 0; s < n; ++s) {
    if (label[s] != SIZE_MAX) continue;
    std::vector<std::size_t> queue{s};
    label[s] = next;
    for (std::size_t k = 0; k < queue.size(); ++k) {
      for (std::size_t v : adj[queue[k]]) {
        if (label[v] == SIZE_MAX) {
          label[v] = next;
          queue.push_back(v);
        }
      }
    }
    ++next;
  }
  return label;
}

// Fixed-point relaxation: sources at 0, surface nodes capped at 1.
inline std::vector<int> oracle_depths(const test::LinkGraph& lg, const std::set<std::size_t>& sources,
                               const std::set<std::size_t>& surface) {
  const int inf = INT_MAX / 2;
  std::vector<int> d(lg.hosts.size(), inf);
  for (auto s : surface) d[s] = 1;
  for (auto s : sources) d[s] = 0;
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t u = 0; u < lg.out.size(); ++u) {
      for (std::size_t v : lg.out[u]) {
        if (d[u] + 1 < d[v]) {
          d[v] = d[u] + 1;
          changed = true;
        }
      }
    }
  }
  for (auto& x : d) x = x == inf ? -1 : x;
  return d;
}

inline std::set<std::size_t> oracle_reach(const test::LinkGraph& lg, const std::set<std::size_t>& start) {
  std::vector<bool> seen(lg.hosts.size(), false);
  std::function<void(std::size_t)> dfs = [&](std::size_t u) {
    if (seen[u]) return;
    seen[u] = true;
    for (std::size_t v : lg.out[u]) dfs(v);
  };
  for (auto s : start) dfs(s);
  std::set<std::size_t> out;
  for (std::size_t i = 0; i < seen.size(); ++i) {
    if (seen[i]) out.insert(i);
  }
  return out;
}

}  // namespace test

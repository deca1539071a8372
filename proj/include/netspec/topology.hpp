#pragma once

#include <algorithm>
#include <stdexcept>

#include "netspec/errors.hpp"
#include <string>
#include <utility>
#include <vector>

namespace netspec {

// Undirected agent graph with kappa-hop neighborhood queries. Immutable after
// construction; all neighborhood lists are returned sorted ascending so that
// any state/action concatenation built from them has a deterministic layout.
class Topology {
 public:
  Topology(int n, const std::vector<std::pair<int, int>>& edges) : n_(n), adj_(n) {
    if (n < 1) throw ConfigError("topology: agent count must be positive");
    for (auto [a, b] : edges) {
      if (a < 0 || b < 0 || a >= n || b >= n)
        throw ConfigError("topology: edge endpoint out of range");
      if (a == b) throw ConfigError("topology: self-loop rejected");
      adj_[a].push_back(b);
      adj_[b].push_back(a);
    }
    for (auto& nb : adj_) {
      std::sort(nb.begin(), nb.end());
      if (std::adjacent_find(nb.begin(), nb.end()) != nb.end())
        throw ConfigError("topology: duplicate edge rejected");
    }
  }

  int n() const { return n_; }

  // 1-hop neighbors of i, excluding i itself.
  const std::vector<int>& neighbors(int i) const {
    check_index(i);
    return adj_[i];
  }

  // All agents at graph distance <= kappa from i, sorted ascending (includes i).
  std::vector<int> khop(int i, int kappa) const {
    check_index(i);
    if (kappa < 0) throw ConfigError("topology: kappa must be >= 0");
    std::vector<int> dist = bfs(i);
    std::vector<int> out;
    for (int j = 0; j < n_; ++j)
      if (dist[j] >= 0 && dist[j] <= kappa) out.push_back(j);
    return out;
  }

  // Complement N \ khop(i, kappa), sorted ascending.
  std::vector<int> khop_complement(int i, int kappa) const {
    std::vector<int> in = khop(i, kappa);
    std::vector<int> out;
    out.reserve(n_ - in.size());
    auto it = in.begin();
    for (int j = 0; j < n_; ++j) {
      if (it != in.end() && *it == j) {
        ++it;
      } else {
        out.push_back(j);
      }
    }
    return out;
  }

  // Max shortest-path distance over all pairs. Throws on disconnected graphs.
  int diameter() const {
    int d = 0;
    for (int i = 0; i < n_; ++i) d = std::max(d, eccentricity(i));
    return d;
  }

  int eccentricity(int i) const {
    check_index(i);
    std::vector<int> dist = bfs(i);
    int e = 0;
    for (int j = 0; j < n_; ++j) {
      if (dist[j] < 0)
        throw ConfigError("topology: graph is disconnected");
      e = std::max(e, dist[j]);
    }
    return e;
  }

 private:
  void check_index(int i) const {
    if (i < 0 || i >= n_)
      throw ConfigError("topology: agent index " + std::to_string(i) + " out of range");
  }

  std::vector<int> bfs(int src) const {
    std::vector<int> dist(n_, -1);
    std::vector<int> frontier{src};
    dist[src] = 0;
    int level = 0;
    while (!frontier.empty()) {
      ++level;
      std::vector<int> next;
      for (int u : frontier)
        for (int v : adj_[u])
          if (dist[v] < 0) {
            dist[v] = level;
            next.push_back(v);
          }
      frontier.swap(next);
    }
    return dist;
  }

  int n_;
  std::vector<std::vector<int>> adj_;
};

// Ring of n agents: i adjacent to (i-1 mod n) and (i+1 mod n). Requires n >= 3.
inline Topology build_ring(int n) {
  if (n < 3) throw ConfigError("build_ring: need at least 3 agents");
  std::vector<std::pair<int, int>> edges;
  edges.reserve(n);
  for (int i = 0; i < n; ++i) edges.emplace_back(i, (i + 1) % n);
  return Topology(n, edges);
}

}  // namespace netspec

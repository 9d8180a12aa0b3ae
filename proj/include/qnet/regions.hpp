#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "qnet/linalg.hpp"

namespace qnet {

/// Departure region represented by its vertex list; the convex hull is never
/// materialized. Max-scalar objectives are linear, so the argmax over the
/// hull is attained at a vertex, and every vertex is a feasible departure
/// vector by construction.
struct DepartureRegion {
  std::string label;
  std::vector<IntVec> vertices;

  std::size_t dim() const {
    return vertices.empty() ? 0 : vertices.front().size();
  }

  std::int64_t d_max() const {
    std::int64_t d = 0;
    for (const auto& v : vertices)
      for (auto c : v) d = std::max(d, c);
    return d;
  }

  /// Index of the all-zero vertex (idling).
  int zero_vertex() const {
    for (std::size_t i = 0; i < vertices.size(); ++i) {
      bool zero = true;
      for (auto c : vertices[i])
        if (c != 0) {
          zero = false;
          break;
        }
      if (zero) return static_cast<int>(i);
    }
    return -1;
  }

  void validate(std::size_t n_queues,
                std::int64_t declared_d_max = -1) const {
    if (vertices.empty())
      throw std::invalid_argument("region '" + label + "': no vertices");
    for (const auto& v : vertices) {
      if (v.size() != n_queues)
        throw std::invalid_argument("region '" + label +
                                    "': vertex dimension mismatch");
      for (auto c : v)
        if (c < 0)
          throw std::invalid_argument("region '" + label +
                                      "': negative vertex component");
      if (declared_d_max >= 0)
        for (auto c : v)
          if (c > declared_d_max)
            throw std::invalid_argument("region '" + label +
                                        "': vertex exceeds d_max");
    }
    if (zero_vertex() < 0)
      throw std::invalid_argument("region '" + label +
                                  "': zero vertex (idling) missing");
    auto sorted = vertices;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw std::invalid_argument("region '" + label +
                                  "': duplicate vertices");
  }
};

/// Undirected conflict structure over virtual queues: an edge joins two
/// queues that cannot be served in the same slot.
struct ContentionGraph {
  int n_vertices = 0;
  std::vector<std::pair<int, int>> edges;

  void validate() const {
    for (auto [a, b] : edges) {
      if (a == b) throw std::invalid_argument("contention graph: self-loop");
      if (a < 0 || b < 0 || a >= n_vertices || b >= n_vertices)
        throw std::invalid_argument("contention graph: edge out of range");
    }
  }
};

/// All sub-permutation 0/1 matrices of an n-port crossbar, flattened
/// row-major to length n^2 (VOQ m = i*n + j stores input i, output j).
/// Vertex 0 is the all-zero (idle) schedule. Count is sum_k C(n,k)^2 k!.
inline DepartureRegion switch_region(int n) {
  if (n < 1) throw std::invalid_argument("switch_region: need n >= 1");
  if (n > 6)
    throw std::invalid_argument(
        "switch_region: enumeration guarded at n <= 6");
  DepartureRegion r;
  r.label = "switch" + std::to_string(n);
  IntVec current(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0);
  std::vector<bool> output_used(static_cast<std::size_t>(n), false);
  // Row by row; "no transfer" is explored first so partial matchings
  // precede their extensions and the zero schedule gets id 0.
  auto rec = [&](auto&& self, int input) -> void {
    if (input == n) {
      r.vertices.push_back(current);
      return;
    }
    self(self, input + 1);
    for (int out = 0; out < n; ++out) {
      if (output_used[static_cast<std::size_t>(out)]) continue;
      output_used[static_cast<std::size_t>(out)] = true;
      current[static_cast<std::size_t>(input * n + out)] = 1;
      self(self, input + 1);
      current[static_cast<std::size_t>(input * n + out)] = 0;
      output_used[static_cast<std::size_t>(out)] = false;
    }
  };
  rec(rec, 0);
  return r;
}

/// Indicator vectors of every independent set of the contention graph,
/// including the empty set, so the region is closed under subsets.
inline DepartureRegion independent_set_region(const ContentionGraph& g) {
  g.validate();
  if (g.n_vertices < 1)
    throw std::invalid_argument("independent_set_region: empty graph");
  if (g.n_vertices > 24)
    throw std::invalid_argument(
        "independent_set_region: enumeration guarded at 24 vertices");
  std::vector<std::uint32_t> adj(static_cast<std::size_t>(g.n_vertices), 0);
  for (auto [a, b] : g.edges) {
    adj[static_cast<std::size_t>(a)] |= 1u << b;
    adj[static_cast<std::size_t>(b)] |= 1u << a;
  }
  DepartureRegion r;
  r.label = "independent-sets";
  const std::uint32_t total = 1u << g.n_vertices;
  for (std::uint32_t mask = 0; mask < total; ++mask) {
    bool independent = true;
    for (int v = 0; v < g.n_vertices && independent; ++v)
      if ((mask >> v) & 1u)
        // conflicts against lower-indexed selected vertices only
        if (mask & adj[static_cast<std::size_t>(v)] & ((1u << v) - 1u))
          independent = false;
    if (!independent) continue;
    IntVec vec(static_cast<std::size_t>(g.n_vertices), 0);
    for (int v = 0; v < g.n_vertices; ++v)
      vec[static_cast<std::size_t>(v)] = (mask >> v) & 1u;
    r.vertices.push_back(std::move(vec));
  }
  return r;
}

struct Candidate {
  IntVec departures;
  int vertex_id = 0;  // lowest originating vertex on duplicates
};

/// Truncations min(v, x) of every region vertex, deduplicated. Every
/// candidate satisfies candidate <= x, so downstream step() preconditions
/// hold for any policy choice.
inline std::vector<Candidate> feasible_candidates(const DepartureRegion& r,
                                                  const QueueState& x) {
  std::vector<Candidate> out;
  std::map<IntVec, std::size_t> seen;
  for (std::size_t id = 0; id < r.vertices.size(); ++id) {
    IntVec t = truncate(r.vertices[id], x);
    auto [it, inserted] = seen.emplace(std::move(t), out.size());
    if (inserted)
      out.push_back({it->first, static_cast<int>(id)});
  }
  return out;
}

}  // namespace qnet

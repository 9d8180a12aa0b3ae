#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "qnet/linalg.hpp"

namespace qnet {

struct Flow {
  std::string name;
  std::vector<int> path;  // ordered virtual-queue indexes toward destination
};

/// Network of physical queues, each holding per-flow virtual queues.
/// Departures from virtual queue m re-enter queue p when routing[m][p] == 1;
/// routes are fixed simple paths, so the routing matrix is nilpotent.
struct NetworkTopology {
  int n_physical = 0;
  int m_virtual = 0;
  IntMatrix routing;                       // M x M, entries in {0,1}
  std::vector<Flow> flows;
  std::vector<int> pq_map;                 // virtual -> physical
  std::vector<std::vector<int>> vq_map;    // physical -> virtual indexes
  std::vector<int> fl_map;                 // virtual -> flow index

  const std::vector<int>& fp_map(int flow) const {
    return flows[static_cast<std::size_t>(flow)].path;
  }

  /// Index of the downstream queue of m, or -1 when departures leave the
  /// network. Valid topologies have at most one nonzero per routing row.
  int downstream(int m) const {
    const auto& row = routing[static_cast<std::size_t>(m)];
    for (int p = 0; p < m_virtual; ++p)
      if (row[static_cast<std::size_t>(p)] != 0) return p;
    return -1;
  }
};

struct TopologyViolation {
  std::string code;
  std::string message;
};

struct TopologyReport {
  std::vector<TopologyViolation> violations;
  // Present iff there are no violations; equals sum_k R^k (finite by
  // nilpotency), a nonnegative integer matrix.
  std::optional<IntMatrix> i_minus_r_inverse;

  bool valid() const { return violations.empty(); }
};

namespace detail {

inline IntMatrix int_identity(int n) {
  IntMatrix m(static_cast<std::size_t>(n),
              IntVec(static_cast<std::size_t>(n), 0));
  for (int i = 0; i < n; ++i)
    m[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = 1;
  return m;
}

inline IntMatrix int_matmul(const IntMatrix& a, const IntMatrix& b) {
  const std::size_t n = a.size();
  IntMatrix c(n, IntVec(n, 0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      if (a[i][k] == 0) continue;
      for (std::size_t j = 0; j < n; ++j) c[i][j] += a[i][k] * b[k][j];
    }
  return c;
}

inline bool is_zero(const IntMatrix& a) {
  for (const auto& row : a)
    for (auto v : row)
      if (v != 0) return false;
  return true;
}

}  // namespace detail

/// Checks the structural invariants; violations are data, not faults.
/// On a clean topology the report carries (I-R)^{-1}.
inline TopologyReport validate_topology(const NetworkTopology& t) {
  TopologyReport rep;
  auto flag = [&](std::string code, std::string msg) {
    rep.violations.push_back({std::move(code), std::move(msg)});
  };

  const int m = t.m_virtual;
  if (m <= 0) {
    flag("dimensions", "m_virtual must be positive");
    return rep;
  }
  if (t.routing.size() != static_cast<std::size_t>(m)) {
    flag("dimensions", "routing matrix row count != m_virtual");
    return rep;
  }
  for (const auto& row : t.routing)
    if (row.size() != static_cast<std::size_t>(m)) {
      flag("dimensions", "routing matrix is not square");
      return rep;
    }

  bool binary = true;
  for (int i = 0; i < m && binary; ++i) {
    std::int64_t row_sum = 0;
    for (int j = 0; j < m; ++j) {
      auto v = t.routing[static_cast<std::size_t>(i)]
                        [static_cast<std::size_t>(j)];
      if (v != 0 && v != 1) {
        flag("non-binary", "routing entry (" + std::to_string(i) + "," +
                               std::to_string(j) + ") not in {0,1}");
        binary = false;
        break;
      }
      row_sum += v;
    }
    if (binary && row_sum > 1)
      flag("forking", "routing row " + std::to_string(i) +
                          " has more than one destination");
  }

  // Nilpotency: R^M must vanish for simple paths.
  bool nilpotent = false;
  if (binary) {
    IntMatrix pw = t.routing;
    for (int k = 1; k < m && !detail::is_zero(pw); ++k)
      pw = detail::int_matmul(pw, t.routing);
    nilpotent = detail::is_zero(pw);
    if (!nilpotent) flag("non-nilpotent routing", "routing contains a cycle");
  }

  if (t.pq_map.size() != static_cast<std::size_t>(m))
    flag("pq-map", "pq_map size != m_virtual");
  else
    for (int i = 0; i < m; ++i) {
      int q = t.pq_map[static_cast<std::size_t>(i)];
      if (q < 0 || q >= t.n_physical)
        flag("pq-map", "virtual queue " + std::to_string(i) +
                           " maps to invalid physical queue");
    }

  if (t.vq_map.size() != static_cast<std::size_t>(t.n_physical))
    flag("vq-map", "vq_map size != n_physical");
  else if (t.pq_map.size() == static_cast<std::size_t>(m)) {
    for (int q = 0; q < t.n_physical; ++q)
      for (int v : t.vq_map[static_cast<std::size_t>(q)])
        if (v < 0 || v >= m || t.pq_map[static_cast<std::size_t>(v)] != q)
          flag("vq-map", "vq_map/pq_map inconsistent at physical queue " +
                             std::to_string(q));
  }

  if (t.fl_map.size() != static_cast<std::size_t>(m))
    flag("fl-map", "fl_map size != m_virtual");

  for (std::size_t f = 0; f < t.flows.size(); ++f) {
    const auto& path = t.flows[f].path;
    for (std::size_t i = 0; i < path.size(); ++i) {
      int v = path[i];
      if (v < 0 || v >= m) {
        flag("fp-map", "flow " + std::to_string(f) + " path index out of range");
        continue;
      }
      if (t.fl_map.size() == static_cast<std::size_t>(m) &&
          t.fl_map[static_cast<std::size_t>(v)] != static_cast<int>(f))
        flag("fl-map", "virtual queue " + std::to_string(v) +
                           " not assigned to flow " + std::to_string(f));
      if (i + 1 < path.size()) {
        int p = path[i + 1];
        if (p < 0 || p >= m ||
            t.routing[static_cast<std::size_t>(v)]
                     [static_cast<std::size_t>(p)] != 1)
          flag("fp-map", "flow " + std::to_string(f) +
                             " path hop without routing entry");
      }
    }
  }

  if (rep.violations.empty()) {
    // (I - R)^{-1} = sum_{k<M} R^k, exact in integers.
    IntMatrix inv = detail::int_identity(m);
    IntMatrix pw = t.routing;
    for (int k = 1; k <= m && !detail::is_zero(pw); ++k) {
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
          inv[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] +=
              pw[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      pw = detail::int_matmul(pw, t.routing);
    }
    rep.i_minus_r_inverse = std::move(inv);
  }
  return rep;
}

struct InfeasibleDeparture : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// One slot of queue evolution: x' = x + a - d(I - R). Departures must be
/// feasible (d <= x componentwise); a violation is a policy bug, not data.
inline QueueState step(const QueueState& x, const IntVec& a, const IntVec& d,
                       const NetworkTopology& t) {
  const std::size_t m = x.size();
  QueueState out(m);
  for (std::size_t i = 0; i < m; ++i) {
    if (d[i] > x[i])
      throw InfeasibleDeparture("departure exceeds backlog at queue " +
                                std::to_string(i));
    if (a[i] < 0) throw std::invalid_argument("negative arrival");
    out[i] = x[i] + a[i] - d[i];
  }
  // Recirculation: departures from m enter downstream(m).
  for (std::size_t i = 0; i < m; ++i) {
    int p = t.downstream(static_cast<int>(i));
    if (p >= 0) out[static_cast<std::size_t>(p)] += d[i];
  }
  return out;
}

/// Average workload W = Lambda (I-R)^{-1}; every queue sees its own external
/// rate plus everything routed through it.
inline RealVec workload(const RealVec& lambda, const NetworkTopology& t) {
  TopologyReport rep = validate_topology(t);
  if (!rep.valid())
    throw std::invalid_argument("workload: invalid topology (" +
                                rep.violations.front().message + ")");
  const auto& inv = *rep.i_minus_r_inverse;
  const std::size_t m = lambda.size();
  RealVec w(m, 0.0);
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t i = 0; i < m; ++i)
      w[j] += lambda[i] * static_cast<double>(inv[i][j]);
  return w;
}

/// Builds the derived maps from physical assignment and flow paths; the
/// routing matrix follows from consecutive path hops.
inline NetworkTopology make_topology(int n_physical,
                                     const std::vector<int>& pq_of_virtual,
                                     std::vector<Flow> flows) {
  NetworkTopology t;
  t.n_physical = n_physical;
  t.m_virtual = static_cast<int>(pq_of_virtual.size());
  t.pq_map = pq_of_virtual;
  t.routing.assign(static_cast<std::size_t>(t.m_virtual),
                   IntVec(static_cast<std::size_t>(t.m_virtual), 0));
  t.vq_map.assign(static_cast<std::size_t>(n_physical), {});
  for (int v = 0; v < t.m_virtual; ++v) {
    int q = pq_of_virtual[static_cast<std::size_t>(v)];
    if (q < 0 || q >= n_physical)
      throw std::invalid_argument("make_topology: bad physical index");
    t.vq_map[static_cast<std::size_t>(q)].push_back(v);
  }
  t.fl_map.assign(static_cast<std::size_t>(t.m_virtual), -1);
  for (std::size_t f = 0; f < flows.size(); ++f) {
    const auto& path = flows[f].path;
    for (std::size_t i = 0; i < path.size(); ++i) {
      int v = path[i];
      if (v < 0 || v >= t.m_virtual)
        throw std::invalid_argument("make_topology: bad path index");
      t.fl_map[static_cast<std::size_t>(v)] = static_cast<int>(f);
      if (i + 1 < path.size())
        t.routing[static_cast<std::size_t>(v)]
                 [static_cast<std::size_t>(path[i + 1])] = 1;
    }
  }
  t.flows = std::move(flows);
  return t;
}

}  // namespace qnet

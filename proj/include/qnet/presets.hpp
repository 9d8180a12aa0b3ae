#pragma once

#include <string>
#include <vector>

#include "qnet/regions.hpp"
#include "qnet/topology.hpp"

namespace qnet {

struct Preset {
  NetworkTopology topology;
  std::vector<DepartureRegion> regions;
};

/// Input-queued crossbar with `ports` inputs and outputs: one physical queue
/// per input port, one virtual queue per (input, output) pair, single-hop
/// traffic, and the sub-permutation departure region.
inline Preset switch_preset(int ports) {
  const int m = ports * ports;
  std::vector<int> pq(static_cast<std::size_t>(m));
  std::vector<Flow> flows(static_cast<std::size_t>(m));
  for (int v = 0; v < m; ++v) {
    pq[static_cast<std::size_t>(v)] = v / ports;
    flows[static_cast<std::size_t>(v)] = {
        "voq_" + std::to_string(v / ports) + "_" + std::to_string(v % ports),
        {v}};
  }
  Preset p;
  p.topology = make_topology(ports, pq, std::move(flows));
  p.regions = {switch_region(ports)};
  return p;
}

/// Single-hop network whose service constraints are an explicit contention
/// graph; one physical queue per virtual queue (per-node structure is up to
/// the caller's interpretation), independent-set departure region.
inline Preset contention_preset(const ContentionGraph& g) {
  const int m = g.n_vertices;
  std::vector<int> pq(static_cast<std::size_t>(m));
  std::vector<Flow> flows(static_cast<std::size_t>(m));
  for (int v = 0; v < m; ++v) {
    pq[static_cast<std::size_t>(v)] = v;
    flows[static_cast<std::size_t>(v)] = {"flow_" + std::to_string(v), {v}};
  }
  Preset p;
  p.topology = make_topology(m, pq, std::move(flows));
  p.regions = {independent_set_region(g)};
  return p;
}

struct PresetInfo {
  std::string name;
  std::string description;
};

inline std::vector<PresetInfo> list_presets() {
  return {
      {"switch",
       "input-queued crossbar; parameter `ports`, region = sub-permutation "
       "schedules"},
      {"contention",
       "single-hop network under a contention graph; parameters `queues` "
       "and `edges`, region = independent sets"},
      {"custom",
       "explicit physical/virtual layout, flows and regions from the "
       "config file"},
  };
}

}  // namespace qnet

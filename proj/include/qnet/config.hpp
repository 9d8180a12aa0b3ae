#pragma once

#include <yaml-cpp/yaml.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "qnet/capacity.hpp"
#include "qnet/expr_parser.hpp"
#include "qnet/linalg.hpp"
#include "qnet/policies.hpp"
#include "qnet/potential_check.hpp"
#include "qnet/presets.hpp"
#include "qnet/processes.hpp"
#include "qnet/regions.hpp"
#include "qnet/topology.hpp"

namespace qnet {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Fully resolved experiment description. Everything a run needs is here;
/// the same config plus the same seed reproduces a run byte for byte.
struct ExperimentConfig {
  NetworkTopology topology;
  std::vector<DepartureRegion> regions;
  ArrivalProcess arrivals;
  ConstraintProcess constraints = ConstraintProcess::static_constraints();
  std::string policy_text = "max_scalar(sum_scalar(pow(1.0)))";
  std::map<std::string, Potential> named_potentials;
  MatrixLoader matrix_loader;

  std::int64_t horizon = 1000;
  std::uint64_t seed = 0;
  int replications = 1;
  std::int64_t sample_every = 1;
  double warmup_fraction = 0.1;
  std::string out_dir;  // empty: keep results in memory only
  bool allow_unvalidated = false;
  bool drift_enabled = true;
  int drift_bins = 20;
  bool track_argmax = false;  // per-slot brute-force argmax comparison
  bool quiet = false;

  PolicyPtr make_policy() const {
    return parse_policy(policy_text, &named_potentials, matrix_loader);
  }

  Potential policy_potential() const {
    PolicyPtr p = make_policy();
    return p->potential();
  }

  /// All region vertices; the direction set for the alignment check.
  std::vector<IntVec> all_vertices() const {
    std::vector<IntVec> out;
    for (const auto& r : regions)
      out.insert(out.end(), r.vertices.begin(), r.vertices.end());
    return out;
  }

  ExperimentConfig with_scaled_arrivals(double rho) const {
    ExperimentConfig c = *this;
    c.arrivals = arrivals.scaled(rho);
    return c;
  }

  void validate_structure() const {
    if (horizon < 1) throw ConfigError("horizon must be >= 1");
    if (replications < 1) throw ConfigError("replications must be >= 1");
    if (sample_every < 1) throw ConfigError("sample_every must be >= 1");
    if (warmup_fraction < 0.0 || warmup_fraction >= 1.0)
      throw ConfigError("warmup_fraction must lie in [0, 1)");
    TopologyReport tr = validate_topology(topology);
    if (!tr.valid())
      throw ConfigError("invalid topology: " + tr.violations.front().message);
    if (regions.empty()) throw ConfigError("no departure regions declared");
    for (const auto& r : regions)
      r.validate(static_cast<std::size_t>(topology.m_virtual));
    try {
      arrivals.validate();
      constraints.validate(regions.size());
    } catch (const std::exception& e) {
      throw ConfigError(e.what());
    }
    if (arrivals.n_queues() != static_cast<std::size_t>(topology.m_virtual))
      throw ConfigError("arrival table width != number of virtual queues");
    try {
      (void)make_policy();
    } catch (const std::exception& e) {
      throw ConfigError(std::string("policy: ") + e.what());
    }
  }
};

namespace detail {

inline RealMatrix load_matrix_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open matrix file " + path.string());
  RealMatrix rows;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    RealVec row;
    double v;
    while (ls >> v) row.push_back(v);
    if (!row.empty()) rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ConfigError("matrix file " + path.string() +
                                      " holds no numbers");
  return rows;
}

inline RealMatrix matrix_from_node(const YAML::Node& node,
                                   const std::filesystem::path& base) {
  if (node.IsScalar()) {
    std::string s = node.as<std::string>();
    if (!s.empty() && s[0] == '@')
      return load_matrix_file(base / s.substr(1));
    throw ConfigError("matrix must be a list of rows or an @file reference");
  }
  RealMatrix m;
  for (const auto& row : node) m.push_back(row.as<RealVec>());
  return m;
}

inline FiniteMarkovChain chain_from_node(const YAML::Node& node,
                                         const std::filesystem::path& base) {
  FiniteMarkovChain c;
  if (!node["transition"])
    throw ConfigError("chain needs a `transition` matrix");
  c.transition = matrix_from_node(node["transition"], base);
  c.initial = node["initial"] ? node["initial"].as<int>() : 0;
  return c;
}

}  // namespace detail

/// Loads a YAML experiment file. Schema documented in the README; this
/// resolves presets, fills defaults, and leaves semantic validation to
/// ExperimentConfig::validate_structure().
inline ExperimentConfig load_config(const std::filesystem::path& path) {
  YAML::Node root;
  try {
    root = YAML::LoadFile(path.string());
  } catch (const std::exception& e) {
    throw ConfigError("cannot parse " + path.string() + ": " + e.what());
  }
  const std::filesystem::path base = path.parent_path();

  ExperimentConfig cfg;
  cfg.matrix_loader = [base](const std::string& ref) {
    return detail::load_matrix_file(base / ref);
  };

  // --- topology + default regions
  const YAML::Node topo = root["topology"];
  if (!topo) throw ConfigError("missing `topology` section");
  const std::string preset =
      topo["preset"] ? topo["preset"].as<std::string>() : "custom";
  if (preset == "switch") {
    if (!topo["ports"]) throw ConfigError("switch preset needs `ports`");
    Preset p = switch_preset(topo["ports"].as<int>());
    cfg.topology = std::move(p.topology);
    cfg.regions = std::move(p.regions);
  } else if (preset == "contention") {
    ContentionGraph g;
    if (!topo["queues"])
      throw ConfigError("contention preset needs `queues`");
    g.n_vertices = topo["queues"].as<int>();
    for (const auto& e : topo["edges"])
      g.edges.emplace_back(e[0].as<int>(), e[1].as<int>());
    Preset p = contention_preset(g);
    cfg.topology = std::move(p.topology);
    cfg.regions = std::move(p.regions);
  } else if (preset == "custom") {
    if (!topo["physical"] || !topo["pq"])
      throw ConfigError("custom topology needs `physical` and `pq`");
    std::vector<Flow> flows;
    for (const auto& f : topo["flows"]) {
      Flow fl;
      fl.name = f["name"] ? f["name"].as<std::string>() : "";
      fl.path = f["path"].as<std::vector<int>>();
      flows.push_back(std::move(fl));
    }
    cfg.topology = make_topology(topo["physical"].as<int>(),
                                 topo["pq"].as<std::vector<int>>(),
                                 std::move(flows));
  } else {
    throw ConfigError("unknown topology preset '" + preset + "'");
  }

  // --- explicit regions override / extend the preset ones
  if (root["regions"]) {
    cfg.regions.clear();
    for (const auto& rn : root["regions"]) {
      if (rn["preset"]) {
        const std::string rp = rn["preset"].as<std::string>();
        if (rp == "switch") {
          cfg.regions.push_back(
              switch_region(rn["ports"].as<int>()));
        } else if (rp == "independent-sets") {
          ContentionGraph g;
          g.n_vertices = cfg.topology.m_virtual;
          for (const auto& e : rn["edges"])
            g.edges.emplace_back(e[0].as<int>(), e[1].as<int>());
          cfg.regions.push_back(independent_set_region(g));
        } else {
          throw ConfigError("unknown region preset '" + rp + "'");
        }
        if (rn["label"])
          cfg.regions.back().label = rn["label"].as<std::string>();
        continue;
      }
      DepartureRegion r;
      r.label = rn["label"] ? rn["label"].as<std::string>()
                            : "region" + std::to_string(cfg.regions.size());
      for (const auto& v : rn["vertices"])
        r.vertices.push_back(v.as<IntVec>());
      cfg.regions.push_back(std::move(r));
    }
  }

  // --- arrivals
  const YAML::Node arr = root["arrivals"];
  if (!arr) throw ConfigError("missing `arrivals` section");
  cfg.arrivals.chain = arr["chain"]
                           ? detail::chain_from_node(arr["chain"], base)
                           : FiniteMarkovChain{{{1.0}}, 0};
  if (arr["bernoulli"]) {
    for (const auto& state_row : arr["bernoulli"]) {
      std::vector<BatchDistribution> tbl;
      for (const auto& p : state_row)
        tbl.push_back(BatchDistribution::bernoulli(p.as<double>()));
      cfg.arrivals.per_state.push_back(std::move(tbl));
    }
  } else if (arr["batch"]) {
    for (const auto& state_row : arr["batch"]) {
      std::vector<BatchDistribution> tbl;
      for (const auto& d : state_row) {
        BatchDistribution bd;
        bd.values = d["values"].as<std::vector<std::int64_t>>();
        bd.probs = d["probs"].as<RealVec>();
        tbl.push_back(std::move(bd));
      }
      cfg.arrivals.per_state.push_back(std::move(tbl));
    }
  } else {
    throw ConfigError("arrivals need `bernoulli` or `batch` tables");
  }

  // --- constraints (default: static, first region)
  if (root["constraints"]) {
    const YAML::Node cons = root["constraints"];
    cfg.constraints.chain = cons["chain"]
                                ? detail::chain_from_node(cons["chain"], base)
                                : FiniteMarkovChain{{{1.0}}, 0};
    if (cons["region_of_state"])
      cfg.constraints.region_of_state =
          cons["region_of_state"].as<std::vector<int>>();
    else if (cfg.constraints.chain.n_states() == 1)
      cfg.constraints.region_of_state = {0};
    else
      throw ConfigError("dynamic constraints need `region_of_state`");
  }

  // --- named potentials, then the policy string
  if (root["potentials"])
    for (const auto& kv : root["potentials"]) {
      const auto name = kv.first.as<std::string>();
      cfg.named_potentials.emplace(
          name, parse_potential(kv.second.as<std::string>(),
                                &cfg.named_potentials, cfg.matrix_loader));
    }
  if (root["policy"]) cfg.policy_text = root["policy"].as<std::string>();

  // --- run parameters
  if (const YAML::Node run = root["run"]) {
    if (run["horizon"]) cfg.horizon = run["horizon"].as<std::int64_t>();
    if (run["seed"]) cfg.seed = run["seed"].as<std::uint64_t>();
    if (run["replications"])
      cfg.replications = run["replications"].as<int>();
    if (run["sample_every"])
      cfg.sample_every = run["sample_every"].as<std::int64_t>();
    if (run["warmup_fraction"])
      cfg.warmup_fraction = run["warmup_fraction"].as<double>();
    if (run["out"]) cfg.out_dir = run["out"].as<std::string>();
    if (run["allow_unvalidated"])
      cfg.allow_unvalidated = run["allow_unvalidated"].as<bool>();
    if (run["drift"]) cfg.drift_enabled = run["drift"].as<bool>();
    if (run["drift_bins"]) cfg.drift_bins = run["drift_bins"].as<int>();
    if (run["track_argmax"])
      cfg.track_argmax = run["track_argmax"].as<bool>();
  }

  cfg.validate_structure();
  return cfg;
}

/// Full pre-flight report: topology, potential conditions, admissibility.
struct ValidationSummary {
  TopologyReport topology;
  ValidityReport potential;
  AdmissibilityResult admissibility;
  bool hard_failure = false;  // potential refuted and not overridden
};

inline ValidationSummary validate_config(const ExperimentConfig& cfg) {
  cfg.validate_structure();
  ValidationSummary s;
  s.topology = validate_topology(cfg.topology);
  CheckConfig cc;
  cc.vertices = cfg.all_vertices();
  s.potential = check_potential(cfg.policy_potential(), cfg.topology, cc);
  s.admissibility = check_admissible(mean_rate(cfg.arrivals), cfg.topology,
                                     cfg.constraints, cfg.regions);
  s.hard_failure = !s.potential.acceptable() && !cfg.allow_unvalidated;
  return s;
}

}  // namespace qnet

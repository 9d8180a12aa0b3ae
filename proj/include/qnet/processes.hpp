#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "qnet/linalg.hpp"
#include "qnet/markov.hpp"
#include "qnet/rng.hpp"

namespace qnet {

/// Integer batch-size distribution with finite support. Bernoulli(p) is the
/// two-point special case {0: 1-p, 1: p}.
struct BatchDistribution {
  std::vector<std::int64_t> values;
  RealVec probs;

  static BatchDistribution bernoulli(double p) {
    if (p < 0.0 || p > 1.0)
      throw std::invalid_argument("bernoulli probability out of [0,1]");
    return {{0, 1}, {1.0 - p, p}};
  }

  static BatchDistribution constant(std::int64_t v) { return {{v}, {1.0}}; }

  double mean() const {
    double m = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i)
      m += static_cast<double>(values[i]) * probs[i];
    return m;
  }

  std::int64_t max_batch() const {
    std::int64_t c = 0;
    for (auto v : values) c = std::max(c, v);
    return c;
  }

  void validate() const {
    if (values.empty() || values.size() != probs.size())
      throw std::invalid_argument("batch distribution: malformed support");
    double s = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (values[i] < 0)
        throw std::invalid_argument("batch distribution: negative batch");
      if (probs[i] < 0.0 || !std::isfinite(probs[i]))
        throw std::invalid_argument("batch distribution: bad probability");
      s += probs[i];
    }
    if (std::abs(s - 1.0) > 1e-9)
      throw std::invalid_argument("batch distribution: probabilities sum to " +
                                  std::to_string(s));
  }

  std::int64_t sample(Rng& rng) const {
    return values[rng.categorical(probs)];
  }

  /// Distribution with mean scaled by rho: nonzero-batch probabilities are
  /// multiplied by rho and the leftover mass goes to batch 0.
  BatchDistribution scaled(double rho) const {
    BatchDistribution out;
    double p0 = 1.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (values[i] == 0) continue;
      double p = probs[i] * rho;
      if (p < 0.0) throw std::invalid_argument("scaled: negative probability");
      out.values.push_back(values[i]);
      out.probs.push_back(p);
      p0 -= p;
    }
    if (p0 < -1e-12)
      throw std::invalid_argument(
          "scaled: load factor pushes batch probabilities above 1");
    out.values.insert(out.values.begin(), 0);
    out.probs.insert(out.probs.begin(), std::max(p0, 0.0));
    return out;
  }
};

/// Markov-modulated batch arrivals: the modulating chain selects, per state,
/// one batch distribution per queue. A single-state chain yields i.i.d.
/// traffic.
struct ArrivalProcess {
  FiniteMarkovChain chain;
  // per_state[s][m] is the batch law of queue m in modulating state s.
  std::vector<std::vector<BatchDistribution>> per_state;

  std::size_t n_queues() const {
    return per_state.empty() ? 0 : per_state.front().size();
  }

  void validate() const {
    validate_chain(chain);
    if (per_state.size() != chain.n_states())
      throw std::invalid_argument("arrival process: one table per state");
    const std::size_t m = n_queues();
    for (const auto& tbl : per_state) {
      if (tbl.size() != m)
        throw std::invalid_argument("arrival process: ragged state tables");
      for (const auto& d : tbl) d.validate();
    }
  }

  /// Per-queue mean arrival vector conditional on a modulating state.
  RealVec state_rate(int state) const {
    const auto& tbl = per_state[static_cast<std::size_t>(state)];
    RealVec r(tbl.size());
    for (std::size_t m = 0; m < tbl.size(); ++m) r[m] = tbl[m].mean();
    return r;
  }

  std::int64_t max_batch() const {
    std::int64_t c = 0;
    for (const auto& tbl : per_state)
      for (const auto& d : tbl) c = std::max(c, d.max_batch());
    return c;
  }

  ArrivalProcess scaled(double rho) const {
    ArrivalProcess out;
    out.chain = chain;
    out.per_state.resize(per_state.size());
    for (std::size_t s = 0; s < per_state.size(); ++s) {
      out.per_state[s].reserve(per_state[s].size());
      for (const auto& d : per_state[s])
        out.per_state[s].push_back(d.scaled(rho));
    }
    return out;
  }
};

inline IntVec sample_arrivals(const ArrivalProcess& p, int state, Rng& rng) {
  const auto& tbl = p.per_state[static_cast<std::size_t>(state)];
  IntVec a(tbl.size());
  for (std::size_t m = 0; m < tbl.size(); ++m) a[m] = tbl[m].sample(rng);
  return a;
}

/// Lambda = sum_S pi_S Lambda(S), the stationary mean arrival-rate vector.
inline RealVec mean_rate(const ArrivalProcess& p) {
  RealVec pi = steady_state(p.chain);
  RealVec lambda(p.n_queues(), 0.0);
  for (std::size_t s = 0; s < pi.size(); ++s) {
    RealVec r = p.state_rate(static_cast<int>(s));
    for (std::size_t m = 0; m < lambda.size(); ++m) lambda[m] += pi[s] * r[m];
  }
  return lambda;
}

/// Constraint-state evolution: each modulating state is deterministically
/// associated with one departure region (by index into a region table).
/// Static constraints are the single-state special case.
struct ConstraintProcess {
  FiniteMarkovChain chain;
  std::vector<int> region_of_state;

  void validate(std::size_t n_regions) const {
    validate_chain(chain);
    if (region_of_state.size() != chain.n_states())
      throw std::invalid_argument("constraint process: one region per state");
    for (int r : region_of_state)
      if (r < 0 || static_cast<std::size_t>(r) >= n_regions)
        throw std::invalid_argument(
            "constraint process: state maps to undeclared region");
  }

  static ConstraintProcess static_constraints(int region_index = 0) {
    ConstraintProcess c;
    c.chain.transition = {{1.0}};
    c.chain.initial = 0;
    c.region_of_state = {region_index};
    return c;
  }
};

}  // namespace qnet

#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "qnet/linalg.hpp"
#include "qnet/markov.hpp"
#include "qnet/processes.hpp"
#include "qnet/regions.hpp"
#include "qnet/simplex.hpp"
#include "qnet/topology.hpp"

namespace qnet {

enum class AdmissibilityVerdict { StrictlyAdmissible, Boundary, Inadmissible };

inline std::string to_string(AdmissibilityVerdict v) {
  switch (v) {
    case AdmissibilityVerdict::StrictlyAdmissible:
      return "strictly-admissible";
    case AdmissibilityVerdict::Boundary:
      return "boundary";
    case AdmissibilityVerdict::Inadmissible:
      return "inadmissible";
  }
  return "?";
}

struct AdmissibilityResult {
  // Largest eps with W(1+eps) expressible as the stationary mixture of
  // per-state region points; negative when the workload is outside.
  double margin = 0.0;
  bool unbounded_margin = false;
  AdmissibilityVerdict verdict = AdmissibilityVerdict::Inadmissible;
  // witness[s][v]: convex weight of vertex v of state s's region.
  std::vector<RealVec> witness;
  double reconstruction_error = 0.0;
  RealVec workload;
};

/// Decides whether the workload of `lambda` lies in the capacity region
/// W = sum_S pi_S D(S), D(S) in region(S), and with what scaling margin.
/// Solved as a small LP: maximize e' >= 0 subject to
///   sum_S pi_S sum_v w_{S,v} v = W e'   (componentwise)
///   sum_v w_{S,v} = 1 per state, w >= 0,
/// then margin = e' - 1. With `relaxed`, the mixture may dominate W e'
/// componentwise instead of matching it; equivalent whenever regions are
/// closed under componentwise decrease (true for both presets).
inline AdmissibilityResult check_admissible(
    const RealVec& lambda, const NetworkTopology& t,
    const ConstraintProcess& c, const std::vector<DepartureRegion>& regions,
    bool relaxed = false) {
  c.validate(regions.size());
  const RealVec w = workload(lambda, t);
  const RealVec pi = steady_state(c.chain);
  const std::size_t m = w.size();
  const std::size_t n_states = c.chain.n_states();

  AdmissibilityResult res;
  res.workload = w;

  double wmax = 0.0;
  for (double v : w) {
    if (v < 0.0) throw std::invalid_argument("check_admissible: negative rate");
    wmax = std::max(wmax, v);
  }
  if (wmax == 0.0) {
    // Zero workload: any margin works; witness idles everywhere.
    res.margin = std::numeric_limits<double>::infinity();
    res.unbounded_margin = true;
    res.verdict = AdmissibilityVerdict::StrictlyAdmissible;
    res.witness.resize(n_states);
    for (std::size_t s = 0; s < n_states; ++s) {
      const auto& reg = regions[static_cast<std::size_t>(c.region_of_state[s])];
      res.witness[s].assign(reg.vertices.size(), 0.0);
      res.witness[s][static_cast<std::size_t>(reg.zero_vertex())] = 1.0;
    }
    return res;
  }

  // Variable layout: [e' | w_{S,v} ... | surplus (relaxed only)].
  std::vector<std::size_t> state_offset(n_states);
  std::size_t nv = 1;
  for (std::size_t s = 0; s < n_states; ++s) {
    state_offset[s] = nv;
    nv += regions[static_cast<std::size_t>(c.region_of_state[s])]
              .vertices.size();
  }
  const std::size_t surplus_offset = nv;
  if (relaxed) nv += m;

  const std::size_t rows = m + n_states;
  RealMatrix a(rows, RealVec(nv, 0.0));
  RealVec b(rows, 0.0);
  for (std::size_t q = 0; q < m; ++q) {
    a[q][0] = -w[q];
    for (std::size_t s = 0; s < n_states; ++s) {
      const auto& reg = regions[static_cast<std::size_t>(c.region_of_state[s])];
      for (std::size_t v = 0; v < reg.vertices.size(); ++v)
        a[q][state_offset[s] + v] =
            pi[s] * static_cast<double>(reg.vertices[v][q]);
    }
    if (relaxed) a[q][surplus_offset + q] = -1.0;
    b[q] = 0.0;
  }
  for (std::size_t s = 0; s < n_states; ++s) {
    const auto& reg = regions[static_cast<std::size_t>(c.region_of_state[s])];
    for (std::size_t v = 0; v < reg.vertices.size(); ++v)
      a[m + s][state_offset[s] + v] = 1.0;
    b[m + s] = 1.0;
  }
  RealVec cost(nv, 0.0);
  cost[0] = 1.0;

  auto lp = Simplex::maximize(cost, std::move(a), std::move(b));
  if (lp.status == Simplex::Status::Infeasible) {
    // Possible only when some region lacks the idle vertex; report the
    // workload as far outside with the margin clamped.
    res.margin = -1.0;
    res.verdict = AdmissibilityVerdict::Inadmissible;
    return res;
  }
  if (lp.status == Simplex::Status::Unbounded) {
    res.margin = std::numeric_limits<double>::infinity();
    res.unbounded_margin = true;
    res.verdict = AdmissibilityVerdict::StrictlyAdmissible;
    return res;
  }

  res.margin = lp.objective - 1.0;
  res.witness.resize(n_states);
  for (std::size_t s = 0; s < n_states; ++s) {
    const auto& reg = regions[static_cast<std::size_t>(c.region_of_state[s])];
    res.witness[s].assign(reg.vertices.size(), 0.0);
    for (std::size_t v = 0; v < reg.vertices.size(); ++v)
      res.witness[s][v] = lp.solution[state_offset[s] + v];
  }
  // Reconstruction residual of the witness mixture against W(1+eps).
  RealVec mix(m, 0.0);
  for (std::size_t s = 0; s < n_states; ++s) {
    const auto& reg = regions[static_cast<std::size_t>(c.region_of_state[s])];
    for (std::size_t v = 0; v < reg.vertices.size(); ++v)
      for (std::size_t q = 0; q < m; ++q)
        mix[q] +=
            pi[s] * res.witness[s][v] * static_cast<double>(reg.vertices[v][q]);
  }
  double err = 0.0;
  for (std::size_t q = 0; q < m; ++q) {
    const double target = w[q] * (1.0 + res.margin);
    const double diff = relaxed ? std::max(0.0, target - mix[q])
                                : std::abs(mix[q] - target);
    err = std::max(err, diff);
  }
  res.reconstruction_error = err;

  if (std::abs(res.margin) <= 1e-9)
    res.verdict = AdmissibilityVerdict::Boundary;
  else if (res.margin > 0.0)
    res.verdict = AdmissibilityVerdict::StrictlyAdmissible;
  else
    res.verdict = AdmissibilityVerdict::Inadmissible;
  return res;
}

}  // namespace qnet

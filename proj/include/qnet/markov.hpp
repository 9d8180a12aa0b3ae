#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "qnet/linalg.hpp"
#include "qnet/rng.hpp"

namespace qnet {

/// Finite discrete-time Markov chain with a row-stochastic transition matrix.
/// Drives arrival modulation and service-constraint evolution.
struct FiniteMarkovChain {
  RealMatrix transition;  // row-stochastic
  int initial = 0;

  std::size_t n_states() const { return transition.size(); }
};

inline bool is_row_stochastic(const RealMatrix& p, double tol = 1e-12) {
  const std::size_t n = p.size();
  for (const auto& row : p) {
    if (row.size() != n) return false;
    double s = 0.0;
    for (double v : row) {
      if (v < 0.0 || !std::isfinite(v)) return false;
      s += v;
    }
    if (std::abs(s - 1.0) > tol) return false;
  }
  return true;
}

/// Strong connectivity of the directed graph induced by positive entries.
inline bool is_irreducible(const RealMatrix& p) {
  const std::size_t n = p.size();
  if (n == 0) return false;
  auto reach = [&](bool forward) {
    std::vector<bool> seen(n, false);
    std::vector<std::size_t> stack{0};
    seen[0] = true;
    while (!stack.empty()) {
      std::size_t u = stack.back();
      stack.pop_back();
      for (std::size_t v = 0; v < n; ++v) {
        double w = forward ? p[u][v] : p[v][u];
        if (w > 0.0 && !seen[v]) {
          seen[v] = true;
          stack.push_back(v);
        }
      }
    }
    for (bool b : seen)
      if (!b) return false;
    return true;
  };
  return reach(true) && reach(false);
}

inline void validate_chain(const FiniteMarkovChain& c) {
  if (c.n_states() == 0)
    throw std::invalid_argument("markov chain has no states");
  if (!is_row_stochastic(c.transition))
    throw std::invalid_argument("transition matrix is not row-stochastic");
  if (!is_irreducible(c.transition))
    throw std::invalid_argument("markov chain is reducible");
  if (c.initial < 0 || static_cast<std::size_t>(c.initial) >= c.n_states())
    throw std::invalid_argument("initial state out of range");
}

/// Stationary distribution by dense solve of the balance equations
/// (pi P = pi, sum pi = 1). Chains here are tiny, so a direct solve is
/// preferred over power iteration.
inline RealVec steady_state(const FiniteMarkovChain& c) {
  validate_chain(c);
  const int n = static_cast<int>(c.n_states());
  // Rows 0..n-1: (P^T - I) pi = 0, with the last row replaced by sum = 1.
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(j, i) = c.transition[i][j];
  a -= Eigen::MatrixXd::Identity(n, n);
  for (int j = 0; j < n; ++j) a(n - 1, j) = 1.0;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  b(n - 1) = 1.0;
  Eigen::VectorXd pi = a.colPivHouseholderQr().solve(b);

  RealVec out(n);
  for (int i = 0; i < n; ++i) out[i] = pi(i);

  // Residual check on the balance equations.
  double resid = 0.0;
  for (int j = 0; j < n; ++j) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += out[i] * c.transition[i][j];
    resid = std::max(resid, std::abs(s - out[j]));
  }
  if (resid >= 1e-10)
    throw std::runtime_error("steady_state: balance residual " +
                             std::to_string(resid));
  return out;
}

/// One transition from `state`, consuming one draw from `rng`.
inline int step_chain(const FiniteMarkovChain& c, int state, Rng& rng) {
  const auto& row = c.transition[static_cast<std::size_t>(state)];
  return static_cast<int>(rng.categorical(row));
}

}  // namespace qnet

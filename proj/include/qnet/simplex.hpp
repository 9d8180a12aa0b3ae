#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "qnet/linalg.hpp"

namespace qnet {

/// Dense two-phase primal simplex for
///     maximize c.z   subject to  A z = b,  z >= 0.
/// Sized for the tiny programs of the admissibility check (tens of
/// variables); Bland's rule keeps it cycle-free.
class Simplex {
 public:
  enum class Status { Optimal, Infeasible, Unbounded };

  struct Result {
    Status status = Status::Infeasible;
    double objective = 0.0;
    RealVec solution;
  };

  static Result maximize(const RealVec& c, RealMatrix a, RealVec b,
                         double tol = 1e-9) {
    const std::size_t m = a.size();
    const std::size_t n = c.size();
    for (const auto& row : a)
      if (row.size() != n)
        throw std::invalid_argument("simplex: ragged constraint matrix");
    if (b.size() != m) throw std::invalid_argument("simplex: b size mismatch");

    for (std::size_t i = 0; i < m; ++i)
      if (b[i] < 0.0) {
        b[i] = -b[i];
        for (auto& v : a[i]) v = -v;
      }

    // Tableau: n structural columns, m artificial columns, rhs.
    const std::size_t cols = n + m;
    std::vector<RealVec> t(m, RealVec(cols + 1, 0.0));
    std::vector<std::size_t> basis(m);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) t[i][j] = a[i][j];
      t[i][n + i] = 1.0;
      t[i][cols] = b[i];
      basis[i] = n + i;
    }

    auto pivot = [&](std::size_t row, std::size_t col) {
      const double piv = t[row][col];
      for (auto& v : t[row]) v /= piv;
      for (std::size_t i = 0; i < m; ++i) {
        if (i == row || t[i][col] == 0.0) continue;
        const double f = t[i][col];
        for (std::size_t j = 0; j <= cols; ++j) t[i][j] -= f * t[row][j];
      }
      basis[row] = col;
    };

    // One simplex phase over the given cost vector (maximization). Columns
    // at index >= allowed_cols are never entered.
    auto run = [&](const RealVec& cost, std::size_t allowed_cols) -> Status {
      for (;;) {
        // Reduced costs via the basis costs; recomputed each round, which
        // is cheap at this size and immune to drift.
        std::size_t enter = cols;
        for (std::size_t j = 0; j < allowed_cols; ++j) {
          double red = cost[j];
          for (std::size_t i = 0; i < m; ++i)
            red -= cost[basis[i]] * t[i][j];
          if (red > tol) {
            enter = j;  // Bland: smallest eligible index
            break;
          }
        }
        if (enter == cols) return Status::Optimal;
        std::size_t leave = m;
        double best_ratio = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
          if (t[i][enter] <= tol) continue;
          const double ratio = t[i][cols] / t[i][enter];
          if (leave == m || ratio < best_ratio - tol ||
              (ratio < best_ratio + tol && basis[i] < basis[leave])) {
            leave = i;
            best_ratio = ratio;
          }
        }
        if (leave == m) return Status::Unbounded;
        pivot(leave, enter);
      }
    };

    // Phase 1: drive the artificial variables to zero.
    RealVec phase1_cost(cols, 0.0);
    for (std::size_t j = n; j < cols; ++j) phase1_cost[j] = -1.0;
    run(phase1_cost, cols);
    double infeas = 0.0;
    for (std::size_t i = 0; i < m; ++i)
      if (basis[i] >= n) infeas += t[i][cols];
    Result res;
    if (infeas > 1e-7) {
      res.status = Status::Infeasible;
      return res;
    }
    // Pivot lingering zero-valued artificials out of the basis.
    for (std::size_t i = 0; i < m; ++i) {
      if (basis[i] < n) continue;
      std::size_t col = n;
      for (std::size_t j = 0; j < n; ++j)
        if (std::abs(t[i][j]) > tol) {
          col = j;
          break;
        }
      if (col < n) pivot(i, col);
      // else: redundant row; harmless to leave in place.
    }

    RealVec phase2_cost(cols, 0.0);
    for (std::size_t j = 0; j < n; ++j) phase2_cost[j] = c[j];
    Status st = run(phase2_cost, n);
    if (st == Status::Unbounded) {
      res.status = st;
      return res;
    }

    res.status = Status::Optimal;
    res.solution.assign(n, 0.0);
    for (std::size_t i = 0; i < m; ++i)
      if (basis[i] < n) res.solution[basis[i]] = t[i][cols];
    res.objective = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      res.objective += c[j] * res.solution[j];
    return res;
  }
};

}  // namespace qnet

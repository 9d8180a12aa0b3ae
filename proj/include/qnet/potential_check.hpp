#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "qnet/linalg.hpp"
#include "qnet/potentials.hpp"
#include "qnet/regions.hpp"
#include "qnet/rng.hpp"
#include "qnet/topology.hpp"

namespace qnet {

enum class CheckVerdict { PassNumeric, FailWitness, DeclaredStructural };

inline std::string to_string(CheckVerdict v) {
  switch (v) {
    case CheckVerdict::PassNumeric:
      return "pass (numeric)";
    case CheckVerdict::FailWitness:
      return "fail (witness)";
    case CheckVerdict::DeclaredStructural:
      return "declared (structural)";
  }
  return "?";
}

struct ConditionResult {
  CheckVerdict verdict = CheckVerdict::PassNumeric;
  double margin = 0.0;
  std::string witness;  // sampled point/direction when the check fails
};

/// Spot-check report for the weight-function conditions. A finite numeric
/// check can refute an asymptotic property but never prove it, so passing
/// verdicts distinguish structural certification from numeric evidence.
struct ValidityReport {
  std::map<std::string, ConditionResult> conditions;
  int smoothness_order = 0;

  bool acceptable() const {
    for (const auto& [name, res] : conditions)
      if (res.verdict == CheckVerdict::FailWitness) return false;
    return true;
  }

  std::string summary() const {
    std::ostringstream os;
    for (const auto& [name, res] : conditions) {
      os << "  " << name << ": " << to_string(res.verdict);
      if (res.verdict == CheckVerdict::FailWitness && !res.witness.empty())
        os << " [" << res.witness << "]";
      os << "\n";
    }
    return os.str();
  }
};

struct CheckConfig {
  // Departure directions examined by the service-alignment condition;
  // typically the union of region vertices. Falls back to unit vectors.
  std::vector<IntVec> vertices;
  std::vector<double> scales = {1e2, 1e3, 1e4, 1e5, 1e6};
  int n_rays = 6;
  int n_boundary_samples = 64;
  // Required blow-up of G(sX)/s across the scale sweep. Log-family weights
  // only gain a factor ~3 over four decades, so the bar sits at 2.
  double growth_factor = 2.0;
  double subexp_tol = 1e-2;
  double negder_tol = 1e-9;
  double alignment_margin = 1e-3;
  std::uint64_t seed = 0x9042'5ad1'77cb'0e1fULL;
};

namespace detail {

inline std::string format_vec(const RealVec& v) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < v.size(); ++i)
    os << (i ? "," : "") << v[i];
  os << ")";
  return os.str();
}

inline std::vector<RealVec> sample_rays(std::size_t m, const CheckConfig& cfg,
                                        Rng& rng) {
  std::vector<RealVec> rays;
  rays.emplace_back(m, 1.0 / std::sqrt(static_cast<double>(m)));  // uniform
  for (std::size_t i = 0; i < m; ++i) {  // axes
    RealVec e(m, 0.0);
    e[i] = 1.0;
    rays.push_back(std::move(e));
  }
  for (int k = 0; k < cfg.n_rays; ++k) {
    RealVec r(m);
    double norm = 0.0;
    for (auto& v : r) {
      v = 0.05 + 0.95 * rng.real01();
      norm += v * v;
    }
    norm = std::sqrt(norm);
    for (auto& v : r) v /= norm;
    rays.push_back(std::move(r));
  }
  return rays;
}

}  // namespace detail

/// Numeric spot checks of the conditions a scheduling potential must meet:
/// superlinear growth of G, sub-exponential increments, nonpositive pressure
/// along departures from empty queues, and positive alignment with some
/// departure direction at large backlogs. The smoothness order is declared
/// from the expression structure, never measured.
inline ValidityReport check_potential(const Potential& g,
                                      const NetworkTopology& t,
                                      const CheckConfig& cfg = {}) {
  ValidityReport rep;
  Rng rng(cfg.seed);
  const std::size_t m = static_cast<std::size_t>(t.m_virtual);
  const auto rays = detail::sample_rays(m, cfg, rng);

  // --- superlinear growth: G(s X0)/s must keep growing along every ray.
  {
    ConditionResult res;
    res.margin = std::numeric_limits<double>::infinity();
    bool ok = true;
    for (const auto& ray : rays) {
      double prev = -std::numeric_limits<double>::infinity();
      double first = 0.0, last = 0.0;
      bool ray_ok = true;
      for (std::size_t si = 0; si < cfg.scales.size(); ++si) {
        RealVec x(m);
        for (std::size_t i = 0; i < m; ++i) x[i] = cfg.scales[si] * ray[i];
        double ratio = g.value(x) / cfg.scales[si];
        if (si == 0) first = ratio;
        last = ratio;
        if (ratio <= prev) ray_ok = false;
        prev = ratio;
      }
      double blowup = first > 0.0 ? last / first
                                  : (last > 0.0 ? cfg.growth_factor : 0.0);
      res.margin = std::min(res.margin, blowup);
      if (!ray_ok || blowup < cfg.growth_factor) {
        ok = false;
        res.witness = "ray " + detail::format_vec(ray) + ", growth " +
                      std::to_string(blowup);
        break;
      }
    }
    res.verdict = !ok ? CheckVerdict::FailWitness
                      : (g.superlinear() ? CheckVerdict::DeclaredStructural
                                         : CheckVerdict::PassNumeric);
    rep.conditions["superlinear-growth"] = res;
  }

  // --- sub-exponential increments: G(X+Y)/G(X) and directional-gradient
  // ratios must approach 1 at large scales for bounded Y, Z.
  {
    ConditionResult res;
    res.margin = 0.0;
    bool ok = true;
    const double s = cfg.scales.back();
    for (const auto& ray : rays) {
      RealVec x(m);
      for (std::size_t i = 0; i < m; ++i) x[i] = s * ray[i];
      for (int trial = 0; trial < 4 && ok; ++trial) {
        RealVec y(m);
        for (auto& v : y) v = 5.0 * rng.real01();
        RealVec xy(m);
        for (std::size_t i = 0; i < m; ++i) xy[i] = x[i] + y[i];
        const double base = g.value(x);
        if (base <= 0.0) continue;
        const double dev = std::abs(g.value(xy) / base - 1.0);
        res.margin = std::max(res.margin, dev);
        if (dev > cfg.subexp_tol) {
          ok = false;
          res.witness = "value ratio off by " + std::to_string(dev) +
                        " at ray " + detail::format_vec(ray);
          break;
        }
        RealVec grad_x = g.gradient(x);
        RealVec grad_xy = g.gradient(xy);
        RealVec z(m);
        for (auto& v : z) v = 1.0 + 4.0 * rng.real01();
        const double den = dot(grad_x, std::span<const double>(z));
        if (std::abs(den) <
            1e-9 * l2_norm(std::span<const double>(grad_x)))
          continue;
        const double gdev =
            std::abs(dot(grad_xy, std::span<const double>(z)) / den - 1.0);
        res.margin = std::max(res.margin, gdev);
        if (gdev > cfg.subexp_tol) {
          ok = false;
          res.witness = "gradient ratio off by " + std::to_string(gdev);
        }
      }
      if (!ok) break;
    }
    const bool structurally_polynomial = g.degree() > 0.0;
    res.verdict = !ok ? CheckVerdict::FailWitness
                      : (structurally_polynomial
                             ? CheckVerdict::DeclaredStructural
                             : CheckVerdict::PassNumeric);
    rep.conditions["subexponential"] = res;
  }

  // --- idle orientation: pressure projected on departures that serve only
  // empty queues must be nonpositive (<X . D> = 0 implies the inner product
  // with the pressure vector cannot be positive).
  {
    ConditionResult res;
    res.margin = -std::numeric_limits<double>::infinity();
    bool ok = true;
    const double point_scales[] = {1.0, 10.0, 1000.0};
    for (int trial = 0; trial < cfg.n_boundary_samples && ok; ++trial) {
      RealVec x(m, 0.0);
      std::size_t zeros = 0;
      for (std::size_t i = 0; i < m; ++i) {
        if (rng.real01() < 0.5) {
          ++zeros;
          continue;
        }
        x[i] = point_scales[trial % 3] * (0.1 + rng.real01());
      }
      if (zeros == 0) {
        x[rng.below(m)] = 0.0;
        zeros = 1;
      }
      RealVec d(m, 0.0);
      bool any = false;
      for (std::size_t i = 0; i < m; ++i)
        if (x[i] == 0.0 && rng.real01() < 0.7) {
          d[i] = 1.0 + static_cast<double>(rng.below(3));
          any = true;
        }
      if (!any)
        for (std::size_t i = 0; i < m; ++i)
          if (x[i] == 0.0) {
            d[i] = 1.0;
            break;
          }
      RealVec p = pressure(g, x, t);
      const double ip = dot(p, std::span<const double>(d));
      res.margin = std::max(res.margin, ip);
      if (ip > cfg.negder_tol) {
        ok = false;
        res.witness = "x=" + detail::format_vec(x) +
                      " d=" + detail::format_vec(d) +
                      " pressure.d=" + std::to_string(ip);
      }
    }
    res.verdict =
        ok ? CheckVerdict::PassNumeric : CheckVerdict::FailWitness;
    rep.conditions["idle-orientation"] = res;
  }

  // --- service alignment: along every ray at large scale, some departure
  // direction keeps <pressure . D> / ||grad G|| above a positive margin.
  {
    ConditionResult res;
    res.margin = std::numeric_limits<double>::infinity();
    bool ok = true;
    std::vector<IntVec> dirs = cfg.vertices;
    if (dirs.empty())
      for (std::size_t i = 0; i < m; ++i) {
        IntVec e(m, 0);
        e[i] = 1;
        dirs.push_back(std::move(e));
      }
    for (const auto& ray : rays) {
      const double s = cfg.scales.back();
      RealVec x(m);
      for (std::size_t i = 0; i < m; ++i) x[i] = s * ray[i];
      RealVec grad = g.gradient(x);
      RealVec p = pressure(g, x, t);
      const double norm = l2_norm(std::span<const double>(grad));
      if (norm == 0.0) {
        ok = false;
        res.witness = "vanishing gradient at ray " + detail::format_vec(ray);
        break;
      }
      double best = -std::numeric_limits<double>::infinity();
      for (const auto& d : dirs)
        best = std::max(
            best, dot(p, std::span<const std::int64_t>(d)) / norm);
      res.margin = std::min(res.margin, best);
      if (best < cfg.alignment_margin) {
        ok = false;
        res.witness = "ray " + detail::format_vec(ray) + ", best alignment " +
                      std::to_string(best);
        break;
      }
    }
    res.verdict =
        ok ? CheckVerdict::PassNumeric : CheckVerdict::FailWitness;
    rep.conditions["service-alignment"] = res;
  }

  // --- smoothness order: declared from the expression structure.
  {
    ConditionResult res;
    res.verdict = CheckVerdict::DeclaredStructural;
    res.margin = static_cast<double>(g.smoothness_order());
    rep.conditions["smoothness-order"] = res;
    rep.smoothness_order = g.smoothness_order();
  }

  return rep;
}

}  // namespace qnet

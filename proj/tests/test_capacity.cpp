#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <vector>

#include "qnet/capacity.hpp"
#include "qnet/presets.hpp"
#include "qnet/rng.hpp"
#include "qnet/simplex.hpp"

using namespace qnet;

namespace {

// Independent membership oracle: p lies in conv(V) iff some subset of at
// most dim+1 vertices carries nonnegative barycentric coordinates for p.
bool in_hull(const std::vector<IntVec>& vertices, const RealVec& p) {
  const std::size_t dim = p.size();
  const std::size_t n = vertices.size();
  std::vector<std::size_t> subset;
  auto feasible = [&](const std::vector<std::size_t>& idx) {
    const auto k = static_cast<Eigen::Index>(idx.size());
    Eigen::MatrixXd a(static_cast<Eigen::Index>(dim) + 1, k);
    Eigen::VectorXd b(static_cast<Eigen::Index>(dim) + 1);
    for (std::size_t q = 0; q < dim; ++q) {
      for (std::size_t j = 0; j < idx.size(); ++j)
        a(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(j)) =
            static_cast<double>(vertices[idx[j]][q]);
      b(static_cast<Eigen::Index>(q)) = p[q];
    }
    for (std::size_t j = 0; j < idx.size(); ++j)
      a(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(j)) = 1.0;
    b(static_cast<Eigen::Index>(dim)) = 1.0;
    Eigen::VectorXd w = a.fullPivHouseholderQr().solve(b);
    if ((a * w - b).lpNorm<Eigen::Infinity>() > 1e-9) return false;
    for (Eigen::Index j = 0; j < k; ++j)
      if (w(j) < -1e-9) return false;
    return true;
  };
  // enumerate subsets of size <= dim+1
  std::vector<std::size_t> stack;
  auto rec = [&](auto&& self, std::size_t start) -> bool {
    if (!stack.empty() && feasible(stack)) return true;
    if (stack.size() == dim + 1) return false;
    for (std::size_t i = start; i < n; ++i) {
      stack.push_back(i);
      if (self(self, i + 1)) return true;
      stack.pop_back();
    }
    return false;
  };
  return rec(rec, 0);
}

// Bisection on the scaling margin with the hull oracle (single region).
double brute_force_margin(const std::vector<IntVec>& vertices,
                          const RealVec& w) {
  double lo = -1.0, hi = 1.0;
  auto inside = [&](double eps) {
    RealVec p(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) p[i] = w[i] * (1.0 + eps);
    return in_hull(vertices, p);
  };
  REQUIRE(inside(lo));
  while (inside(hi)) hi *= 2.0;  // workload nonzero, so this terminates
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    (inside(mid) ? lo : hi) = mid;
  }
  return lo;
}

ArrivalProcess uniform_bernoulli(std::size_t queues, double p) {
  ArrivalProcess a;
  a.chain = FiniteMarkovChain{{{1.0}}, 0};
  a.per_state.push_back(std::vector<BatchDistribution>(
      queues, BatchDistribution::bernoulli(p)));
  return a;
}

}  // namespace

TEST_CASE("simplex solves a textbook equality program") {
  // maximize x + y s.t. x + 2y = 4 -> (4, 0), objective 4.
  auto res = Simplex::maximize({1.0, 1.0}, {{1.0, 2.0}}, {4.0});
  REQUIRE(res.status == Simplex::Status::Optimal);
  REQUIRE(res.objective == Catch::Approx(4.0));
  REQUIRE(res.solution[0] == Catch::Approx(4.0));
  REQUIRE(res.solution[1] == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("simplex detects infeasibility and unboundedness") {
  // x + y = -1 with x, y >= 0 cannot hold.
  auto infeas = Simplex::maximize({1.0, 0.0}, {{1.0, 1.0}}, {-1.0});
  REQUIRE(infeas.status == Simplex::Status::Infeasible);
  // maximize x with only y pinned leaves x free to grow.
  auto unbounded = Simplex::maximize({1.0, 0.0}, {{0.0, 1.0}}, {1.0});
  REQUIRE(unbounded.status == Simplex::Status::Unbounded);
}

TEST_CASE("simplex handles degenerate pivots") {
  // max x + y s.t. x + z = 2, x + y + w = 2: optimum x + y = 2.
  auto res = Simplex::maximize({1.0, 1.0, 0.0, 0.0},
                               {{1.0, 0.0, 1.0, 0.0}, {1.0, 1.0, 0.0, 1.0}},
                               {2.0, 2.0});
  REQUIRE(res.status == Simplex::Status::Optimal);
  REQUIRE(res.objective == Catch::Approx(2.0));
}

TEST_CASE("uniform load on the 2x2 switch: margin 0.25 at lambda 0.4") {
  Preset p = switch_preset(2);
  auto cp = ConstraintProcess::static_constraints();
  auto res = check_admissible(mean_rate(uniform_bernoulli(4, 0.4)),
                              p.topology, cp, p.regions);
  REQUIRE(res.verdict == AdmissibilityVerdict::StrictlyAdmissible);
  REQUIRE(res.margin == Catch::Approx(0.25).margin(1e-7));
  REQUIRE(res.reconstruction_error < 1e-8);
}

TEST_CASE("uniform load 0.6 on the 2x2 switch is inadmissible by 1/6") {
  Preset p = switch_preset(2);
  auto cp = ConstraintProcess::static_constraints();
  auto res = check_admissible(mean_rate(uniform_bernoulli(4, 0.6)),
                              p.topology, cp, p.regions);
  REQUIRE(res.verdict == AdmissibilityVerdict::Inadmissible);
  REQUIRE(res.margin == Catch::Approx(-1.0 / 6.0).margin(1e-7));
}

TEST_CASE("admissibility flips across the uniform capacity 0.5") {
  Preset p = switch_preset(2);
  auto cp = ConstraintProcess::static_constraints();
  auto low = check_admissible(mean_rate(uniform_bernoulli(4, 0.499)),
                              p.topology, cp, p.regions);
  auto high = check_admissible(mean_rate(uniform_bernoulli(4, 0.501)),
                               p.topology, cp, p.regions);
  REQUIRE(low.verdict == AdmissibilityVerdict::StrictlyAdmissible);
  REQUIRE(low.margin > 1e-9);
  REQUIRE(high.verdict == AdmissibilityVerdict::Inadmissible);
  REQUIRE(high.margin < -1e-9);
}

TEST_CASE("zero workload has unbounded margin") {
  Preset p = switch_preset(2);
  auto cp = ConstraintProcess::static_constraints();
  auto res = check_admissible(mean_rate(uniform_bernoulli(4, 0.0)),
                              p.topology, cp, p.regions);
  REQUIRE(res.verdict == AdmissibilityVerdict::StrictlyAdmissible);
  REQUIRE(res.unbounded_margin);
}

TEST_CASE("witness mixture reconstructs the scaled workload") {
  Preset p = switch_preset(2);
  auto cp = ConstraintProcess::static_constraints();
  RealVec lambda{0.3, 0.1, 0.2, 0.4};
  auto res = check_admissible(lambda, p.topology, cp, p.regions);
  REQUIRE(res.reconstruction_error < 1e-8);
  double total = 0.0;
  for (double w : res.witness[0]) {
    REQUIRE(w >= -1e-12);
    total += w;
  }
  REQUIRE(total == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("LP margin matches hull bisection on hand-built regions") {
  struct Case {
    std::vector<IntVec> vertices;
    RealVec lambda;
  };
  const std::vector<Case> cases = {
      // segment [0, 2] on one queue
      {{{0}, {2}}, {0.7}},
      // triangle: serve one of two queues
      {{{0, 0}, {1, 0}, {0, 1}}, {0.25, 0.25}},
      // skewed quadrilateral with an interior-dominating vertex
      {{{0, 0}, {2, 0}, {0, 2}, {1, 2}}, {0.5, 0.8}},
  };
  for (const auto& c : cases) {
    const auto m = static_cast<int>(c.lambda.size());
    std::vector<int> pq(static_cast<std::size_t>(m));
    std::vector<Flow> flows;
    for (int v = 0; v < m; ++v) {
      pq[static_cast<std::size_t>(v)] = v;
      flows.push_back({"f" + std::to_string(v), {v}});
    }
    NetworkTopology t = make_topology(m, pq, std::move(flows));
    DepartureRegion r{"hand", c.vertices};
    auto cp = ConstraintProcess::static_constraints();
    auto lp = check_admissible(c.lambda, t, cp, {r});
    const double oracle = brute_force_margin(c.vertices, lp.workload);
    REQUIRE(lp.margin == Catch::Approx(oracle).margin(1e-6));
  }
}

TEST_CASE("admissibility is monotone on the switch preset") {
  Preset p = switch_preset(2);
  auto cp = ConstraintProcess::static_constraints();
  Rng rng(1234, 0, RngStream::Aux);
  for (int trial = 0; trial < 40; ++trial) {
    RealVec lambda(4), smaller(4);
    for (std::size_t i = 0; i < 4; ++i) {
      lambda[i] = 0.62 * rng.real01();
      smaller[i] = lambda[i] * rng.real01();
    }
    auto big = check_admissible(lambda, p.topology, cp, p.regions);
    if (big.verdict != AdmissibilityVerdict::Inadmissible) {
      auto small = check_admissible(smaller, p.topology, cp, p.regions);
      REQUIRE(small.margin >= big.margin - 1e-9);
      REQUIRE(small.verdict != AdmissibilityVerdict::Inadmissible);
    }
  }
}

TEST_CASE("relaxed dominance agrees with equality on down-closed regions") {
  Preset p = switch_preset(2);
  auto cp = ConstraintProcess::static_constraints();
  Rng rng(77, 0, RngStream::Aux);
  for (int trial = 0; trial < 20; ++trial) {
    RealVec lambda(4);
    for (auto& v : lambda) v = 0.55 * rng.real01() + 0.01;
    auto eq = check_admissible(lambda, p.topology, cp, p.regions, false);
    auto rel = check_admissible(lambda, p.topology, cp, p.regions, true);
    REQUIRE(eq.margin == Catch::Approx(rel.margin).margin(1e-6));
  }
}

TEST_CASE("two-state constraint mixtures shrink the region") {
  // State B loses the identity matching; the uniform capacity drops below
  // 0.5 accordingly.
  Preset p = switch_preset(2);
  DepartureRegion degraded{"degraded", {}};
  for (const auto& v : p.regions[0].vertices)
    if (v != IntVec{1, 0, 0, 1}) degraded.vertices.push_back(v);
  std::vector<DepartureRegion> regions{p.regions[0], degraded};
  ConstraintProcess cp;
  cp.chain = FiniteMarkovChain{{{0.9, 0.1}, {0.2, 0.8}}, 0};
  cp.region_of_state = {0, 1};

  auto res = check_admissible(mean_rate(uniform_bernoulli(4, 0.25)),
                              p.topology, cp, regions);
  REQUIRE(res.verdict == AdmissibilityVerdict::StrictlyAdmissible);

  // The degraded-state region cannot serve both diagonal queues at once,
  // so uniform capacity is strictly below 0.5.
  auto at_half = check_admissible(mean_rate(uniform_bernoulli(4, 0.5)),
                                  p.topology, cp, regions);
  REQUIRE(at_half.margin < -1e-6);
}

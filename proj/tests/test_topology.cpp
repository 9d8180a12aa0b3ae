#include <catch2/catch_amalgamated.hpp>

#include <vector>

#include "qnet/rng.hpp"
#include "qnet/topology.hpp"

using namespace qnet;

namespace {

NetworkTopology tandem2() {
  // Two physical queues in series, one flow traversing both.
  return make_topology(2, {0, 1}, {{"f0", {0, 1}}});
}

NetworkTopology chain3() {
  return make_topology(3, {0, 1, 2}, {{"f0", {0, 1, 2}}});
}

NetworkTopology single_hop(int m) {
  std::vector<int> pq(static_cast<std::size_t>(m));
  std::vector<Flow> flows;
  for (int v = 0; v < m; ++v) {
    pq[static_cast<std::size_t>(v)] = v;
    flows.push_back({"f" + std::to_string(v), {v}});
  }
  return make_topology(m, pq, std::move(flows));
}

}  // namespace

TEST_CASE("tandem topology validates and inverts (I-R)") {
  NetworkTopology t = tandem2();
  TopologyReport rep = validate_topology(t);
  REQUIRE(rep.valid());
  REQUIRE(rep.i_minus_r_inverse.has_value());
  const IntMatrix& inv = *rep.i_minus_r_inverse;
  REQUIRE(inv == IntMatrix{{1, 1}, {0, 1}});
}

TEST_CASE("forking routing rows are flagged") {
  NetworkTopology t = single_hop(3);
  t.routing = {{0, 1, 1}, {0, 0, 0}, {0, 0, 0}};
  TopologyReport rep = validate_topology(t);
  REQUIRE_FALSE(rep.valid());
  bool found = false;
  for (const auto& v : rep.violations)
    if (v.code == "forking") found = true;
  REQUIRE(found);
}

TEST_CASE("routing cycles are flagged as non-nilpotent") {
  NetworkTopology t = single_hop(2);
  t.routing = {{0, 1}, {1, 0}};
  TopologyReport rep = validate_topology(t);
  REQUIRE_FALSE(rep.valid());
  bool found = false;
  for (const auto& v : rep.violations)
    if (v.code == "non-nilpotent routing") found = true;
  REQUIRE(found);
  REQUIRE_FALSE(rep.i_minus_r_inverse.has_value());
}

TEST_CASE("flow paths must follow the routing matrix") {
  NetworkTopology t = tandem2();
  t.routing[0][1] = 0;  // break the hop the flow declares
  TopologyReport rep = validate_topology(t);
  REQUIRE_FALSE(rep.valid());
}

TEST_CASE("step moves a customer downstream in a tandem") {
  NetworkTopology t = tandem2();
  QueueState x{3, 1};
  QueueState next = step(x, {1, 0}, {1, 0}, t);
  REQUIRE(next == QueueState{3, 2});
}

TEST_CASE("step with no arrivals or departures is the identity") {
  NetworkTopology t = tandem2();
  QueueState x{5, 7};
  REQUIRE(step(x, {0, 0}, {0, 0}, t) == x);
}

TEST_CASE("step is componentwise for single-hop traffic") {
  NetworkTopology t = single_hop(2);
  QueueState x{2, 2};
  REQUIRE(step(x, {0, 1}, {2, 0}, t) == QueueState{0, 3});
}

TEST_CASE("infeasible departures are a fault") {
  NetworkTopology t = single_hop(2);
  QueueState x{1, 0};
  REQUIRE_THROWS_AS(step(x, {0, 0}, {0, 1}, t), InfeasibleDeparture);
}

TEST_CASE("workload traverses the tandem path") {
  NetworkTopology t = tandem2();
  RealVec w = workload({0.3, 0.0}, t);
  REQUIRE(w[0] == Catch::Approx(0.3));
  REQUIRE(w[1] == Catch::Approx(0.3));
}

TEST_CASE("workload equals the rates for single-hop traffic") {
  NetworkTopology t = single_hop(3);
  RealVec lambda{0.1, 0.5, 0.25};
  RealVec w = workload(lambda, t);
  for (std::size_t i = 0; i < 3; ++i)
    REQUIRE(w[i] == Catch::Approx(lambda[i]));
}

TEST_CASE("workload on a three-queue chain accumulates upstream rates") {
  // Oracle: multiply by the precomputed inverse [[1,1,1],[0,1,1],[0,0,1]].
  NetworkTopology t = chain3();
  RealVec w = workload({0.2, 0.1, 0.0}, t);
  REQUIRE(w[0] == Catch::Approx(0.2));
  REQUIRE(w[1] == Catch::Approx(0.3));
  REQUIRE(w[2] == Catch::Approx(0.3));
}

TEST_CASE("(I-R)^{-1} equals the truncated geometric series") {
  NetworkTopology t = chain3();
  TopologyReport rep = validate_topology(t);
  REQUIRE(rep.valid());
  // By nilpotency the series ends within M terms: I + R + R^2.
  IntMatrix expect{{1, 1, 1}, {0, 1, 1}, {0, 0, 1}};
  REQUIRE(*rep.i_minus_r_inverse == expect);
}

TEST_CASE("conservation holds along random feasible trajectories") {
  NetworkTopology t = chain3();
  Rng rng(123, 0, RngStream::Aux);
  QueueState x{0, 0, 0};
  const QueueState x0 = x;
  IntVec arr_total(3, 0);   // external arrivals
  IntVec dep_total(3, 0);   // departures
  IntVec rec_total(3, 0);   // recirculation into each queue
  for (int slot = 0; slot < 500; ++slot) {
    IntVec a(3), d(3);
    for (std::size_t i = 0; i < 3; ++i) {
      a[i] = static_cast<std::int64_t>(rng.below(3));
      d[i] = x[i] > 0 ? static_cast<std::int64_t>(
                            rng.below(static_cast<std::uint64_t>(x[i]) + 1))
                      : 0;
    }
    for (std::size_t i = 0; i < 3; ++i) {
      arr_total[i] += a[i];
      dep_total[i] += d[i];
      int down = t.downstream(static_cast<int>(i));
      if (down >= 0) rec_total[static_cast<std::size_t>(down)] += d[i];
    }
    x = step(x, a, d, t);
    for (auto v : x) REQUIRE(v >= 0);
  }
  for (std::size_t i = 0; i < 3; ++i)
    REQUIRE(x[i] - x0[i] == arr_total[i] + rec_total[i] - dep_total[i]);
}

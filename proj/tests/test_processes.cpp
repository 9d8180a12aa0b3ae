#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "qnet/processes.hpp"
#include "qnet/rng.hpp"

using namespace qnet;

namespace {

ArrivalProcess iid_bernoulli(std::size_t queues, double p) {
  ArrivalProcess a;
  a.chain = FiniteMarkovChain{{{1.0}}, 0};
  a.per_state.push_back(std::vector<BatchDistribution>(
      queues, BatchDistribution::bernoulli(p)));
  return a;
}

}  // namespace

TEST_CASE("degenerate bernoulli arrivals are constant") {
  ArrivalProcess ones = iid_bernoulli(3, 1.0);
  ArrivalProcess zeros = iid_bernoulli(3, 0.0);
  Rng rng(1, 0, RngStream::ArrivalBatch);
  for (int i = 0; i < 50; ++i) {
    REQUIRE(sample_arrivals(ones, 0, rng) == IntVec{1, 1, 1});
    REQUIRE(sample_arrivals(zeros, 0, rng) == IntVec{0, 0, 0});
  }
}

TEST_CASE("bernoulli(0.4) empirical mean within the binomial CI") {
  ArrivalProcess a = iid_bernoulli(2, 0.4);
  Rng rng(2024, 0, RngStream::ArrivalBatch);
  const int n = 100000;
  std::int64_t sum0 = 0, sum1 = 0;
  for (int i = 0; i < n; ++i) {
    IntVec v = sample_arrivals(a, 0, rng);
    sum0 += v[0];
    sum1 += v[1];
  }
  // 3 sigma = 3 sqrt(0.4*0.6/1e5) ~ 0.0046 < 0.005
  REQUIRE(sum0 / double(n) == Catch::Approx(0.4).margin(0.005));
  REQUIRE(sum1 / double(n) == Catch::Approx(0.4).margin(0.005));
}

TEST_CASE("mean rate of iid traffic is the per-state rate") {
  ArrivalProcess a = iid_bernoulli(4, 0.4);
  RealVec lambda = mean_rate(a);
  for (double l : lambda) REQUIRE(l == Catch::Approx(0.4));
}

TEST_CASE("mean rate averages over the modulating chain") {
  ArrivalProcess a;
  a.chain = FiniteMarkovChain{{{0.5, 0.5}, {0.5, 0.5}}, 0};
  a.per_state = {{BatchDistribution::bernoulli(0.8)},
                 {BatchDistribution::bernoulli(0.0)}};
  REQUIRE(mean_rate(a)[0] == Catch::Approx(0.4));
}

TEST_CASE("mean rate weights states by the stationary distribution") {
  // pi = (2/3, 1/3); rates (0.3, 0.6) -> 2/3*0.3 + 1/3*0.6 = 0.4.
  ArrivalProcess a;
  a.chain = FiniteMarkovChain{{{0.9, 0.1}, {0.2, 0.8}}, 0};
  a.per_state = {{BatchDistribution::bernoulli(0.3)},
                 {BatchDistribution::bernoulli(0.6)}};
  REQUIRE(mean_rate(a)[0] == Catch::Approx(0.4).epsilon(1e-10));
}

TEST_CASE("batch distributions validate their support") {
  BatchDistribution bad{{0, -1}, {0.5, 0.5}};
  REQUIRE_THROWS_AS(bad.validate(), std::invalid_argument);
  BatchDistribution bad_sum{{0, 1}, {0.5, 0.6}};
  REQUIRE_THROWS_AS(bad_sum.validate(), std::invalid_argument);
}

TEST_CASE("scaling a batch distribution scales its mean exactly") {
  BatchDistribution d{{0, 1, 2}, {0.5, 0.3, 0.2}};
  for (double rho : {0.25, 0.5, 1.0, 1.3}) {
    BatchDistribution s = d.scaled(rho);
    s.validate();
    REQUIRE(s.mean() == Catch::Approx(rho * d.mean()).epsilon(1e-12));
  }
  // Scaling beyond probability mass 1 must fail: nonzero mass 0.5 * 2.1 > 1.
  REQUIRE_THROWS_AS(d.scaled(2.1), std::invalid_argument);
}

TEST_CASE("max batch bound covers all states") {
  ArrivalProcess a;
  a.chain = FiniteMarkovChain{{{0.5, 0.5}, {0.5, 0.5}}, 0};
  a.per_state = {{BatchDistribution{{0, 3}, {0.9, 0.1}}},
                 {BatchDistribution::bernoulli(0.2)}};
  REQUIRE(a.max_batch() == 3);
}

TEST_CASE("constraint process validates its region map") {
  ConstraintProcess c;
  c.chain = FiniteMarkovChain{{{0.5, 0.5}, {0.5, 0.5}}, 0};
  c.region_of_state = {0, 2};
  REQUIRE_THROWS_AS(c.validate(2), std::invalid_argument);
  c.region_of_state = {0, 1};
  REQUIRE_NOTHROW(c.validate(2));
}

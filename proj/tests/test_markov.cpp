#include <catch2/catch_amalgamated.hpp>

#include <vector>

#include "qnet/markov.hpp"
#include "qnet/rng.hpp"

using namespace qnet;

TEST_CASE("steady state of the symmetric two-state chain") {
  FiniteMarkovChain c{{{0.5, 0.5}, {0.5, 0.5}}, 0};
  RealVec pi = steady_state(c);
  REQUIRE(pi[0] == Catch::Approx(0.5).epsilon(1e-12));
  REQUIRE(pi[1] == Catch::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("steady state of a one-state chain is trivial") {
  FiniteMarkovChain c{{{1.0}}, 0};
  RealVec pi = steady_state(c);
  REQUIRE(pi.size() == 1);
  REQUIRE(pi[0] == Catch::Approx(1.0));
}

TEST_CASE("steady state solves the two-state balance equations") {
  // Balance: pi0 * 0.1 = pi1 * 0.2, pi0 + pi1 = 1 -> pi = (2/3, 1/3).
  FiniteMarkovChain c{{{0.9, 0.1}, {0.2, 0.8}}, 0};
  RealVec pi = steady_state(c);
  REQUIRE(pi[0] == Catch::Approx(2.0 / 3.0).epsilon(1e-10));
  REQUIRE(pi[1] == Catch::Approx(1.0 / 3.0).epsilon(1e-10));
}

TEST_CASE("reducible chains are rejected") {
  FiniteMarkovChain c{{{1.0, 0.0}, {0.0, 1.0}}, 0};
  REQUIRE_THROWS_AS(steady_state(c), std::invalid_argument);
}

TEST_CASE("non-stochastic rows are rejected") {
  FiniteMarkovChain c{{{0.5, 0.4}, {0.5, 0.5}}, 0};
  REQUIRE_THROWS_AS(validate_chain(c), std::invalid_argument);
}

TEST_CASE("steady state is permutation-equivariant") {
  FiniteMarkovChain c{{{0.7, 0.2, 0.1}, {0.3, 0.5, 0.2}, {0.25, 0.25, 0.5}},
                      0};
  RealVec pi = steady_state(c);

  const std::vector<std::size_t> perm{2, 1, 0};  // swap states 0 and 2
  FiniteMarkovChain cp;
  cp.initial = 0;
  cp.transition.assign(3, RealVec(3, 0.0));
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      cp.transition[perm[i]][perm[j]] = c.transition[i][j];
  RealVec pip = steady_state(cp);
  for (std::size_t i = 0; i < 3; ++i)
    REQUIRE(pip[perm[i]] == Catch::Approx(pi[i]).epsilon(1e-10));
}

TEST_CASE("step_chain occupancy converges to the stationary law") {
  FiniteMarkovChain c{{{0.9, 0.1}, {0.2, 0.8}}, 0};
  Rng rng(77, 0, RngStream::ConstraintChain);
  int state = c.initial;
  std::vector<int> visits(2, 0);
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    state = step_chain(c, state, rng);
    ++visits[static_cast<std::size_t>(state)];
  }
  REQUIRE(visits[0] / double(n) == Catch::Approx(2.0 / 3.0).margin(0.01));
}

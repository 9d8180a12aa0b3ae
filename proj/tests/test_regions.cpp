#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <set>
#include <vector>

#include "qnet/regions.hpp"
#include "qnet/rng.hpp"

using namespace qnet;

namespace {

// Independent oracle: enumerate every 0/1 matrix and keep those with row
// and column sums at most one.
std::set<IntVec> brute_force_subpermutations(int n) {
  std::set<IntVec> out;
  const int cells = n * n;
  for (std::uint64_t mask = 0; mask < (1ull << cells); ++mask) {
    IntVec v(static_cast<std::size_t>(cells), 0);
    for (int c = 0; c < cells; ++c) v[static_cast<std::size_t>(c)] =
        static_cast<std::int64_t>((mask >> c) & 1ull);
    bool ok = true;
    for (int i = 0; i < n && ok; ++i) {
      std::int64_t rs = 0, cs = 0;
      for (int j = 0; j < n; ++j) {
        rs += v[static_cast<std::size_t>(i * n + j)];
        cs += v[static_cast<std::size_t>(j * n + i)];
      }
      if (rs > 1 || cs > 1) ok = false;
    }
    if (ok) out.insert(std::move(v));
  }
  return out;
}

// Independent oracle for independent sets over an explicit edge list.
std::set<IntVec> brute_force_independent_sets(
    int n, const std::vector<std::pair<int, int>>& edges) {
  std::set<IntVec> out;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    bool ok = true;
    for (auto [a, b] : edges)
      if (((mask >> a) & 1u) && ((mask >> b) & 1u)) ok = false;
    if (!ok) continue;
    IntVec v(static_cast<std::size_t>(n), 0);
    for (int i = 0; i < n; ++i)
      v[static_cast<std::size_t>(i)] =
          static_cast<std::int64_t>((mask >> i) & 1u);
    out.insert(std::move(v));
  }
  return out;
}

}  // namespace

TEST_CASE("switch region vertex counts match brute force") {
  REQUIRE(switch_region(1).vertices.size() == 2);
  REQUIRE(switch_region(2).vertices.size() == 7);
  REQUIRE(switch_region(3).vertices.size() == 34);
  for (int n = 1; n <= 4; ++n) {
    auto oracle = brute_force_subpermutations(n);
    DepartureRegion r = switch_region(n);
    REQUIRE(r.vertices.size() == oracle.size());
    for (const auto& v : r.vertices) REQUIRE(oracle.count(v) == 1);
  }
}

TEST_CASE("switch region has the zero vertex first and validates") {
  DepartureRegion r = switch_region(2);
  REQUIRE(r.zero_vertex() == 0);
  REQUIRE_NOTHROW(r.validate(4));
  REQUIRE(r.d_max() == 1);
}

TEST_CASE("switch region enumeration is guarded") {
  REQUIRE_THROWS_AS(switch_region(7), std::invalid_argument);
  REQUIRE_THROWS_AS(switch_region(0), std::invalid_argument);
}

TEST_CASE("independent sets of the empty graph are all subsets") {
  ContentionGraph g{2, {}};
  REQUIRE(independent_set_region(g).vertices.size() == 4);
}

TEST_CASE("independent sets of a single edge") {
  ContentionGraph g{2, {{0, 1}}};
  DepartureRegion r = independent_set_region(g);
  REQUIRE(r.vertices.size() == 3);  // {}, {0}, {1}
}

TEST_CASE("independent sets of the 3-path match brute force") {
  ContentionGraph g{3, {{0, 1}, {1, 2}}};
  DepartureRegion r = independent_set_region(g);
  REQUIRE(r.vertices.size() == 5);  // {}, {0}, {1}, {2}, {0,2}
  auto oracle = brute_force_independent_sets(3, g.edges);
  REQUIRE(r.vertices.size() == oracle.size());
  for (const auto& v : r.vertices) REQUIRE(oracle.count(v) == 1);
}

TEST_CASE("independent-set region is closed under subsets") {
  ContentionGraph g{5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {0, 4}}};
  DepartureRegion r = independent_set_region(g);
  std::set<IntVec> all(r.vertices.begin(), r.vertices.end());
  for (const auto& v : r.vertices)
    for (std::size_t drop = 0; drop < v.size(); ++drop) {
      if (v[drop] == 0) continue;
      IntVec sub = v;
      sub[drop] = 0;
      REQUIRE(all.count(sub) == 1);
    }
}

TEST_CASE("independent-set enumeration guard") {
  ContentionGraph g{25, {}};
  REQUIRE_THROWS_AS(independent_set_region(g), std::invalid_argument);
}

TEST_CASE("region validation rejects malformed vertex lists") {
  DepartureRegion no_zero{"bad", {{1, 0}, {0, 1}}};
  REQUIRE_THROWS_AS(no_zero.validate(2), std::invalid_argument);
  DepartureRegion dup{"bad", {{0, 0}, {1, 0}, {1, 0}}};
  REQUIRE_THROWS_AS(dup.validate(2), std::invalid_argument);
  DepartureRegion neg{"bad", {{0, 0}, {-1, 0}}};
  REQUIRE_THROWS_AS(neg.validate(2), std::invalid_argument);
}

TEST_CASE("truncate basics") {
  REQUIRE(truncate(IntVec{1, 1}, IntVec{0, 5}) == IntVec{0, 1});
  REQUIRE(truncate(IntVec{2, 0}, IntVec{1, 3}) == IntVec{1, 0});
  REQUIRE(truncate(IntVec{1, 2}, IntVec{4, 4}) == IntVec{1, 2});
}

TEST_CASE("truncate is idempotent and monotone") {
  Rng rng(31, 0, RngStream::Aux);
  for (int trial = 0; trial < 200; ++trial) {
    IntVec d(4), x(4), x2(4);
    for (std::size_t i = 0; i < 4; ++i) {
      d[i] = static_cast<std::int64_t>(rng.below(5));
      x[i] = static_cast<std::int64_t>(rng.below(5));
      x2[i] = x[i] + static_cast<std::int64_t>(rng.below(3));
    }
    IntVec t1 = truncate(d, x);
    REQUIRE(truncate(t1, x) == t1);            // idempotent
    IntVec t2 = truncate(d, x2);
    for (std::size_t i = 0; i < 4; ++i) {
      REQUIRE(t1[i] <= t2[i]);                 // monotone in x
      REQUIRE(t1[i] <= d[i]);
      REQUIRE(t1[i] <= x[i]);
    }
  }
}

TEST_CASE("feasible candidates collapse to zero at an empty system") {
  DepartureRegion r = switch_region(2);
  auto cands = feasible_candidates(r, QueueState{0, 0, 0, 0});
  REQUIRE(cands.size() == 1);
  REQUIRE(cands[0].departures == IntVec{0, 0, 0, 0});
  REQUIRE(cands[0].vertex_id == 0);
}

TEST_CASE("feasible candidates equal the vertices when backlog dominates") {
  DepartureRegion r = switch_region(2);
  auto cands = feasible_candidates(r, QueueState{9, 9, 9, 9});
  REQUIRE(cands.size() == r.vertices.size());
  for (std::size_t i = 0; i < cands.size(); ++i) {
    REQUIRE(cands[i].departures == r.vertices[i]);
    REQUIRE(cands[i].vertex_id == static_cast<int>(i));
  }
}

TEST_CASE("feasible candidates deduplicate truncations") {
  // x = (0,1,1,0) collapses the 7 sub-permutation vertices to 4 vectors.
  DepartureRegion r = switch_region(2);
  auto cands = feasible_candidates(r, QueueState{0, 1, 1, 0});
  REQUIRE(cands.size() == 4);
  std::set<IntVec> seen;
  for (const auto& c : cands) {
    seen.insert(c.departures);
    // every candidate is the truncation of its originating vertex
    REQUIRE(c.departures ==
            truncate(r.vertices[static_cast<std::size_t>(c.vertex_id)],
                     QueueState{0, 1, 1, 0}));
  }
  REQUIRE(seen.size() == 4);
}

TEST_CASE("candidates never exceed the backlog") {
  ContentionGraph g{4, {{0, 1}, {1, 2}, {2, 3}}};
  DepartureRegion r = independent_set_region(g);
  Rng rng(8, 0, RngStream::Aux);
  for (int trial = 0; trial < 100; ++trial) {
    QueueState x(4);
    for (auto& v : x) v = static_cast<std::int64_t>(rng.below(4));
    for (const auto& c : feasible_candidates(r, x))
      for (std::size_t i = 0; i < x.size(); ++i)
        REQUIRE(c.departures[i] <= x[i]);
  }
}

#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>

namespace qnet {

/// Stateless seed mixer (splitmix64). Used to derive independent stream
/// seeds from a single experiment seed without correlation between streams.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Well-known stream tags so that arrival, constraint and policy randomness
/// never share a generator within a replication.
enum class RngStream : std::uint64_t {
  ArrivalChain = 1,
  ArrivalBatch = 2,
  ConstraintChain = 3,
  Policy = 4,
  Aux = 5,
};

inline std::uint64_t derive_seed(std::uint64_t experiment_seed,
                                 std::uint64_t replication, RngStream stream) {
  std::uint64_t s = splitmix64(experiment_seed);
  s = splitmix64(s ^ (0x517cc1b727220a95ULL * (replication + 1)));
  return splitmix64(s ^ (0x2545f4914f6cdd1dULL *
                         static_cast<std::uint64_t>(stream)));
}

/// Deterministic random stream. mt19937_64 output is fully specified by the
/// standard; the sampling helpers below avoid std distributions, whose
/// algorithms are implementation-defined, so trajectories are reproducible
/// across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  Rng(std::uint64_t experiment_seed, std::uint64_t replication,
      RngStream stream)
      : gen_(derive_seed(experiment_seed, replication, stream)) {}

  std::uint64_t u64() { return gen_(); }

  /// Uniform integer in [0, n) by rejection; n must be positive.
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("Rng::below: n must be > 0");
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t v = gen_();
    while (v >= limit) v = gen_();
    return v % n;
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double real01() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  bool bernoulli(double p) { return real01() < p; }

  /// Sample an index from explicit probabilities (must sum to ~1).
  std::size_t categorical(std::span<const double> probs) {
    double u = real01();
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
      acc += probs[i];
      if (u < acc) return i;
    }
    return probs.empty() ? 0 : probs.size() - 1;
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace qnet

#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace qnet {

// Queue states are integer vectors; weights, rates and pressures are real.
using IntVec = std::vector<std::int64_t>;
using RealVec = std::vector<double>;
using IntMatrix = std::vector<std::vector<std::int64_t>>;
using RealMatrix = std::vector<std::vector<double>>;

using QueueState = IntVec;

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double dot(std::span<const double> a, std::span<const std::int64_t> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    s += a[i] * static_cast<double>(b[i]);
  return s;
}

inline std::int64_t l1_norm(std::span<const std::int64_t> x) {
  std::int64_t s = 0;
  for (auto v : x) s += v < 0 ? -v : v;
  return s;
}

inline double l2_norm(std::span<const std::int64_t> x) {
  double s = 0.0;
  for (auto v : x) s += static_cast<double>(v) * static_cast<double>(v);
  return std::sqrt(s);
}

inline double l2_norm(std::span<const double> x) {
  double s = 0.0;
  for (auto v : x) s += v * v;
  return std::sqrt(s);
}

inline RealVec to_real(std::span<const std::int64_t> x) {
  RealVec out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    out[i] = static_cast<double>(x[i]);
  return out;
}

/// Componentwise min(d, x), the feasibility truncation used throughout.
inline IntVec truncate(std::span<const std::int64_t> d,
                       std::span<const std::int64_t> x) {
  IntVec out(d.size());
  for (std::size_t i = 0; i < d.size(); ++i)
    out[i] = d[i] < x[i] ? d[i] : x[i];
  return out;
}

inline void truncate_into(std::span<const std::int64_t> d,
                          std::span<const std::int64_t> x, IntVec& out) {
  out.resize(d.size());
  for (std::size_t i = 0; i < d.size(); ++i)
    out[i] = d[i] < x[i] ? d[i] : x[i];
}

}  // namespace qnet

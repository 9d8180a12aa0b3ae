#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qnet/linalg.hpp"

namespace qnet {

struct RecorderRow {
  std::int64_t slot = 0;
  std::int64_t l1 = 0;
  double l2 = 0.0;
  IntVec x;
  int vertex_id = 0;
  int s_d = 0;
};

/// Strided trajectory recorder with running moment accumulators of
/// ||X||_2^h, h = 1..H. One update per recorded slot.
class StatsRecorder {
 public:
  explicit StatsRecorder(std::int64_t sample_every = 1, int max_moment = 4)
      : sample_every_(sample_every), moment_sums_(max_moment, 0.0) {
    if (sample_every_ < 1)
      throw std::invalid_argument("recorder stride must be >= 1");
    if (max_moment < 1)
      throw std::invalid_argument("recorder needs at least one moment");
  }

  void observe(std::int64_t slot, const QueueState& x, int vertex_id,
               int s_d) {
    if (slot % sample_every_ != 0) return;
    RecorderRow row;
    row.slot = slot;
    row.l1 = l1_norm(x);
    row.l2 = l2_norm(x);
    row.x = x;
    row.vertex_id = vertex_id;
    row.s_d = s_d;
    double p = 1.0;
    for (auto& acc : moment_sums_) {
      p *= row.l2;
      acc += p;
    }
    ++recorded_;
    rows_.push_back(std::move(row));
  }

  const std::vector<RecorderRow>& rows() const { return rows_; }
  std::int64_t sample_every() const { return sample_every_; }
  int max_moment() const { return static_cast<int>(moment_sums_.size()); }

  /// Running time-average of ||X||_2^h over all recorded slots.
  double running_moment(int h) const {
    if (h < 1 || h > max_moment())
      throw std::invalid_argument("moment order out of range");
    if (recorded_ == 0) return 0.0;
    return moment_sums_[static_cast<std::size_t>(h - 1)] /
           static_cast<double>(recorded_);
  }

 private:
  std::int64_t sample_every_;
  std::int64_t recorded_ = 0;
  RealVec moment_sums_;
  std::vector<RecorderRow> rows_;
};

enum class GrowthClass { Stable, Unstable, Inconclusive };

inline std::string to_string(GrowthClass c) {
  switch (c) {
    case GrowthClass::Stable:
      return "stable";
    case GrowthClass::Unstable:
      return "unstable";
    case GrowthClass::Inconclusive:
      return "inconclusive";
  }
  return "?";
}

struct SlopeConfig {
  int windows = 20;
  double tau_stable = 1e-3;   // customers per slot
  double tau_unstable = 1e-2;
};

struct SlopeResult {
  double slope = 0.0;
  GrowthClass classification = GrowthClass::Inconclusive;
  int windows_used = 0;
};

/// Growth-rate classifier: least-squares slope of windowed means of
/// ||X_t||_1 against t, restricted to the second half of the run so the
/// transient from the empty start does not bias the fit.
inline SlopeResult slope_test(std::span<const std::int64_t> ts,
                              std::span<const double> l1s,
                              const SlopeConfig& cfg = {}) {
  if (ts.size() != l1s.size())
    throw std::invalid_argument("slope_test: series length mismatch");
  if (ts.size() < 100)
    throw std::invalid_argument("slope_test: need at least 100 points");

  const std::size_t begin = ts.size() / 2;
  const std::size_t n = ts.size() - begin;
  const int windows = std::max(2, std::min<int>(cfg.windows,
                                                static_cast<int>(n) / 2));
  std::vector<double> wt(static_cast<std::size_t>(windows), 0.0);
  std::vector<double> wy(static_cast<std::size_t>(windows), 0.0);
  std::vector<std::size_t> wc(static_cast<std::size_t>(windows), 0);
  for (std::size_t i = 0; i < n; ++i) {
    auto w = static_cast<std::size_t>(
        (i * static_cast<std::size_t>(windows)) / n);
    wt[w] += static_cast<double>(ts[begin + i]);
    wy[w] += l1s[begin + i];
    ++wc[w];
  }
  double mt = 0.0, my = 0.0;
  int used = 0;
  for (int w = 0; w < windows; ++w) {
    auto wi = static_cast<std::size_t>(w);
    if (wc[wi] == 0) continue;
    wt[wi] /= static_cast<double>(wc[wi]);
    wy[wi] /= static_cast<double>(wc[wi]);
    mt += wt[wi];
    my += wy[wi];
    ++used;
  }
  mt /= used;
  my /= used;
  double sxx = 0.0, sxy = 0.0;
  for (int w = 0; w < windows; ++w) {
    auto wi = static_cast<std::size_t>(w);
    if (wc[wi] == 0) continue;
    sxx += (wt[wi] - mt) * (wt[wi] - mt);
    sxy += (wt[wi] - mt) * (wy[wi] - my);
  }

  SlopeResult res;
  res.windows_used = used;
  res.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  if (std::abs(res.slope) < cfg.tau_stable)
    res.classification = GrowthClass::Stable;
  else if (res.slope > cfg.tau_unstable)
    res.classification = GrowthClass::Unstable;
  else
    res.classification = GrowthClass::Inconclusive;
  return res;
}

struct MomentReport {
  int order = 0;
  double average = 0.0;       // mean of ||X||_2^h over the series
  double window_ratio = 1.0;  // last-quarter mean over last-half mean
  bool bounded = false;       // ratio within [0.8, 1.25]
};

/// Boundedness heuristic for E[||X||^h]: on a stationary trajectory the
/// last-quarter and last-half averages agree; on a growing one the tail
/// window dominates.
inline MomentReport moment_report(std::span<const double> l2s, int h) {
  if (h < 1) throw std::invalid_argument("moment order must be >= 1");
  MomentReport rep;
  rep.order = h;
  if (l2s.empty()) {
    rep.bounded = true;
    return rep;
  }
  auto mean_pow = [&](std::size_t from) {
    double s = 0.0;
    for (std::size_t i = from; i < l2s.size(); ++i)
      s += std::pow(l2s[i], h);
    return s / static_cast<double>(l2s.size() - from);
  };
  rep.average = mean_pow(0);
  const double half = mean_pow(l2s.size() / 2);
  const double quarter = mean_pow(l2s.size() - l2s.size() / 4);
  rep.window_ratio =
      half > 0.0 ? quarter / half : (quarter > 0.0
                                         ? std::numeric_limits<double>::infinity()
                                         : 1.0);
  rep.bounded = rep.window_ratio >= 0.8 && rep.window_ratio <= 1.25;
  return rep;
}

struct DriftSample {
  double l1 = 0.0;              // ||X_t||_1
  double delta = 0.0;           // L(X_{t+1}) - L(X_t)
  double delta_over_grad = 0.0; // delta / ||grad G(X_t)||, 0 at idle states
};

struct DriftBin {
  double lo = 0.0, hi = 0.0;
  std::size_t count = 0;
  double mean_delta = 0.0, se_delta = 0.0;
  double mean_norm = 0.0, se_norm = 0.0;
};

struct DriftProfile {
  std::vector<DriftBin> bins;

  /// Non-empty bin covering the largest backlogs.
  const DriftBin* top_bin() const {
    for (auto it = bins.rbegin(); it != bins.rend(); ++it)
      if (it->count > 0) return &*it;
    return nullptr;
  }
};

/// Bins one-slot Lyapunov increments by ||X_t||_1: a leading [0,1) bin plus
/// `n_bins` geometric bins from 1 to the largest observed value.
inline DriftProfile drift_profile(std::span<const DriftSample> samples,
                                  int n_bins = 20) {
  if (n_bins < 1) throw std::invalid_argument("drift_profile: n_bins >= 1");
  DriftProfile prof;
  if (samples.empty()) return prof;
  double max_l1 = 1.0;
  for (const auto& s : samples) max_l1 = std::max(max_l1, s.l1);

  std::vector<double> edges;
  edges.push_back(0.0);
  edges.push_back(1.0);
  if (max_l1 > 1.0) {
    const double ratio = std::pow(max_l1, 1.0 / n_bins);
    double e = 1.0;
    for (int k = 1; k < n_bins; ++k) {
      e *= ratio;
      edges.push_back(e);
    }
    edges.push_back(max_l1);
  }
  const std::size_t nb = edges.size() - 1;
  std::vector<double> sum_d(nb, 0.0), sumsq_d(nb, 0.0);
  std::vector<double> sum_n(nb, 0.0), sumsq_n(nb, 0.0);
  std::vector<std::size_t> count(nb, 0);
  for (const auto& s : samples) {
    std::size_t b =
        static_cast<std::size_t>(std::upper_bound(edges.begin() + 1,
                                                  edges.end(), s.l1) -
                                 (edges.begin() + 1));
    if (b >= nb) b = nb - 1;  // l1 == max lands in the last bin
    sum_d[b] += s.delta;
    sumsq_d[b] += s.delta * s.delta;
    sum_n[b] += s.delta_over_grad;
    sumsq_n[b] += s.delta_over_grad * s.delta_over_grad;
    ++count[b];
  }
  auto se = [](double sum, double sumsq, std::size_t n) {
    if (n < 2) return std::numeric_limits<double>::quiet_NaN();
    const double mean = sum / static_cast<double>(n);
    const double var =
        std::max(0.0, (sumsq - mean * sum) / static_cast<double>(n - 1));
    return std::sqrt(var / static_cast<double>(n));
  };
  prof.bins.resize(nb);
  for (std::size_t b = 0; b < nb; ++b) {
    auto& bin = prof.bins[b];
    bin.lo = edges[b];
    bin.hi = edges[b + 1];
    bin.count = count[b];
    if (count[b] > 0) {
      bin.mean_delta = sum_d[b] / static_cast<double>(count[b]);
      bin.mean_norm = sum_n[b] / static_cast<double>(count[b]);
    }
    bin.se_delta = se(sum_d[b], sumsq_d[b], count[b]);
    bin.se_norm = se(sum_n[b], sumsq_n[b], count[b]);
  }
  return prof;
}

struct RegenerationLog {
  int anchor = 0;
  std::vector<std::int64_t> instants;
  std::vector<std::int64_t> gaps;
  double mean_gap = 0.0;
  double se_mean_gap = 0.0;
  double mean_gap_sq = 0.0;     // E[z^2] estimate
  double se_mean_gap_sq = 0.0;
};

/// Return-time statistics of the modulating state: instants with S_t equal
/// to the anchor, and moments of the gaps between consecutive visits.
inline RegenerationLog regeneration_moments(std::span<const int> states,
                                            int anchor,
                                            std::size_t min_visits = 30) {
  RegenerationLog log;
  log.anchor = anchor;
  for (std::size_t t = 0; t < states.size(); ++t)
    if (states[t] == anchor)
      log.instants.push_back(static_cast<std::int64_t>(t));
  if (log.instants.empty())
    throw std::invalid_argument("regeneration: anchor state never visited");
  if (log.instants.size() < min_visits)
    throw std::invalid_argument(
        "regeneration: anchor visited only " +
        std::to_string(log.instants.size()) + " times (need " +
        std::to_string(min_visits) + ")");
  for (std::size_t k = 1; k < log.instants.size(); ++k)
    log.gaps.push_back(log.instants[k] - log.instants[k - 1]);
  const auto n = static_cast<double>(log.gaps.size());
  double s1 = 0.0, s2 = 0.0, s4 = 0.0;
  for (auto z : log.gaps) {
    const auto zd = static_cast<double>(z);
    s1 += zd;
    s2 += zd * zd;
    s4 += zd * zd * zd * zd;
  }
  log.mean_gap = s1 / n;
  log.mean_gap_sq = s2 / n;
  const double var_z = std::max(0.0, s2 / n - log.mean_gap * log.mean_gap);
  const double var_z2 =
      std::max(0.0, s4 / n - log.mean_gap_sq * log.mean_gap_sq);
  log.se_mean_gap = std::sqrt(var_z / n);
  log.se_mean_gap_sq = std::sqrt(var_z2 / n);
  return log;
}

}  // namespace qnet

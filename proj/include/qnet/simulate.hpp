#pragma once

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qnet/capacity.hpp"
#include "qnet/config.hpp"
#include "qnet/linalg.hpp"
#include "qnet/policies.hpp"
#include "qnet/potential_check.hpp"
#include "qnet/rng.hpp"
#include "qnet/stats.hpp"
#include "qnet/topology.hpp"

namespace qnet {

struct RuntimeFault : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ReplicationResult {
  StatsRecorder recorder{1, 4};
  // Raw one-slot increments; freed once the merged profile is built.
  std::vector<DriftSample> drift_samples;
  DriftProfile drift;
  SlopeResult slope;
  double mean_backlog = 0.0;           // post-warmup mean of ||X||_1
  std::vector<MomentReport> moments;   // h = 1..4, post-warmup
  std::int64_t monotonicity_violations = 0;
  std::int64_t argmax_matches = 0;     // only when track_argmax is on
  std::int64_t argmax_total = 0;
  double wall_seconds = 0.0;
};

struct RunSummary {
  AdmissibilityResult admissibility;
  ValidityReport potential_report;
  std::vector<ReplicationResult> replications;
  double merged_mean_backlog = 0.0;
  std::vector<MomentReport> merged_moments;
  SlopeResult merged_slope;
  DriftProfile merged_drift;
  double wall_seconds = 0.0;
  double slots_per_second = 0.0;
};

namespace detail {

inline std::vector<double> post_warmup_l2(const StatsRecorder& rec,
                                          std::int64_t warmup_end) {
  std::vector<double> out;
  for (const auto& row : rec.rows())
    if (row.slot >= warmup_end) out.push_back(row.l2);
  return out;
}

inline ReplicationResult simulate_replication(const ExperimentConfig& cfg,
                                              Policy& policy,
                                              const Potential& drift_pot,
                                              std::uint64_t replication) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto m = static_cast<std::size_t>(cfg.topology.m_virtual);

  Rng rng_achain(cfg.seed, replication, RngStream::ArrivalChain);
  Rng rng_abatch(cfg.seed, replication, RngStream::ArrivalBatch);
  Rng rng_cchain(cfg.seed, replication, RngStream::ConstraintChain);
  Rng rng_policy(cfg.seed, replication, RngStream::Policy);

  policy.reset(cfg.regions, cfg.constraints.region_of_state);

  ReplicationResult res;
  res.recorder = StatsRecorder(cfg.sample_every, 4);
  if (cfg.drift_enabled)
    res.drift_samples.reserve(static_cast<std::size_t>(cfg.horizon));

  QueueState x(m, 0);
  int s_a = cfg.arrivals.chain.initial;
  int s_d = cfg.constraints.chain.initial;
  double prev_value = cfg.drift_enabled ? drift_pot.value(x) : 0.0;

  for (std::int64_t t = 0; t < cfg.horizon; ++t) {
    s_a = step_chain(cfg.arrivals.chain, s_a, rng_achain);
    s_d = step_chain(cfg.constraints.chain, s_d, rng_cchain);
    const IntVec a = sample_arrivals(cfg.arrivals, s_a, rng_abatch);

    const auto region_index = static_cast<std::size_t>(
        cfg.constraints.region_of_state[static_cast<std::size_t>(s_d)]);
    const DepartureRegion& region = cfg.regions[region_index];

    SlotContext ctx{x, x, region, cfg.topology, s_d, &rng_policy};
    Decision dec = policy.decide(ctx);

    if (cfg.track_argmax) {
      const Decision oracle =
          select_max_scalar(policy.potential(), x, region, cfg.topology);
      if (dec.objective >= oracle.objective - 1e-12) ++res.argmax_matches;
      ++res.argmax_total;
    }

    double l1_before = 0.0, grad_norm = 0.0;
    if (cfg.drift_enabled) {
      l1_before = static_cast<double>(l1_norm(x));
      RealVec grad = drift_pot.gradient(x);
      grad_norm = l2_norm(std::span<const double>(grad));
    }

    QueueState next;
    try {
      next = step(x, a, dec.departures, cfg.topology);
    } catch (const InfeasibleDeparture& e) {
      throw RuntimeFault("slot " + std::to_string(t) + ": " + e.what());
    }

    if (cfg.drift_enabled) {
      const double value = drift_pot.value(next);
      DriftSample s;
      s.l1 = l1_before;
      s.delta = value - prev_value;
      s.delta_over_grad = grad_norm > 1e-12 ? s.delta / grad_norm : 0.0;
      res.drift_samples.push_back(s);
      prev_value = value;
    }

    x = std::move(next);
    res.recorder.observe(t, x, dec.vertex_id, s_d);
  }

  res.monotonicity_violations = policy.monotonicity_violations();

  const auto warmup_end =
      static_cast<std::int64_t>(cfg.warmup_fraction *
                                static_cast<double>(cfg.horizon));
  double backlog_sum = 0.0;
  std::size_t backlog_n = 0;
  std::vector<std::int64_t> ts;
  std::vector<double> l1s;
  for (const auto& row : res.recorder.rows()) {
    ts.push_back(row.slot);
    l1s.push_back(static_cast<double>(row.l1));
    if (row.slot >= warmup_end) {
      backlog_sum += static_cast<double>(row.l1);
      ++backlog_n;
    }
  }
  res.mean_backlog = backlog_n ? backlog_sum / static_cast<double>(backlog_n)
                               : 0.0;
  res.slope = slope_test(ts, l1s);
  const std::vector<double> l2s = post_warmup_l2(res.recorder, warmup_end);
  for (int h = 1; h <= res.recorder.max_moment(); ++h)
    res.moments.push_back(moment_report(l2s, h));
  if (cfg.drift_enabled)
    res.drift = drift_profile(res.drift_samples, cfg.drift_bins);

  res.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return res;
}

inline void write_csv(const std::filesystem::path& path,
                      const StatsRecorder& rec, std::size_t n_queues) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RuntimeFault("cannot write " + path.string());
  out << "slot,l1,l2";
  for (std::size_t q = 0; q < n_queues; ++q) out << ",q_" << q;
  out << ",vertex_id,s_d\n";
  char buf[64];
  for (const auto& row : rec.rows()) {
    out << row.slot << ',' << row.l1 << ',';
    std::snprintf(buf, sizeof(buf), "%.6f", row.l2);
    out << buf;
    for (auto q : row.x) out << ',' << q;
    out << ',' << row.vertex_id << ',' << row.s_d << '\n';
  }
}

inline nlohmann::json moments_json(const std::vector<MomentReport>& ms) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& m : ms)
    arr.push_back({{"h", m.order},
                   {"average", m.average},
                   {"window_ratio", m.window_ratio},
                   {"bounded", m.bounded}});
  return arr;
}

inline nlohmann::json drift_json(const DriftProfile& prof) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& b : prof.bins) {
    nlohmann::json jb = {{"lo", b.lo},
                         {"hi", b.hi},
                         {"count", b.count},
                         {"mean_delta", b.mean_delta},
                         {"mean_norm", b.mean_norm}};
    if (b.count >= 2) {
      jb["se_delta"] = b.se_delta;
      jb["se_norm"] = b.se_norm;
    }
    arr.push_back(std::move(jb));
  }
  return arr;
}

inline nlohmann::json slope_json(const SlopeResult& s) {
  return {{"slope", s.slope},
          {"classification", to_string(s.classification)},
          {"windows_used", s.windows_used}};
}

}  // namespace detail

inline void emit_outputs(const ExperimentConfig& cfg, const RunSummary& sum);

/// Runs every replication of the experiment, merges the statistics, and
/// (when an output directory is configured) emits one CSV per replication
/// plus a JSON summary. Deterministic given (config, seed).
inline RunSummary run_experiment(const ExperimentConfig& cfg) {
  cfg.validate_structure();
  const auto t0 = std::chrono::steady_clock::now();

  RunSummary sum;
  {
    CheckConfig cc;
    cc.vertices = cfg.all_vertices();
    sum.potential_report =
        check_potential(cfg.policy_potential(), cfg.topology, cc);
    if (!sum.potential_report.acceptable() && !cfg.allow_unvalidated)
      throw ConfigError(
          "policy potential fails validity checks (set allow_unvalidated to "
          "override):\n" +
          sum.potential_report.summary());
  }
  sum.admissibility = check_admissible(mean_rate(cfg.arrivals), cfg.topology,
                                       cfg.constraints, cfg.regions);

  PolicyPtr policy = cfg.make_policy();
  const Potential drift_pot = policy->potential();

  for (int r = 0; r < cfg.replications; ++r)
    sum.replications.push_back(detail::simulate_replication(
        cfg, *policy, drift_pot, static_cast<std::uint64_t>(r)));

  // --- merged statistics: order-invariant reductions over replications.
  const auto n_reps = static_cast<double>(sum.replications.size());
  for (const auto& rep : sum.replications)
    sum.merged_mean_backlog += rep.mean_backlog / n_reps;

  const auto warmup_end = static_cast<std::int64_t>(
      cfg.warmup_fraction * static_cast<double>(cfg.horizon));
  for (int h = 1; h <= 4; ++h) {
    MomentReport merged;
    merged.order = h;
    double quarter = 0.0, half = 0.0;
    for (const auto& rep : sum.replications) {
      const auto l2s = detail::post_warmup_l2(rep.recorder, warmup_end);
      const MomentReport mr = moment_report(l2s, h);
      merged.average += mr.average / n_reps;
      // decompose the window ratio so the merge stays associative
      const std::size_t n = l2s.size();
      auto mean_pow = [&](std::size_t from) {
        double s = 0.0;
        for (std::size_t i = from; i < n; ++i) s += std::pow(l2s[i], h);
        return n > from ? s / static_cast<double>(n - from) : 0.0;
      };
      half += mean_pow(n / 2) / n_reps;
      quarter += mean_pow(n - n / 4) / n_reps;
    }
    merged.window_ratio = half > 0.0 ? quarter / half : 1.0;
    merged.bounded = merged.window_ratio >= 0.8 && merged.window_ratio <= 1.25;
    sum.merged_moments.push_back(merged);
  }

  // merged slope: fit on the pointwise mean of the l1 series
  {
    const auto& rows0 = sum.replications.front().recorder.rows();
    std::vector<std::int64_t> ts(rows0.size());
    std::vector<double> l1s(rows0.size(), 0.0);
    for (std::size_t i = 0; i < rows0.size(); ++i) ts[i] = rows0[i].slot;
    for (const auto& rep : sum.replications) {
      const auto& rows = rep.recorder.rows();
      for (std::size_t i = 0; i < rows.size(); ++i)
        l1s[i] += static_cast<double>(rows[i].l1) / n_reps;
    }
    sum.merged_slope = slope_test(ts, l1s);
  }

  if (cfg.drift_enabled) {
    // Pool the raw increments, then release the per-replication buffers;
    // the binned tables stay available in each ReplicationResult.
    std::vector<DriftSample> pooled;
    for (auto& rep : sum.replications) {
      pooled.insert(pooled.end(), rep.drift_samples.begin(),
                    rep.drift_samples.end());
      rep.drift_samples.clear();
      rep.drift_samples.shrink_to_fit();
    }
    sum.merged_drift = drift_profile(pooled, cfg.drift_bins);
  }

  sum.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  sum.slots_per_second =
      sum.wall_seconds > 0.0
          ? static_cast<double>(cfg.horizon) *
                static_cast<double>(cfg.replications) / sum.wall_seconds
          : 0.0;

  if (!cfg.out_dir.empty()) emit_outputs(cfg, sum);
  return sum;
}

inline nlohmann::json summary_json(const ExperimentConfig& cfg,
                                   const RunSummary& sum) {
  nlohmann::json j;
  j["schema"] = 1;
  j["policy"] = cfg.policy_text;
  j["horizon"] = cfg.horizon;
  j["seed"] = cfg.seed;
  j["replications"] = cfg.replications;
  j["sample_every"] = cfg.sample_every;
  j["warmup_fraction"] = cfg.warmup_fraction;

  j["admissibility"] = {
      {"verdict", to_string(sum.admissibility.verdict)},
      {"margin", sum.admissibility.unbounded_margin
                     ? nlohmann::json("unbounded")
                     : nlohmann::json(sum.admissibility.margin)}};

  nlohmann::json conds;
  for (const auto& [name, res] : sum.potential_report.conditions)
    conds[name] = {{"verdict", to_string(res.verdict)},
                   {"margin", std::isfinite(res.margin) ? res.margin : 0.0}};
  j["potential_conditions"] = conds;

  nlohmann::json reps = nlohmann::json::array();
  for (const auto& rep : sum.replications) {
    nlohmann::json jr = {
        {"mean_backlog", rep.mean_backlog},
        {"moments", detail::moments_json(rep.moments)},
        {"slope", detail::slope_json(rep.slope)},
        {"monotonicity_violations", rep.monotonicity_violations},
        {"wall_seconds", rep.wall_seconds}};
    if (rep.argmax_total > 0) {
      jr["argmax_matches"] = rep.argmax_matches;
      jr["argmax_total"] = rep.argmax_total;
    }
    if (!rep.drift.bins.empty()) jr["drift"] = detail::drift_json(rep.drift);
    reps.push_back(std::move(jr));
  }
  j["replications_detail"] = std::move(reps);

  j["merged"] = {{"mean_backlog", sum.merged_mean_backlog},
                 {"moments", detail::moments_json(sum.merged_moments)},
                 {"slope", detail::slope_json(sum.merged_slope)}};
  if (!sum.merged_drift.bins.empty())
    j["merged"]["drift"] = detail::drift_json(sum.merged_drift);
  j["wall_seconds"] = sum.wall_seconds;
  j["slots_per_second"] = sum.slots_per_second;
  return j;
}

inline void emit_outputs(const ExperimentConfig& cfg, const RunSummary& sum) {
  namespace fs = std::filesystem;
  fs::path dir(cfg.out_dir);
  fs::create_directories(dir);
  for (std::size_t r = 0; r < sum.replications.size(); ++r)
    detail::write_csv(dir / ("rep" + std::to_string(r) + ".csv"),
                      sum.replications[r].recorder,
                      static_cast<std::size_t>(cfg.topology.m_virtual));
  std::ofstream js(dir / "summary.json", std::ios::binary);
  js << summary_json(cfg, sum).dump(2) << '\n';
}

struct SweepCell {
  double rho = 1.0;
  double margin = 0.0;
  bool unbounded_margin = false;
  double mean_backlog = 0.0;
  SlopeResult slope;
  std::string verdict;
  std::string error;  // nonempty when the cell failed
};

/// Scales the base arrival rates by each factor, re-checks admissibility and
/// reruns; cells fail independently.
inline std::vector<SweepCell> sweep(const ExperimentConfig& base,
                                    const std::vector<double>& grid) {
  if (grid.empty()) throw ConfigError("sweep: empty load grid");
  std::vector<SweepCell> table;
  for (double rho : grid) {
    SweepCell cell;
    cell.rho = rho;
    try {
      ExperimentConfig cfg = base.with_scaled_arrivals(rho);
      if (!base.out_dir.empty()) {
        char tag[32];
        std::snprintf(tag, sizeof(tag), "rho_%g", rho);
        cfg.out_dir = (std::filesystem::path(base.out_dir) / tag).string();
      }
      RunSummary sum = run_experiment(cfg);
      cell.margin = sum.admissibility.margin;
      cell.unbounded_margin = sum.admissibility.unbounded_margin;
      cell.mean_backlog = sum.merged_mean_backlog;
      cell.slope = sum.merged_slope;
      cell.verdict = to_string(sum.admissibility.verdict);
    } catch (const std::exception& e) {
      cell.error = e.what();
    }
    table.push_back(std::move(cell));
  }
  return table;
}

}  // namespace qnet

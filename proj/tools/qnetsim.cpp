// Command-line front end: run experiments, sweep loads, check admissibility,
// validate configs, list presets.

#include <CLI11.hpp>

#include <cinttypes>
#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "qnet/qnet.hpp"

namespace {

struct Overrides {
  std::string config_path;
  std::string out;
  std::uint64_t seed = 0;
  std::int64_t slots = 0;
  int replications = 0;
  bool quiet = false;
  bool allow_unvalidated = false;

  bool seed_set = false, slots_set = false, reps_set = false, out_set = false;
};

qnet::ExperimentConfig load(const Overrides& ov) {
  if (ov.config_path.empty())
    throw qnet::ConfigError("--config is required for this subcommand");
  qnet::ExperimentConfig cfg = qnet::load_config(ov.config_path);
  if (ov.seed_set) cfg.seed = ov.seed;
  if (ov.slots_set) cfg.horizon = ov.slots;
  if (ov.reps_set) cfg.replications = ov.replications;
  if (ov.out_set) cfg.out_dir = ov.out;
  if (ov.allow_unvalidated) cfg.allow_unvalidated = true;
  cfg.quiet = ov.quiet;
  cfg.validate_structure();
  return cfg;
}

void print_summary(const qnet::ExperimentConfig& cfg,
                   const qnet::RunSummary& sum) {
  if (cfg.quiet) return;
  std::printf("policy      %s\n", cfg.policy_text.c_str());
  if (sum.admissibility.unbounded_margin)
    std::printf("admissible  %s (margin unbounded)\n",
                qnet::to_string(sum.admissibility.verdict).c_str());
  else
    std::printf("admissible  %s (margin %.6f)\n",
                qnet::to_string(sum.admissibility.verdict).c_str(),
                sum.admissibility.margin);
  for (std::size_t r = 0; r < sum.replications.size(); ++r) {
    const auto& rep = sum.replications[r];
    std::printf(
        "rep %zu       mean backlog %.3f, slope %.3e (%s), moments ratio "
        "h1=%.3f h2=%.3f\n",
        r, rep.mean_backlog, rep.slope.slope,
        qnet::to_string(rep.slope.classification).c_str(),
        rep.moments[0].window_ratio, rep.moments[1].window_ratio);
  }
  std::printf("merged      mean backlog %.3f, slope %.3e (%s)\n",
              sum.merged_mean_backlog, sum.merged_slope.slope,
              qnet::to_string(sum.merged_slope.classification).c_str());
  std::printf("throughput  %.0f slots/s\n", sum.slots_per_second);
  if (!cfg.out_dir.empty())
    std::printf("outputs     %s\n", cfg.out_dir.c_str());
}

int cmd_run(const Overrides& ov) {
  qnet::ExperimentConfig cfg = load(ov);
  qnet::RunSummary sum = qnet::run_experiment(cfg);
  print_summary(cfg, sum);
  return 0;
}

int cmd_sweep(const Overrides& ov, const std::vector<double>& grid) {
  qnet::ExperimentConfig cfg = load(ov);
  auto table = qnet::sweep(cfg, grid);
  std::printf("%8s %14s %14s %12s %14s\n", "rho", "margin", "mean_backlog",
              "slope", "verdict");
  for (const auto& cell : table) {
    if (!cell.error.empty()) {
      std::printf("%8.4f  cell failed: %s\n", cell.rho, cell.error.c_str());
      continue;
    }
    std::printf("%8.4f %14.6f %14.3f %12.3e %14s\n", cell.rho,
                cell.unbounded_margin ? std::numeric_limits<double>::infinity()
                                      : cell.margin,
                cell.mean_backlog, cell.slope.slope, cell.verdict.c_str());
  }
  return 0;
}

int cmd_capacity(const Overrides& ov) {
  qnet::ExperimentConfig cfg = load(ov);
  auto res = qnet::check_admissible(qnet::mean_rate(cfg.arrivals),
                                    cfg.topology, cfg.constraints,
                                    cfg.regions);
  std::printf("verdict  %s\n", qnet::to_string(res.verdict).c_str());
  if (res.unbounded_margin)
    std::printf("margin   unbounded\n");
  else
    std::printf("margin   %.9f\n", res.margin);
  std::printf("workload");
  for (double w : res.workload) std::printf(" %.6f", w);
  std::printf("\n");
  if (!cfg.quiet && !res.witness.empty()) {
    std::printf("witness mixtures (state: vertex=weight for weight > 1e-9)\n");
    for (std::size_t s = 0; s < res.witness.size(); ++s) {
      std::printf("  state %zu:", s);
      for (std::size_t v = 0; v < res.witness[s].size(); ++v)
        if (res.witness[s][v] > 1e-9)
          std::printf(" %zu=%.6f", v, res.witness[s][v]);
      std::printf("\n");
    }
  }
  return 0;
}

int cmd_validate(const Overrides& ov) {
  qnet::ExperimentConfig cfg = load(ov);
  auto s = qnet::validate_config(cfg);
  std::printf("topology: %s\n", s.topology.valid() ? "ok" : "INVALID");
  for (const auto& v : s.topology.violations)
    std::printf("  violation [%s]: %s\n", v.code.c_str(), v.message.c_str());
  std::printf("potential conditions:\n%s", s.potential.summary().c_str());
  if (s.admissibility.unbounded_margin)
    std::printf("admissibility: %s (margin unbounded)\n",
                qnet::to_string(s.admissibility.verdict).c_str());
  else
    std::printf("admissibility: %s (margin %.6f)\n",
                qnet::to_string(s.admissibility.verdict).c_str(),
                s.admissibility.margin);
  if (s.admissibility.verdict == qnet::AdmissibilityVerdict::Inadmissible)
    std::printf(
        "warning: workload outside the capacity region; simulating overload "
        "is legitimate but no policy can stabilize it\n");
  if (s.hard_failure) {
    std::fprintf(stderr,
                 "validation failed: potential refuted (use "
                 "--allow-unvalidated to run anyway)\n");
    return 1;
  }
  return 0;
}

int cmd_presets() {
  for (const auto& p : qnet::list_presets())
    std::printf("%-12s %s\n", p.name.c_str(), p.description.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Constrained-queueing scheduling simulator"};
  app.require_subcommand(1);
  app.fallthrough();

  Overrides ov;
  auto* o_config = app.add_option("--config", ov.config_path,
                                  "experiment YAML file");
  auto* o_seed = app.add_option("--seed", ov.seed, "override run.seed");
  auto* o_slots = app.add_option("--slots", ov.slots, "override run.horizon");
  auto* o_out = app.add_option("--out", ov.out, "override output directory");
  auto* o_reps = app.add_option("--replications", ov.replications,
                                "override run.replications");
  app.add_flag("--quiet", ov.quiet, "suppress per-replication output");
  app.add_flag("--allow-unvalidated", ov.allow_unvalidated,
               "run even if the potential fails its validity checks");

  auto* c_run = app.add_subcommand("run", "simulate one experiment");
  auto* c_sweep =
      app.add_subcommand("sweep", "rerun the experiment over a load grid");
  std::vector<double> grid;
  c_sweep->add_option("--grid", grid, "load scale factors")
      ->delimiter(',')
      ->required();
  auto* c_capacity =
      app.add_subcommand("capacity", "admissibility check only");
  auto* c_validate =
      app.add_subcommand("validate", "topology/potential/admissibility report");
  auto* c_presets = app.add_subcommand("presets", "preset catalog");
  auto* c_presets_list = c_presets->add_subcommand("list", "list presets");
  c_presets->require_subcommand(1);

  CLI11_PARSE(app, argc, argv);
  (void)o_config;
  ov.seed_set = o_seed->count() > 0;
  ov.slots_set = o_slots->count() > 0;
  ov.reps_set = o_reps->count() > 0;
  ov.out_set = o_out->count() > 0;

  try {
    if (c_run->parsed()) return cmd_run(ov);
    if (c_sweep->parsed()) return cmd_sweep(ov, grid);
    if (c_capacity->parsed()) return cmd_capacity(ov);
    if (c_validate->parsed()) return cmd_validate(ov);
    if (c_presets->parsed() && c_presets_list->parsed()) return cmd_presets();
  } catch (const qnet::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const qnet::ParseError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const qnet::RuntimeFault& e) {
    std::fprintf(stderr, "runtime fault: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "runtime fault: %s\n", e.what());
    return 2;
  }
  return 0;
}

// gne_sim: command-line front end for the distributed GNE-seeking simulator.
//
//   gne_sim run     --scenario paper5 --mode event --horizon 1 --out-dir out/
//   gne_sim compare --scenario paper5 --out-dir out/
//   gne_sim replay  --manifest out/manifest.json --out-dir rerun/
//   gne_sim check   --scenario paper5
//   gne_sim export  --scenario paper5 --expand

#include "CLI11.hpp"

#include <cstdio>
#include <iostream>
#include <string>

#include "gne/gne.hpp"

namespace {

struct Flags {
  std::string scenario = "paper5";
  std::string mode;
  std::string out_dir = "out";
  gne::Overrides overrides;
  bool no_plots = false;
};

void add_run_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--scenario", f.scenario, "Scenario file or built-in id (paper5)");
  cmd->add_option("--mode", f.mode, "continuous | event")
      ->check(CLI::IsMember({"continuous", "event"}));
  cmd->add_option("--dt", f.overrides.dt, "Integration step");
  cmd->add_option("--horizon", f.overrides.horizon, "Final time T");
  cmd->add_option("--k-mu", f.overrides.k_mu, "Multiplier consensus gain K_mu");
  cmd->add_option("--gain-cap", f.overrides.gain_cap, "Upper cap on the gain e^t");
  cmd->add_option("--beta0", f.overrides.beta0, "Initial beta_i");
  cmd->add_option("--gamma0", f.overrides.gamma0, "Initial gamma_i");
  cmd->add_option("--seed", f.overrides.seed, "Random seed for the initial draw");
  cmd->add_option("--sample-stride", f.overrides.sample_stride, "Keep every n-th step");
  cmd->add_option("--out-dir", f.out_dir, "Directory for CSV, SVG and manifest files");
  cmd->add_flag("--no-plots", f.no_plots, "Skip SVG output");
}

gne::Scenario resolve(const Flags& f) {
  gne::Scenario s = gne::load_scenario(f.scenario);
  gne::Overrides o = f.overrides;
  if (!f.mode.empty()) o.mode = gne::parse_mode(f.mode);
  gne::apply(s, o);
  return s;
}

void print_warnings(const gne::Trajectory& traj) {
  for (const auto& w : traj.warnings) std::cerr << "warning: " << w << "\n";
}

void print_result(const gne::RunResult& r, const std::string& label) {
  const auto& b = r.bounds;
  std::printf("%-12s steps=%ld  R(T)=%.6g  F(T)=%.6g  F/sqrt(T)=%.6g\n", label.c_str(),
              r.trajectory.steps, r.final_regret(), r.final_fit(),
              r.metrics.fit_over_sqrt_t.empty() ? 0.0 : r.metrics.fit_over_sqrt_t.back());
  std::printf("%-12s reference: %s, residual %.3g, grid violation %.3g\n", "",
              gne::to_string(r.reference.provenance).c_str(), r.reference.residual,
              r.reference.grid_violation);
  std::printf("%-12s bound check (estimate): max R %.6g <= %.6g (ratio %.3g); F %.6g <= %.6g "
              "(ratio %.3g)\n",
              "", b.regret_max, b.regret_bound, b.regret_ratio(), b.fit_final, b.fit_bound,
              b.fit_ratio());
  if (r.zeno) {
    std::printf("%-12s events per player:", "");
    for (long c : r.zeno->event_counts) std::printf(" %ld", c);
    std::printf("  (min gap %.3g, floors %s)\n", r.zeno->min_gap_overall,
                r.zeno->floor_ok ? "ok" : "VIOLATED");
  }
}

int cmd_run(const Flags& f) {
  gne::Scenario s = resolve(f);
  gne::RunOptions opt;
  opt.out_dir = f.out_dir;
  opt.plots = !f.no_plots;
  const auto artifacts = gne::run(s, opt);
  std::printf("scenario %s, mode %s, dt %g, T %g, seed %llu\n", s.name.c_str(),
              gne::to_string(s.solver.mode).c_str(), s.solver.dt, s.solver.horizon,
              static_cast<unsigned long long>(s.solver.seed));
  if (artifacts.result) {
    print_warnings(artifacts.result->trajectory);
    print_result(*artifacts.result, gne::to_string(s.solver.mode));
  } else {
    std::printf("zero horizon: nothing simulated\n");
  }
  std::printf("wrote %s, %s, %s, %s\n", artifacts.trajectory_csv.c_str(),
              artifacts.metrics_csv.c_str(), artifacts.events_csv.c_str(),
              artifacts.manifest.c_str());
  return 0;
}

int cmd_compare(const Flags& f) {
  gne::Scenario s = resolve(f);
  gne::RunOptions opt;
  opt.out_dir = f.out_dir;
  const auto report = gne::compare_modes(s, opt);
  print_warnings(report.continuous.trajectory);
  print_result(report.continuous, "continuous");
  print_result(report.event, "event");
  std::printf("communication: %ld steps per player with continuous exchange; event counts:",
              report.steps);
  for (long c : report.events_per_player) std::printf(" %ld", c);
  std::printf("\nsaving ratio %.4f\n", report.saving_ratio);
  return 0;
}

int cmd_replay(const std::string& manifest, const std::string& out_dir, bool no_plots) {
  auto [s, opt] = gne::read_manifest(manifest);
  opt.out_dir = out_dir;
  opt.plots = !no_plots;
  const auto artifacts = gne::run(s, opt);
  std::printf("replayed %s into %s\n", manifest.c_str(), out_dir.c_str());
  if (artifacts.result) print_result(*artifacts.result, gne::to_string(s.solver.mode));
  return 0;
}

int cmd_check(const Flags& f, int samples) {
  const gne::Scenario s = resolve(f);
  const gne::GameSpec game = s.game();
  const auto seed = s.solver.seed;
  std::printf("gradient check: max relative error %.3g over %d samples\n",
              gne::gradient_check(game, samples, seed), samples);
  const auto convex = gne::convexity_spot_check(game, samples, seed);
  std::printf("convexity spot check: %d violations over %d segments (worst gap %.3g)\n",
              convex.violations, convex.segments, convex.worst_gap);
  const auto cert = gne::monotonicity_probe(game, 0.0, 100 * samples, seed);
  if (cert) {
    std::printf("monotonicity probe at t=0: nonmonotone, <F(x)-F(y), x-y> = %.6g\n",
                cert->inner_product);
  } else {
    std::printf("monotonicity probe at t=0: no violating pair in %d samples\n", 100 * samples);
  }
  const auto est = gne::estimate_constants(game, gne::time_grid(s.solver.horizon, 21), samples, seed);
  std::printf("sampled constants: l >= %.6g, K_f >= %.6g, K_g >= %.6g\n", est.l_hat, est.kf_hat,
              est.kg_hat);
  if (s.solver.k_mu < game.n_players * est.kg_hat) {
    std::printf("warning: K_mu = %g is below N * K_g estimate = %g\n", s.solver.k_mu,
                game.n_players * est.kg_hat);
  }
  const auto ref = gne::gne_oracle(game, gne::time_grid(s.solver.horizon, 201), 4, seed);
  std::printf("reference point (residual %.3g, grid violation %.3g):", ref.residual,
              ref.grid_violation);
  for (Eigen::Index k = 0; k < ref.x_star.size(); ++k) std::printf(" %.6g", ref.x_star(k));
  std::printf("\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed GNE seeking simulator for online games"};
  app.require_subcommand(1);

  Flags run_flags, compare_flags, check_flags;
  auto* run = app.add_subcommand("run", "Simulate one scenario and write artifacts");
  add_run_flags(run, run_flags);
  auto* compare = app.add_subcommand("compare", "Run continuous and event modes side by side");
  add_run_flags(compare, compare_flags);

  std::string manifest, replay_out = "replay";
  bool replay_no_plots = false;
  auto* replay = app.add_subcommand("replay", "Re-run from a manifest");
  replay->add_option("--manifest", manifest, "manifest.json of an earlier run")->required();
  replay->add_option("--out-dir", replay_out, "Output directory");
  replay->add_flag("--no-plots", replay_no_plots, "Skip SVG output");

  int check_samples = 100;
  auto* check = app.add_subcommand("check", "Diagnostics of a scenario's game");
  add_run_flags(check, check_flags);
  check->add_option("--samples", check_samples, "Sample count");

  std::string export_scenario = "paper5";
  bool expand = false;
  auto* exp = app.add_subcommand("export", "Print a scenario as YAML");
  exp->add_option("--scenario", export_scenario, "Scenario file or built-in id");
  exp->add_flag("--expand", expand, "Spell out built-in games as expressions");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(run_flags);
    if (*compare) return cmd_compare(compare_flags);
    if (*replay) return cmd_replay(manifest, replay_out, replay_no_plots);
    if (*check) return cmd_check(check_flags, check_samples);
    if (*exp) {
      std::cout << gne::serialize_scenario(gne::load_scenario(export_scenario), expand);
      return 0;
    }
  } catch (const gne::NumericalBlowup& e) {
    std::cerr << "numerical blowup: " << e.what() << "\n";
    return 3;
  } catch (const gne::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

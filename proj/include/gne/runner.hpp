#pragma once

// Run orchestration: simulate a scenario, post-process metrics, write CSV,
// SVG and manifest artifacts.

#include "json.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gne/dynamics.hpp"
#include "gne/errors.hpp"
#include "gne/game.hpp"
#include "gne/graph.hpp"
#include "gne/metrics.hpp"
#include "gne/plot.hpp"
#include "gne/scenario.hpp"
#include "gne/state.hpp"
#include "gne/trigger.hpp"

namespace gne {

inline constexpr const char* kArtifactVersion = "gne-sim 1.0.0";

/// Command-line style overrides of a scenario's defaults.
struct Overrides {
  std::optional<Mode> mode;
  std::optional<double> dt;
  std::optional<double> horizon;
  std::optional<double> k_mu;
  std::optional<double> gain_cap;
  std::optional<double> beta0;
  std::optional<double> gamma0;
  std::optional<std::uint64_t> seed;
  std::optional<int> sample_stride;
};

inline void apply(Scenario& s, const Overrides& o) {
  if (o.mode) s.solver.mode = *o.mode;
  if (o.dt) s.solver.dt = *o.dt;
  if (o.horizon) s.solver.horizon = *o.horizon;
  if (o.k_mu) s.solver.k_mu = *o.k_mu;
  if (o.gain_cap) s.solver.gain_cap = *o.gain_cap;
  if (o.beta0) s.trigger.beta0 = *o.beta0;
  if (o.gamma0) s.trigger.gamma0 = *o.gamma0;
  if (o.seed) s.solver.seed = *o.seed;
  if (o.sample_stride) s.solver.sample_stride = *o.sample_stride;
}

struct RunOptions {
  std::filesystem::path out_dir = ".";
  bool plots = true;
  int oracle_grid = 201;
  int oracle_attempts = 4;
  int estimate_samples = 256;
};

/// Everything computed for one simulation, kept in memory.
struct RunResult {
  Trajectory trajectory;
  MetricSeries metrics;
  ReferencePoint reference;
  LipschitzEstimates estimates;
  BoundReport bounds;
  std::optional<ZenoReport> zeno;
  double lambda2 = 0.0;

  double final_regret() const { return metrics.regret.empty() ? 0.0 : metrics.regret.back(); }
  double final_fit() const { return metrics.fit.empty() ? 0.0 : metrics.fit.back(); }
  std::vector<long> events_per_player() const {
    std::vector<long> out(trajectory.states.empty() ? 0 : trajectory.states[0].n_players, 0);
    for (const auto& e : trajectory.events) ++out[e.player];
    return out;
  }
};

inline ReferencePoint scenario_reference(const Scenario& s, const GameSpec& game,
                                         const RunOptions& opt) {
  return gne_oracle(game, time_grid(s.solver.horizon, opt.oracle_grid), opt.oracle_attempts,
                    s.solver.seed);
}

/// Simulates the scenario and computes metrics, bounds and trigger
/// statistics. The reference point is solved for unless supplied.
inline RunResult evaluate(const Scenario& s, const RunOptions& opt,
                          std::optional<ReferencePoint> reference = std::nullopt) {
  const GameSpec game = s.game();
  const Topology topology = s.topology();
  const LaplacianData lap = build_laplacian(topology);
  const bool event_mode = s.solver.mode == Mode::kEventTriggered;

  RunResult r;
  r.lambda2 = lap.lambda2;
  r.trajectory = simulate(game, topology, s.solver, s.initial_state(game),
                          event_mode ? std::optional<TriggerConfig>(s.trigger) : std::nullopt);
  r.reference = reference ? *reference : scenario_reference(s, game, opt);
  r.metrics = compute_metrics(r.trajectory, game, r.reference);
  r.estimates = estimate_constants(game, time_grid(s.solver.horizon, 21), opt.estimate_samples,
                                   s.solver.seed);
  r.bounds = bound_check(r.trajectory, r.metrics, game, lap, r.reference, r.estimates,
                         event_mode ? std::optional<TriggerConfig>(s.trigger) : std::nullopt);
  if (event_mode) r.zeno = zeno_report(r.trajectory, s.trigger, /*throw_on_violation=*/false);
  if (!r.reference.converged) {
    r.trajectory.warnings.push_back("reference point residual " +
                                    std::to_string(r.reference.residual) +
                                    " above 1e-4; regret is reference-uncertain");
  }
  return r;
}

namespace detail {

inline std::string csv_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  return out;
}

}  // namespace detail

/// t, x_{i,k} (player-major), mu_{i,j}
inline void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj,
                                 int n, int d, int q) {
  auto out = detail::open_output(path);
  out << "t";
  for (int i = 1; i <= n; ++i) for (int k = 1; k <= d; ++k) out << ",x_" << i << "_" << k;
  for (int i = 1; i <= n; ++i) for (int j = 1; j <= q; ++j) out << ",mu_" << i << "_" << j;
  out << "\n";
  for (std::size_t s = 0; s < traj.size(); ++s) {
    const SwarmState& st = traj.states[s];
    out << detail::csv_number(traj.times[s]);
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < d; ++k) out << "," << detail::csv_number(st.x(i)(k));
    }
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < q; ++j) out << "," << detail::csv_number(st.mu[i](j));
    }
    out << "\n";
  }
}

/// t, R, F, F_over_sqrt_t, F_1..F_q
inline void write_metrics_csv(const std::filesystem::path& path, const MetricSeries& m, int q) {
  auto out = detail::open_output(path);
  out << "t,R,F,F_over_sqrt_t";
  for (int j = 1; j <= q; ++j) out << ",F_" << j;
  out << "\n";
  for (std::size_t s = 0; s < m.times.size(); ++s) {
    out << detail::csv_number(m.times[s]) << "," << detail::csv_number(m.regret[s]) << ","
        << detail::csv_number(m.fit[s]) << "," << detail::csv_number(m.fit_over_sqrt_t[s]);
    for (int j = 0; j < q; ++j) out << "," << detail::csv_number(m.fit_components[s](j));
    out << "\n";
  }
}

/// player (1-based), time
inline void write_events_csv(const std::filesystem::path& path, const std::vector<Event>& events) {
  auto out = detail::open_output(path);
  out << "player,time\n";
  for (const auto& e : events) out << e.player + 1 << "," << detail::csv_number(e.time) << "\n";
}

inline nlohmann::json manifest_json(const Scenario& s, const RunOptions& opt) {
  const std::string text = serialize_scenario(s);
  nlohmann::json m;
  m["artifact_version"] = kArtifactVersion;
  m["scenario_hash"] = content_hash(text);
  m["seed"] = s.solver.seed;
  m["config"] = {
      {"mode", to_string(s.solver.mode)},
      {"dt", s.solver.dt},
      {"horizon", s.solver.horizon},
      {"k_mu", s.solver.k_mu},
      {"gain_cap", std::isinf(s.solver.gain_cap) ? nlohmann::json("inf")
                                                 : nlohmann::json(s.solver.gain_cap)},
      {"sample_stride", s.solver.sample_stride},
      {"beta0", s.trigger.beta0},
      {"gamma0", s.trigger.gamma0},
  };
  m["options"] = {{"oracle_grid", opt.oracle_grid},
                  {"oracle_attempts", opt.oracle_attempts},
                  {"estimate_samples", opt.estimate_samples}};
  m["scenario"] = text;
  return m;
}

/// Rebuilds the scenario and options recorded in a manifest.
inline std::pair<Scenario, RunOptions> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open manifest '" + path.string() + "'");
  nlohmann::json m;
  try {
    in >> m;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("manifest: ") + e.what(), 0, 0);
  }
  const std::string text = m.at("scenario").get<std::string>();
  if (content_hash(text) != m.at("scenario_hash").get<std::string>()) {
    throw Error("manifest scenario hash does not match its scenario text");
  }
  Scenario s = parse_scenario(text);
  RunOptions opt;
  const auto& o = m.at("options");
  opt.oracle_grid = o.at("oracle_grid").get<int>();
  opt.oracle_attempts = o.at("oracle_attempts").get<int>();
  opt.estimate_samples = o.at("estimate_samples").get<int>();
  return {s, opt};
}

struct RunArtifacts {
  std::filesystem::path trajectory_csv;
  std::filesystem::path metrics_csv;
  std::filesystem::path events_csv;
  std::filesystem::path manifest;
  std::vector<std::filesystem::path> plots;
  std::optional<RunResult> result;  // empty for a zero horizon
};

inline RunArtifacts run(const Scenario& s, const RunOptions& opt) {
  namespace fs = std::filesystem;
  fs::create_directories(opt.out_dir);
  RunArtifacts a;
  a.trajectory_csv = opt.out_dir / "trajectory.csv";
  a.metrics_csv = opt.out_dir / "metrics.csv";
  a.events_csv = opt.out_dir / "events.csv";
  a.manifest = opt.out_dir / "manifest.json";

  const int n = s.n_players, d = s.action_dim, q = s.constraint_dim;
  {
    auto out = detail::open_output(a.manifest);
    out << manifest_json(s, opt).dump(2) << "\n";
  }

  if (s.solver.horizon == 0.0) {
    // Nothing to integrate: the initial state only, no metric samples.
    const GameSpec game = s.game();
    Trajectory traj;
    traj.config = s.solver;
    traj.times = {0.0};
    traj.states = {s.initial_state(game)};
    write_trajectory_csv(a.trajectory_csv, traj, n, d, q);
    write_metrics_csv(a.metrics_csv, MetricSeries{}, q);
    write_events_csv(a.events_csv, {});
    return a;
  }

  RunResult r = evaluate(s, opt);
  write_trajectory_csv(a.trajectory_csv, r.trajectory, n, d, q);
  write_metrics_csv(a.metrics_csv, r.metrics, q);
  write_events_csv(a.events_csv, r.trajectory.events);

  if (opt.plots) {
    const auto& m = r.metrics;
    const std::string tag = to_string(s.solver.mode);
    a.plots.push_back(opt.out_dir / "regret.svg");
    plot::line_chart(a.plots.back().string(), "Regret (" + tag + ")", "t", "R(t)",
                     {{"R", m.times, m.regret}});
    a.plots.push_back(opt.out_dir / "fit_over_sqrt_t.svg");
    plot::line_chart(a.plots.back().string(), "Fit / sqrt(t) (" + tag + ")", "t",
                     "F(t)/sqrt(t)", {{"F/sqrt(t)", m.times, m.fit_over_sqrt_t}});
    a.plots.push_back(opt.out_dir / "fit.svg");
    plot::line_chart(a.plots.back().string(), "Fit (" + tag + ")", "t", "F(t)",
                     {{"F", m.times, m.fit}});
    if (s.solver.mode == Mode::kEventTriggered) {
      a.plots.push_back(opt.out_dir / "events.svg");
      plot::event_raster(a.plots.back().string(), "Broadcast events", r.trajectory.events, n,
                         s.solver.horizon);
    }
  }
  a.result = std::move(r);
  return a;
}

struct CompareReport {
  long steps = 0;
  RunResult continuous;
  RunResult event;
  std::vector<long> events_per_player;
  // 1 - (broadcasts in event mode) / (broadcasts with per-step communication)
  double saving_ratio = 0.0;
};

/// Runs both modes from the same seed and initial state against one shared
/// reference point.
inline CompareReport compare_modes(const Scenario& base, const RunOptions& opt) {
  Scenario cont = base, event = base;
  cont.solver.mode = Mode::kContinuous;
  event.solver.mode = Mode::kEventTriggered;
  const GameSpec game = base.game();
  const ReferencePoint ref = scenario_reference(base, game, opt);

  auto event_future = std::async(std::launch::async, [&] { return evaluate(event, opt, ref); });
  CompareReport report;
  report.continuous = evaluate(cont, opt, ref);
  report.event = event_future.get();
  report.steps = report.continuous.trajectory.steps;
  report.events_per_player = report.event.events_per_player();
  long total = 0;
  for (long c : report.events_per_player) total += c;
  const double full = static_cast<double>(report.steps) * base.n_players;
  report.saving_ratio = full > 0 ? 1.0 - total / full : 0.0;
  return report;
}

}  // namespace gne

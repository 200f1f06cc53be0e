#pragma once

// Dynamic event-triggered broadcasting. Each player keeps the last values it
// broadcast (estimate vector and multiplier) together with two internal
// variables that relax its triggering threshold.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "gne/errors.hpp"
#include "gne/graph.hpp"
#include "gne/state.hpp"

namespace gne {

struct TriggerState {
  std::vector<Vector> upsilon_hat;
  std::vector<Vector> mu_hat;
  std::vector<double> beta;
  std::vector<double> gamma;
  std::vector<double> last_event_time;
  std::vector<Event> event_log;

  /// Broadcasts start at the initial state. The initial exchange is not
  /// logged as an event.
  static TriggerState initial(const SwarmState& state, const TriggerConfig& cfg) {
    cfg.validate();
    TriggerState out;
    out.upsilon_hat = state.upsilon;
    out.mu_hat = state.mu;
    out.beta.assign(state.n_players, cfg.beta0);
    out.gamma.assign(state.n_players, cfg.gamma0);
    out.last_event_time.assign(state.n_players, 0.0);
    return out;
  }
};

struct MeasurementErrors {
  Vector upsilon;
  Vector mu;
};

inline MeasurementErrors measurement_errors(int i, const SwarmState& state,
                                            const TriggerState& trig) {
  return {trig.upsilon_hat[i] - state.upsilon[i], trig.mu_hat[i] - state.mu[i]};
}

namespace detail {

// sum_j a_ij |hat_upsilon_i - hat_upsilon_j|^2
inline double broadcast_spread(int i, const TriggerState& trig,
                               const Topology& topology) {
  double acc = 0.0;
  for (int j = 0; j < topology.size(); ++j) {
    const double a = topology.weight(i, j);
    if (a > 0.0) acc += a * (trig.upsilon_hat[i] - trig.upsilon_hat[j]).squaredNorm();
  }
  return acc;
}

// sum_j a_ij |hat_mu_i - hat_mu_j|_1
inline double multiplier_spread(int i, const TriggerState& trig,
                                const Topology& topology) {
  double acc = 0.0;
  for (int j = 0; j < topology.size(); ++j) {
    const double a = topology.weight(i, j);
    if (a > 0.0) acc += a * (trig.mu_hat[i] - trig.mu_hat[j]).lpNorm<1>();
  }
  return acc;
}

inline double multiplier_error_gain(const SwarmState& state) {
  return 6.0 * std::sqrt(static_cast<double>(state.constraint_dim)) *
         state.n_players;
}

}  // namespace detail

/// Player i must broadcast when either measurement error outgrows its
/// threshold:
///   4 d_i |e_ups|^2        > sum_j a_ij |ups_hat_i - ups_hat_j|^2 + beta_i
///   6 sqrt(q) N |e_mu|     > sum_j a_ij |mu_hat_i - mu_hat_j|_1   + gamma_i
inline bool should_trigger(int i, const SwarmState& state,
                           const TriggerState& trig, const Topology& topology) {
  const auto e = measurement_errors(i, state, trig);
  const double lhs_ups = 4.0 * topology.degree(i) * e.upsilon.squaredNorm();
  const double rhs_ups = detail::broadcast_spread(i, trig, topology) + trig.beta[i];
  if (lhs_ups > rhs_ups) return true;
  const double lhs_mu = detail::multiplier_error_gain(state) * e.mu.norm();
  const double rhs_mu = detail::multiplier_spread(i, trig, topology) + trig.gamma[i];
  return lhs_mu > rhs_mu;
}

struct InternalRates {
  double beta_dot = 0.0;
  double gamma_dot = 0.0;
};

inline InternalRates internal_derivatives(int i, const SwarmState& state,
                                          const TriggerState& trig,
                                          const Topology& topology) {
  const auto e = measurement_errors(i, state, trig);
  InternalRates r;
  r.beta_dot = -2.0 * trig.beta[i] + detail::broadcast_spread(i, trig, topology) -
               4.0 * topology.degree(i) * e.upsilon.squaredNorm();
  r.gamma_dot = -trig.gamma[i] + detail::multiplier_spread(i, trig, topology) -
                detail::multiplier_error_gain(state) * e.mu.norm();
  return r;
}

/// Refreshes both broadcasts of player i and logs the event.
inline void fire(int i, const SwarmState& state, TriggerState& trig, double t) {
  trig.upsilon_hat[i] = state.upsilon[i];
  trig.mu_hat[i] = state.mu[i];
  trig.last_event_time[i] = t;
  trig.event_log.push_back({i, t});
}

struct ZenoReport {
  std::vector<long> event_counts;
  std::vector<double> min_gap;  // +inf for players with fewer than two events
  double min_gap_overall = std::numeric_limits<double>::infinity();
  bool gap_ok = true;           // every gap >= dt
  bool floor_ok = true;         // beta/gamma floors held at every sample
  double worst_beta_ratio = std::numeric_limits<double>::infinity();
  double worst_gamma_ratio = std::numeric_limits<double>::infinity();
  long steps = 0;
};

/// Inter-event statistics and the exponential floors
///   beta_i(t)  >= beta_i(0)  e^{-3t}
///   gamma_i(t) >= gamma_i(0) e^{-2t}
/// (relative slack 1e-6) checked at every recorded sample. Throws
/// FloorViolated when a floor fails and `throw_on_violation` is set.
inline ZenoReport zeno_report(const Trajectory& traj, const TriggerConfig& cfg,
                              bool throw_on_violation = true) {
  const int n = traj.states.empty() ? 0 : traj.states.front().n_players;
  const double dt = traj.config.dt;
  ZenoReport report;
  report.steps = traj.steps;
  report.event_counts.assign(n, 0);
  report.min_gap.assign(n, std::numeric_limits<double>::infinity());

  std::vector<double> last(n, -std::numeric_limits<double>::infinity());
  for (const auto& ev : traj.events) {
    ++report.event_counts[ev.player];
    const double gap = ev.time - last[ev.player];
    report.min_gap[ev.player] = std::min(report.min_gap[ev.player], gap);
    last[ev.player] = ev.time;
  }
  for (double g : report.min_gap) {
    report.min_gap_overall = std::min(report.min_gap_overall, g);
  }
  report.gap_ok = report.min_gap_overall >= dt * (1.0 - 1e-9);

  for (std::size_t k = 0; k < traj.beta.size(); ++k) {
    const double t = traj.times[k];
    const double beta_floor = cfg.beta0 * std::exp(-3.0 * t);
    const double gamma_floor = cfg.gamma0 * std::exp(-2.0 * t);
    for (int i = 0; i < n; ++i) {
      const double rb = traj.beta[k](i) / beta_floor;
      const double rg = traj.gamma[k](i) / gamma_floor;
      report.worst_beta_ratio = std::min(report.worst_beta_ratio, rb);
      report.worst_gamma_ratio = std::min(report.worst_gamma_ratio, rg);
      if (rb < 1.0 - 1e-6 || rg < 1.0 - 1e-6) report.floor_ok = false;
    }
  }
  if (!report.floor_ok && throw_on_violation) {
    throw FloorViolated("internal trigger variable fell below its exponential floor");
  }
  return report;
}

}  // namespace gne

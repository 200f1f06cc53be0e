#pragma once

// Distributed seeking dynamics and their fixed-step projected Euler
// integration.
//
// For every player i, with consensus term c_i = sum_j a_ij (Y^i - Y^j):
//   x_i'     = Pi_{Omega_i}[x_i, -grad_i J_i(t, Y^i) - Jg_i(t, x_i)^T mu_i - k (c_i)_i]
//   Y^i_-i'  = -k (c_i)_-i
//   mu_i'    = Pi_{R+}[mu_i, g_i(t, x_i) - K_mu sum_{j in N_i} sgn(mu_i - mu_j)]
// with the gain k(t) = e^t. The event-triggered variant evaluates c_i and the
// sign term on the last broadcast values and doubles the sign coefficient.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "gne/errors.hpp"
#include "gne/game.hpp"
#include "gne/graph.hpp"
#include "gne/state.hpp"
#include "gne/trigger.hpp"

namespace gne {

inline double gain(double t, double cap = std::numeric_limits<double>::infinity()) {
  return std::min(std::exp(t), cap);
}

namespace detail {

inline void require_finite(const Vector& v, int player, const char* term, double t) {
  if (!v.allFinite()) throw NumericalBlowup(player, term, t);
}
inline void require_finite(const Matrix& m, int player, const char* term, double t) {
  if (!m.allFinite()) throw NumericalBlowup(player, term, t);
}

// Shared right-hand side. `consensus` supplies the vectors entering the
// Laplacian coupling and `signs` the multipliers entering the sign term.
inline Derivative seeking_rhs(double t, const SwarmState& state,
                              const std::vector<Vector>& consensus,
                              const std::vector<Vector>& signs,
                              const GameSpec& game, const LaplacianData& lap,
                              double sign_coefficient, double gain_cap) {
  const int n = state.n_players;
  const int d = state.action_dim;
  const double k = gain(t, gain_cap);

  Derivative out;
  out.action_dim = d;
  out.upsilon.resize(n);
  out.mu.resize(n);
  for (int i = 0; i < n; ++i) {
    Vector coupling = Vector::Zero(n * d);
    for (int j = 0; j < n; ++j) {
      const double l_ij = lap.laplacian(i, j);
      if (l_ij != 0.0) coupling.noalias() += l_ij * consensus[j];
    }

    const Vector grad = game.cost_gradient(i, t, state.upsilon[i]);
    require_finite(grad, i, "cost_gradient", t);
    const Vector xi = state.x(i);
    Vector velocity = -grad - k * coupling.segment(i * d, d);
    Vector g = Vector::Zero(state.constraint_dim);
    if (state.constraint_dim > 0) {
      const Matrix jac = game.constraint_jacobian(i, t, xi);
      require_finite(jac, i, "constraint_jacobian", t);
      g = game.constraint_value(i, t, xi);
      require_finite(g, i, "constraint_value", t);
      velocity.noalias() -= jac.transpose() * state.mu[i];
    }

    out.upsilon[i] = -k * coupling;
    out.x(i) = tangent_projection(game.boxes[i], xi, velocity);

    Vector drift = g;
    for (int j = 0; j < n; ++j) {
      if (j != i && lap.laplacian(i, j) < 0.0) {
        drift -= sign_coefficient * sgn(signs[i] - signs[j]);
      }
    }
    out.mu[i] = orthant_tangent_projection(state.mu[i], drift);
    require_finite(out.upsilon[i], i, "estimate dynamics", t);
  }
  return out;
}

}  // namespace detail

/// Continuous-communication dynamics.
inline Derivative rhs_continuous(
    double t, const SwarmState& state, const GameSpec& game,
    const LaplacianData& lap, double k_mu,
    double gain_cap = std::numeric_limits<double>::infinity()) {
  return detail::seeking_rhs(t, state, state.upsilon, state.mu, game, lap, k_mu,
                             gain_cap);
}

/// Event-triggered dynamics: coupling terms read the broadcast values, the
/// gradient and constraint terms read the current local state.
inline Derivative rhs_event(
    double t, const SwarmState& state, const TriggerState& broadcast,
    const GameSpec& game, const LaplacianData& lap, double k_mu,
    double gain_cap = std::numeric_limits<double>::infinity()) {
  return detail::seeking_rhs(t, state, broadcast.upsilon_hat, broadcast.mu_hat,
                             game, lap, 2.0 * k_mu, gain_cap);
}

/// Projected Euler step. Actions are clamped to their boxes, multipliers to
/// the nonnegative orthant.
inline SwarmState step(const SwarmState& state, const Derivative& deriv, double dt,
                       const GameSpec& game) {
  SwarmState next = state;
  for (int i = 0; i < state.n_players; ++i) {
    next.upsilon[i] += dt * deriv.upsilon[i];
    next.x(i) = box_projection(game.boxes[i], Vector(next.x(i)));
    next.mu[i] = (state.mu[i] + dt * deriv.mu[i]).cwiseMax(0.0);
  }
  return next;
}

/// Initial swarm state from the true actions. Estimates of other players
/// start at the center of their boxes unless given explicitly (one vector of
/// length N*d per player, whose own block is ignored). Multipliers start at 0.
inline SwarmState initial_state(const GameSpec& game, const Vector& actions,
                                const std::vector<Vector>* estimates = nullptr) {
  if (actions.size() != game.profile_dim()) {
    throw DimensionError("initial action profile has the wrong length");
  }
  SwarmState state = SwarmState::zeros_like(game);
  Vector centers(game.profile_dim());
  for (int j = 0; j < game.n_players; ++j) game.block(centers, j) = game.boxes[j].center();
  for (int i = 0; i < game.n_players; ++i) {
    if (estimates != nullptr) {
      if (static_cast<int>(estimates->size()) != game.n_players ||
          (*estimates)[i].size() != game.profile_dim()) {
        throw DimensionError("initial estimates have the wrong shape");
      }
      state.upsilon[i] = (*estimates)[i];
    } else {
      state.upsilon[i] = centers;
    }
    state.x(i) = game.block(actions, i);
  }
  return state;
}

namespace detail {

inline void check_feasible(const SwarmState& state, const GameSpec& game, double t) {
  for (int i = 0; i < state.n_players; ++i) {
    if (!game.boxes[i].contains(Vector(state.x(i)))) {
      throw InfeasiblePoint("action of player " + std::to_string(i + 1) +
                            " left its box at t=" + std::to_string(t));
    }
    if ((state.mu[i].array() < 0.0).any()) {
      throw InfeasiblePoint("multiplier of player " + std::to_string(i + 1) +
                            " became negative at t=" + std::to_string(t));
    }
  }
}

inline void check_shape(const SwarmState& state, const GameSpec& game) {
  if (state.n_players != game.n_players || state.action_dim != game.action_dim ||
      state.constraint_dim != game.constraint_dim ||
      static_cast<int>(state.upsilon.size()) != game.n_players ||
      static_cast<int>(state.mu.size()) != game.n_players) {
    throw DimensionError("initial state does not match the game dimensions");
  }
  for (int i = 0; i < game.n_players; ++i) {
    if (state.upsilon[i].size() != game.profile_dim() ||
        state.mu[i].size() != game.constraint_dim) {
      throw DimensionError("initial state does not match the game dimensions");
    }
  }
}

inline void blowup_check(const SwarmState& state, double t) {
  for (int i = 0; i < state.n_players; ++i) {
    if (!state.upsilon[i].allFinite()) throw NumericalBlowup(i, "estimate state", t);
    if (!state.mu[i].allFinite()) throw NumericalBlowup(i, "multiplier state", t);
  }
}

}  // namespace detail

/// Integrates the seeking dynamics on the grid t_n = n dt, n = 0..steps.
/// Samples are kept every `sample_stride` steps and at the final grid point.
/// In event mode the trigger conditions are checked at each grid point before
/// the flow step; every flagged player broadcasts (ascending order), then the
/// right-hand side is evaluated from the refreshed broadcasts, and the
/// internal variables take an Euler step with the same post-event errors.
inline Trajectory simulate(const GameSpec& game, const Topology& topology,
                           const SolverConfig& config, const SwarmState& init,
                           const std::optional<TriggerConfig>& trigger_cfg = std::nullopt) {
  config.validate();
  game.validate();
  if (topology.size() != game.n_players) {
    throw DimensionError("topology size does not match the number of players");
  }
  detail::check_shape(init, game);
  detail::check_feasible(init, game, 0.0);
  const bool event_mode = config.mode == Mode::kEventTriggered;
  if (event_mode && !trigger_cfg) {
    throw Error("event-triggered mode needs a trigger configuration");
  }
  const LaplacianData lap = build_laplacian(topology);

  Trajectory traj;
  traj.config = config;
  if (event_mode) traj.trigger = *trigger_cfg;
  traj.steps = config.steps();

  if (game.constraint_dim > 0) {
    std::vector<double> grid;
    for (int s = 0; s <= 10; ++s) grid.push_back(config.horizon * s / 10.0);
    const double kg = estimate_constants(game, grid, 64, config.seed).kg_hat;
    if (config.k_mu < game.n_players * kg) {
      traj.warnings.push_back("k_mu = " + std::to_string(config.k_mu) +
                              " is below N * sampled K_g = " +
                              std::to_string(game.n_players * kg));
    }
  }

  SwarmState state = init;
  TriggerState trig;
  if (event_mode) trig = TriggerState::initial(state, *trigger_cfg);
  const int n = game.n_players;

  auto record = [&](double t) {
    traj.times.push_back(t);
    traj.states.push_back(state);
    if (event_mode) {
      traj.beta.push_back(Eigen::Map<const Vector>(trig.beta.data(), n));
      traj.gamma.push_back(Eigen::Map<const Vector>(trig.gamma.data(), n));
    }
  };

  std::vector<char> flagged(n, 0);
  for (long s = 0; s < traj.steps; ++s) {
    const double t = static_cast<double>(s) * config.dt;
    if (s % config.sample_stride == 0) record(t);

    Derivative deriv;
    if (event_mode) {
      for (int i = 0; i < n; ++i) {
        flagged[i] = trigger_cfg->fire_every_step ||
                     should_trigger(i, state, trig, topology);
      }
      for (int i = 0; i < n; ++i) {
        if (flagged[i]) fire(i, state, trig, t);
      }
      deriv = rhs_event(t, state, trig, game, lap, config.k_mu, config.gain_cap);
      std::vector<InternalRates> rates(n);
      for (int i = 0; i < n; ++i) rates[i] = internal_derivatives(i, state, trig, topology);
      state = step(state, deriv, config.dt, game);
      for (int i = 0; i < n; ++i) {
        trig.beta[i] += config.dt * rates[i].beta_dot;
        trig.gamma[i] += config.dt * rates[i].gamma_dot;
        if (!(trig.beta[i] > 0.0) || !(trig.gamma[i] > 0.0)) {
          throw FloorViolated("internal trigger variable of player " +
                              std::to_string(i + 1) + " lost positivity at t=" +
                              std::to_string(t));
        }
      }
    } else {
      deriv = rhs_continuous(t, state, game, lap, config.k_mu, config.gain_cap);
      state = step(state, deriv, config.dt, game);
    }
    const double t_next = static_cast<double>(s + 1) * config.dt;
    detail::blowup_check(state, t_next);
    detail::check_feasible(state, game, t_next);
  }
  record(static_cast<double>(traj.steps) * config.dt);
  traj.events = std::move(trig.event_log);
  return traj;
}

}  // namespace gne

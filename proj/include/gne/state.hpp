#pragma once

// State containers shared by the integrator, the event trigger and the
// metrics.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "gne/errors.hpp"
#include "gne/game.hpp"

namespace gne {

/// Per-player action, estimate of the full profile and multiplier. Player i's
/// action is not stored separately: it is block i of upsilon[i].
struct SwarmState {
  int n_players = 0;
  int action_dim = 0;
  int constraint_dim = 0;
  std::vector<Vector> upsilon;  // N entries of length N*d
  std::vector<Vector> mu;       // N entries of length q

  SwarmState() = default;
  SwarmState(int n, int d, int q)
      : n_players(n),
        action_dim(d),
        constraint_dim(q),
        upsilon(n, Vector::Zero(n * d)),
        mu(n, Vector::Zero(q)) {}

  static SwarmState zeros_like(const GameSpec& game) {
    return SwarmState(game.n_players, game.action_dim, game.constraint_dim);
  }

  auto x(int i) { return upsilon[i].segment(i * action_dim, action_dim); }
  auto x(int i) const { return upsilon[i].segment(i * action_dim, action_dim); }

  /// Player i's estimate of player j's action.
  auto estimate(int i, int j) const {
    return upsilon[i].segment(j * action_dim, action_dim);
  }

  /// Stack of the true actions x_1..x_N.
  Vector profile() const {
    Vector out(n_players * action_dim);
    for (int i = 0; i < n_players; ++i) {
      out.segment(i * action_dim, action_dim) = x(i);
    }
    return out;
  }

  /// Stack of every estimate vector.
  Vector stacked_estimates() const {
    Vector out(n_players * n_players * action_dim);
    const int len = n_players * action_dim;
    for (int i = 0; i < n_players; ++i) out.segment(i * len, len) = upsilon[i];
    return out;
  }

  /// Largest pairwise distance between estimate vectors.
  double disagreement() const {
    double worst = 0.0;
    for (int i = 0; i < n_players; ++i) {
      for (int j = i + 1; j < n_players; ++j) {
        worst = std::max(worst, (upsilon[i] - upsilon[j]).norm());
      }
    }
    return worst;
  }

  bool all_finite() const {
    for (const auto& u : upsilon) if (!u.allFinite()) return false;
    for (const auto& m : mu) if (!m.allFinite()) return false;
    return true;
  }
};

/// Time derivative with the same layout as SwarmState; block i of upsilon[i]
/// carries the action velocity.
struct Derivative {
  int action_dim = 0;
  std::vector<Vector> upsilon;
  std::vector<Vector> mu;

  auto x(int i) { return upsilon[i].segment(i * action_dim, action_dim); }
  auto x(int i) const { return upsilon[i].segment(i * action_dim, action_dim); }

  bool all_finite() const {
    for (const auto& u : upsilon) if (!u.allFinite()) return false;
    for (const auto& m : mu) if (!m.allFinite()) return false;
    return true;
  }
};

enum class Mode { kContinuous, kEventTriggered };

inline std::string to_string(Mode mode) {
  return mode == Mode::kContinuous ? "continuous" : "event";
}

inline Mode parse_mode(const std::string& text) {
  if (text == "continuous") return Mode::kContinuous;
  if (text == "event" || text == "event_triggered") return Mode::kEventTriggered;
  throw Error("unknown mode '" + text + "' (expected continuous or event)");
}

struct SolverConfig {
  double dt = 1e-3;
  double horizon = 1.0;
  double k_mu = 10.0;
  double gain_cap = std::numeric_limits<double>::infinity();
  Mode mode = Mode::kContinuous;
  std::uint64_t seed = 0;
  int sample_stride = 1;

  void validate() const {
    if (!(dt > 0.0)) throw Error("dt must be positive");
    if (!(horizon > 0.0)) throw Error("horizon must be positive");
    if (!(k_mu > 0.0)) throw Error("k_mu must be positive");
    if (!(gain_cap > 0.0)) throw Error("gain_cap must be positive");
    if (sample_stride < 1) throw Error("sample_stride must be at least 1");
  }

  /// Number of grid steps; the last grid point is steps()*dt ~ horizon.
  long steps() const { return std::lround(horizon / dt); }
};

struct TriggerConfig {
  double beta0 = 300.0;
  double gamma0 = 300.0;
  // Fire every player at every grid point. Used to check that the event-driven
  // dynamics collapse onto the continuous ones when broadcasts are fresh.
  bool fire_every_step = false;

  void validate() const {
    if (!(beta0 > 0.0) || !(gamma0 > 0.0)) {
      throw Error("beta0 and gamma0 must be positive");
    }
  }
};

struct Event {
  int player = 0;  // 0-based
  double time = 0.0;
};

/// Sampled output of a simulation.
struct Trajectory {
  std::vector<double> times;
  std::vector<SwarmState> states;
  // Internal trigger variables at each sample (event mode only).
  std::vector<Vector> beta;
  std::vector<Vector> gamma;
  std::vector<Event> events;
  SolverConfig config;
  std::optional<TriggerConfig> trigger;
  long steps = 0;
  std::vector<std::string> warnings;

  std::size_t size() const { return times.size(); }
  Vector profile(std::size_t k) const { return states[k].profile(); }
};

}  // namespace gne

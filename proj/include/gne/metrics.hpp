#pragma once

// Online performance metrics of a trajectory: regret against a fixed
// reference profile and fit of the time-integrated coupling constraint. Also
// hosts the reference-point solver and the closed-form bound evaluation.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "gne/errors.hpp"
#include "gne/game.hpp"
#include "gne/graph.hpp"
#include "gne/random.hpp"
#include "gne/state.hpp"

namespace gne {

enum class Provenance { kAnalytic, kOracle };

inline std::string to_string(Provenance p) {
  return p == Provenance::kAnalytic ? "analytic" : "oracle";
}

struct ReferencePoint {
  Vector x_star;
  Provenance provenance = Provenance::kOracle;
  double residual = 0.0;          // natural residual of the averaged KKT system
  Vector multiplier;              // averaged-constraint multiplier
  bool converged = true;          // residual <= 1e-4
  double averaged_violation = 0;  // max_j [g_bar_j(x*)]_+
  double grid_violation = 0;      // max over grid and j of [sum_i g_ij(t, x*_i)]_+
  int attempts = 0;
};

inline ReferencePoint analytic_reference(Vector x_star) {
  ReferencePoint ref;
  ref.x_star = std::move(x_star);
  ref.provenance = Provenance::kAnalytic;
  return ref;
}

/// Throws NoConvergence when the oracle did not reach its residual gate.
inline const ReferencePoint& require_converged(const ReferencePoint& ref) {
  if (!ref.converged) {
    throw NoConvergence("reference point residual " + std::to_string(ref.residual) +
                            " exceeds 1e-4",
                        ref.residual);
  }
  return ref;
}

struct MetricSeries {
  std::vector<double> times;
  std::vector<double> regret;
  std::vector<Vector> fit_components;  // raw integrals of each constraint row
  std::vector<double> fit;             // |[components]_+|
  std::vector<double> fit_over_sqrt_t;
};

namespace detail {

// Cumulative trapezoidal integral of `values` on `times`.
inline std::vector<double> cumulative_trapezoid(const std::vector<double>& times,
                                                const std::vector<double>& values) {
  std::vector<double> out(values.size(), 0.0);
  for (std::size_t k = 1; k < values.size(); ++k) {
    out[k] = out[k - 1] + 0.5 * (times[k] - times[k - 1]) * (values[k] + values[k - 1]);
  }
  return out;
}

}  // namespace detail

/// Regret integrand at time t: each player's running action played against
/// the reference opponents, minus the reference cost.
inline double regret_integrand(const GameSpec& game, double t, const Vector& profile,
                               const Vector& x_star) {
  double acc = 0.0;
  for (int i = 0; i < game.n_players; ++i) {
    Vector mixed = x_star;
    game.block(mixed, i) = game.block(profile, i);
    acc += game.cost_value(i, t, mixed) - game.cost_value(i, t, x_star);
  }
  return acc;
}

/// Running regret on the trajectory's sample times (trapezoidal rule).
inline std::vector<double> regret(const Trajectory& traj, const GameSpec& game,
                                  const ReferencePoint& ref) {
  std::vector<double> integrand(traj.size());
  for (std::size_t k = 0; k < traj.size(); ++k) {
    integrand[k] = regret_integrand(game, traj.times[k], traj.profile(k), ref.x_star);
  }
  return detail::cumulative_trapezoid(traj.times, integrand);
}

/// Running fit series. The regret field is left empty; see compute_metrics.
inline MetricSeries fit(const Trajectory& traj, const GameSpec& game) {
  MetricSeries out;
  out.times = traj.times;
  const int q = game.constraint_dim;
  const std::size_t n = traj.size();
  out.fit_components.assign(n, Vector::Zero(q));
  out.fit.assign(n, 0.0);
  out.fit_over_sqrt_t.assign(n, 0.0);
  Vector previous;
  for (std::size_t k = 0; k < n; ++k) {
    const Vector current = game.coupling(traj.times[k], traj.profile(k));
    if (k > 0) {
      out.fit_components[k] = out.fit_components[k - 1] +
                              0.5 * (traj.times[k] - traj.times[k - 1]) * (current + previous);
    }
    previous = current;
    out.fit[k] = out.fit_components[k].cwiseMax(0.0).norm();
    if (traj.times[k] > 0.0) out.fit_over_sqrt_t[k] = out.fit[k] / std::sqrt(traj.times[k]);
  }
  return out;
}

inline MetricSeries compute_metrics(const Trajectory& traj, const GameSpec& game,
                                    const ReferencePoint& ref) {
  MetricSeries out = fit(traj, game);
  out.regret = regret(traj, game, ref);
  return out;
}

struct OracleOptions {
  int max_iterations = 200000;
  double tolerance = 1e-10;    // stop once the natural residual drops below
  double accept = 1e-4;        // converged flag threshold
};

/// Uniform grid of `count` points on [0, horizon].
inline std::vector<double> time_grid(double horizon, int count) {
  std::vector<double> out;
  if (count <= 1) return {0.0};
  for (int s = 0; s < count; ++s) out.push_back(horizon * s / (count - 1));
  return out;
}

namespace detail {

// Time-averaged KKT operator of the game on a grid, with trapezoidal weights.
class AveragedGame {
 public:
  AveragedGame(const GameSpec& game, const std::vector<double>& grid)
      : game_(game), grid_(grid), weights_(grid.size(), 1.0) {
    if (grid_.size() > 1) {
      const double span = grid_.back() - grid_.front();
      for (std::size_t k = 0; k < grid_.size(); ++k) {
        const double left = k > 0 ? grid_[k] - grid_[k - 1] : 0.0;
        const double right = k + 1 < grid_.size() ? grid_[k + 1] - grid_[k] : 0.0;
        weights_[k] = span > 0.0 ? 0.5 * (left + right) / span : 1.0 / grid_.size();
      }
    } else {
      weights_.assign(grid_.size(), 1.0);
    }
  }

  int primal_dim() const { return game_.profile_dim(); }
  int dual_dim() const { return game_.constraint_dim; }

  // Phi(x, lambda) = (F_bar(x) + Jg_bar(x)^T lambda, -g_bar(x))
  Vector operator()(const Vector& z) const {
    const int n = primal_dim();
    const int q = dual_dim();
    const Vector x = z.head(n);
    const Vector lambda = z.tail(q);
    Vector out = Vector::Zero(n + q);
    for (std::size_t k = 0; k < grid_.size(); ++k) {
      const double t = grid_[k];
      const double w = weights_[k];
      for (int i = 0; i < game_.n_players; ++i) {
        const int d = game_.action_dim;
        Vector part = game_.cost_gradient(i, t, x);
        if (q > 0) {
          const Vector xi = x.segment(i * d, d);
          part += game_.constraint_jacobian(i, t, xi).transpose() * lambda;
          out.tail(q) -= w * game_.constraint_value(i, t, xi);
        }
        out.segment(i * d, d) += w * part;
      }
    }
    return out;
  }

  Vector project(const Vector& z) const {
    Vector out(z.size());
    out.head(primal_dim()) = game_.project(z.head(primal_dim()));
    out.tail(dual_dim()) = z.tail(dual_dim()).cwiseMax(0.0);
    return out;
  }

  double residual(const Vector& z) const {
    return (z - project(z - (*this)(z))).norm();
  }

  Vector averaged_constraint(const Vector& x) const {
    Vector out = Vector::Zero(dual_dim());
    for (std::size_t k = 0; k < grid_.size(); ++k) {
      out += weights_[k] * game_.coupling(grid_[k], x);
    }
    return out;
  }

 private:
  const GameSpec& game_;
  std::vector<double> grid_;
  std::vector<double> weights_;
};

// Projected extragradient with backtracking on the step size.
inline Vector extragradient(const AveragedGame& op, Vector z, const OracleOptions& opt,
                            double& residual) {
  double tau = 0.1;
  residual = op.residual(z);
  for (int it = 0; it < opt.max_iterations && residual > opt.tolerance; ++it) {
    const Vector fz = op(z);
    Vector y, fy;
    for (int bt = 0; bt < 60; ++bt) {
      y = op.project(z - tau * fz);
      fy = op(y);
      if (tau * (fz - fy).norm() <= 0.9 * (z - y).norm()) break;
      tau *= 0.5;
    }
    z = op.project(z - tau * fy);
    tau *= 1.05;
    if (it % 16 == 0) residual = op.residual(z);
  }
  residual = op.residual(z);
  return z;
}

}  // namespace detail

/// Fixed-in-hindsight reference profile: solves the time-averaged generalized
/// variational inequality (averaged pseudo-gradient, averaged coupling
/// constraint) by multi-start projected extragradient on its KKT system and
/// keeps the point with the smallest residual. Feasibility of that point on
/// every grid time is reported separately.
inline ReferencePoint gne_oracle(const GameSpec& game, const std::vector<double>& grid,
                                 int attempts, std::uint64_t seed,
                                 const OracleOptions& opt = {}) {
  game.validate();
  if (grid.empty()) throw Error("gne_oracle needs a nonempty time grid");
  detail::AveragedGame op(game, grid);
  Sampler rng(seed);
  const int n = game.profile_dim();
  const int q = game.constraint_dim;

  ReferencePoint best;
  best.residual = std::numeric_limits<double>::infinity();
  for (int a = 0; a < std::max(1, attempts); ++a) {
    Vector z = Vector::Zero(n + q);
    z.head(n) = a == 0 ? Vector(0.5 * (game.lower() + game.upper()))
                       : game.sample_profile(rng);
    double residual = 0.0;
    z = detail::extragradient(op, z, opt, residual);
    if (residual < best.residual) {
      best.x_star = z.head(n);
      best.multiplier = z.tail(q);
      best.residual = residual;
    }
    if (best.residual <= opt.tolerance) break;
  }
  best.attempts = std::max(1, attempts);
  best.provenance = Provenance::kOracle;
  best.converged = best.residual <= opt.accept;
  if (q > 0) {
    best.averaged_violation = op.averaged_constraint(best.x_star).cwiseMax(0.0).maxCoeff();
    for (double t : grid) {
      best.grid_violation = std::max(
          best.grid_violation, game.coupling(t, best.x_star).cwiseMax(0.0).maxCoeff());
    }
  }
  return best;
}

struct BoundReport {
  bool event_mode = false;
  double horizon = 0.0;
  double initial_gap = 0.0;  // |Y(0) - 1 (x) x*|
  double delta_hat = 0.0;    // max_t |x(t) - x*|
  double l_hat = 0.0;
  double kf_hat = 0.0;
  double lambda2 = 0.0;
  double regret_final = 0.0;
  double regret_max = 0.0;
  double regret_bound = 0.0;
  double fit_final = 0.0;
  double fit_bound = 0.0;
  // Bounds use sampled constants, so they are estimates rather than
  // certified upper bounds.
  bool estimate = true;

  double regret_ratio() const { return regret_bound > 0 ? regret_max / regret_bound : 0.0; }
  double fit_ratio() const { return fit_bound > 0 ? fit_final / fit_bound : 0.0; }
  bool regret_within() const { return regret_max <= regret_bound; }
  bool fit_within() const { return fit_final <= fit_bound; }
};

/// Evaluates the closed-form regret and fit bounds with measured quantities
/// and compares them to the trajectory's metrics. Passing a trigger
/// configuration selects the event-triggered bound formulas.
inline BoundReport bound_check(const Trajectory& traj, const MetricSeries& metrics,
                               const GameSpec& game, const LaplacianData& lap,
                               const ReferencePoint& ref, const LipschitzEstimates& est,
                               const std::optional<TriggerConfig>& trig_cfg = std::nullopt) {
  BoundReport r;
  const int n = game.n_players;
  const double nn = static_cast<double>(n);
  r.event_mode = trig_cfg.has_value();
  r.horizon = traj.times.empty() ? 0.0 : traj.times.back();
  r.l_hat = est.l_hat;
  r.kf_hat = est.kf_hat;
  r.lambda2 = lap.lambda2;

  if (!traj.states.empty()) {
    const SwarmState& s0 = traj.states.front();
    double gap2 = 0.0;
    for (int i = 0; i < n; ++i) gap2 += (s0.upsilon[i] - ref.x_star).squaredNorm();
    r.initial_gap = std::sqrt(gap2);
  }
  for (std::size_t k = 0; k < traj.size(); ++k) {
    r.delta_hat = std::max(r.delta_hat, (traj.profile(k) - ref.x_star).norm());
  }
  if (!metrics.regret.empty()) {
    r.regret_final = metrics.regret.back();
    r.regret_max = *std::max_element(metrics.regret.begin(), metrics.regret.end());
  }
  if (!metrics.fit.empty()) r.fit_final = metrics.fit.back();

  const double ld = r.l_hat * r.delta_hat;
  const double fit_cost = 2.0 * nn * std::sqrt(r.kf_hat * r.horizon);
  if (!r.event_mode) {
    r.regret_bound = 0.5 * r.initial_gap * r.initial_gap + ld * ld / (4.0 * r.lambda2);
    r.fit_bound = fit_cost + std::sqrt(nn) * r.initial_gap +
                  ld * std::sqrt(nn) / (2.0 * std::sqrt(r.lambda2));
  } else {
    const double k_mu = traj.config.k_mu;
    const double sum_gamma = nn * trig_cfg->gamma0;
    const double sum_beta = nn * trig_cfg->beta0;
    r.regret_bound = 0.5 * r.initial_gap * r.initial_gap + k_mu / 4.0 * sum_gamma +
                     sum_beta / 8.0 + ld * ld / (2.0 * r.lambda2);
    r.fit_bound = std::sqrt(nn) * r.initial_gap +
                  std::sqrt(k_mu * nn / 2.0 * sum_gamma + nn / 4.0 * sum_beta) +
                  fit_cost + ld * std::sqrt(nn / r.lambda2);
  }
  return r;
}

}  // namespace gne

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "games.hpp"
#include "gne/dynamics.hpp"
#include "gne/metrics.hpp"
#include "gne/runner.hpp"
#include "gne/scenario.hpp"

using gne::Matrix;
using gne::SwarmState;
using gne::Trajectory;
using gne::Vector;

namespace {

// Trajectory of one-dimensional actions sampled on a uniform grid.
template <class Path>
Trajectory scripted(int n, double horizon, int steps, Path path) {
  Trajectory traj;
  traj.steps = steps;
  traj.config.dt = horizon / steps;
  traj.config.horizon = horizon;
  for (int k = 0; k <= steps; ++k) {
    const double t = horizon * k / steps;
    SwarmState s(n, 1, 0);
    const Vector x = path(t);
    for (int i = 0; i < n; ++i) s.x(i)(0) = x(i);
    traj.times.push_back(t);
    traj.states.push_back(s);
  }
  return traj;
}

gne::GameSpec scalar_constraint_game(std::function<double(double)> g) {
  return testgames::scalar_game([](double, double) { return 0.0; },
                                [](double, double) { return 0.0; },
                                [g](double t, double) { return g(t); },
                                [](double, double) { return 0.0; });
}

Trajectory slice(const Trajectory& traj, std::size_t from, std::size_t to) {
  Trajectory out = traj;
  out.times.assign(traj.times.begin() + from, traj.times.begin() + to + 1);
  out.states.assign(traj.states.begin() + from, traj.states.begin() + to + 1);
  return out;
}

gne::RunResult paper5_run(int stride) {
  auto s = gne::load_scenario("paper5");
  s.solver.sample_stride = stride;
  gne::RunOptions opt;
  return gne::evaluate(s, opt);
}

}  // namespace

TEST(Regret, ZeroAlongReference) {
  const auto game = gne::load_scenario("paper5").game();
  Vector x_star(10);
  x_star << 0.5, 1, -1, 2, 3, 0, 6, 1, 2, 2;
  Trajectory traj;
  for (int k = 0; k <= 100; ++k) {
    SwarmState s(5, 2, 1);
    for (int i = 0; i < 5; ++i) s.x(i) = x_star.segment(2 * i, 2);
    traj.times.push_back(0.01 * k);
    traj.states.push_back(s);
  }
  const auto r = gne::regret(traj, game, gne::analytic_reference(x_star));
  for (double v : r) EXPECT_EQ(v, 0.0);
}

TEST(Regret, ConstantIntegrand) {
  const auto game = testgames::decoupled({Vector::Constant(1, 1.0)});
  const auto traj = scripted(1, 1.0, 1000, [](double) { return Vector::Zero(1); });
  const auto r = gne::regret(traj, game, gne::analytic_reference(Vector::Constant(1, 1.0)));
  EXPECT_NEAR(r.back(), 1.0, 1e-12);
  EXPECT_NEAR(r[500], 0.5, 1e-12);
}

TEST(Regret, TwoPlayerLinearPathMatchesFineQuadrature) {
  const auto game = testgames::two_player();
  Vector x_star(2);
  x_star << 0, 2;
  auto path = [](double t) {
    Vector x(2);
    x << 1.5 - 2 * t, -1 + 3 * t;
    return x;
  };
  // Trapezoid error is h^2/12 * (f'(1) - f'(0)); h = 2.5e-4 keeps it near 1e-7.
  const auto traj = scripted(2, 1.0, 4000, path);
  const auto r = gne::regret(traj, game, gne::analytic_reference(x_star));

  // Composite Simpson with 2e5 panels on the mixed-argument integrand.
  auto integrand = [&](double t) {
    const Vector x = path(t);
    const double j1 = std::pow(x(0) - 1, 2) + x(0) * 2 - (1 + 0);
    const double j2 = std::pow(x(1) - 2, 2) + 0 * x(1) - 0;
    return j1 + j2;
  };
  const int m = 200000;
  double simpson = integrand(0) + integrand(1);
  for (int k = 1; k < m; ++k) simpson += (k % 2 ? 4 : 2) * integrand(static_cast<double>(k) / m);
  simpson /= 3.0 * m;
  EXPECT_NEAR(r.back(), simpson, 1e-6);
}

TEST(Fit, ConstantNegativeConstraintIsClipped) {
  const auto game = scalar_constraint_game([](double) { return -1.0; });
  const auto traj = scripted(1, 1.0, 100, [](double) { return Vector::Zero(1); });
  const auto m = gne::fit(traj, game);
  EXPECT_NEAR(m.fit_components.back()(0), -1.0, 1e-14);
  EXPECT_EQ(m.fit.back(), 0.0);
}

TEST(Fit, ConstantPositiveConstraint) {
  const auto game = scalar_constraint_game([](double) { return 2.0; });
  const auto traj = scripted(1, 1.0, 100, [](double) { return Vector::Zero(1); });
  const auto m = gne::fit(traj, game);
  EXPECT_NEAR(m.fit.back(), 2.0, 1e-14);
  EXPECT_NEAR(m.fit_over_sqrt_t.back(), 2.0, 1e-14);
  EXPECT_NEAR(m.fit_over_sqrt_t[25], 0.5 / std::sqrt(0.25), 1e-14);
  EXPECT_EQ(m.fit_over_sqrt_t.front(), 0.0);
}

TEST(Fit, FullPeriodCancels) {
  const auto game = scalar_constraint_game([](double t) { return std::sin(2 * M_PI * t); });
  const auto traj = scripted(1, 1.0, 4000, [](double) { return Vector::Zero(1); });
  const auto m = gne::fit(traj, game);
  EXPECT_NEAR(m.fit_components.back()(0), 0.0, 1e-6);
  EXPECT_LE(m.fit.back(), 1e-6);
  // Half a period in, the violation is 1/pi.
  EXPECT_NEAR(m.fit[2000], 1 / M_PI, 1e-6);
}

TEST(Metrics, Paper5FitIdentityAndSplitAdditivity) {
  const auto s = gne::load_scenario("paper5");
  const auto game = s.game();
  const auto traj = gne::simulate(game, s.topology(), s.solver, s.initial_state(game));
  const auto ref = gne::gne_oracle(game, gne::time_grid(1.0, 101), 2, 1);
  const auto m = gne::compute_metrics(traj, game, ref);
  for (std::size_t k = 0; k < m.fit.size(); ++k) {
    EXPECT_NEAR(m.fit[k], m.fit_components[k].cwiseMax(0.0).norm(), 1e-12);
    EXPECT_GE(m.fit[k], 0.0);
  }
  const std::size_t half = traj.size() / 2;
  const auto first = gne::compute_metrics(slice(traj, 0, half), game, ref);
  const auto second = gne::compute_metrics(slice(traj, half, traj.size() - 1), game, ref);
  EXPECT_NEAR(first.regret.back() + second.regret.back(), m.regret.back(), 1e-10);
  EXPECT_NEAR(first.fit_components.back()(0) + second.fit_components.back()(0),
              m.fit_components.back()(0), 1e-10);
}

TEST(Metrics, StrideHalvingChangesLittle) {
  const auto a = paper5_run(1);
  const auto b = paper5_run(2);
  auto rel = [](double x, double y) { return std::abs(x - y) / std::max(1.0, std::abs(x)); };
  EXPECT_LT(rel(a.final_regret(), b.final_regret()), 1e-4);
  EXPECT_LT(rel(a.final_fit(), b.final_fit()), 1e-4);
  EXPECT_LT(rel(a.metrics.fit_components.back()(0), b.metrics.fit_components.back()(0)), 1e-4);
}

TEST(Oracle, DecoupledGameReturnsTargets) {
  Vector c1(2), c2(2);
  c1 << 1, 2;
  c2 << -0.5, 5;
  const auto ref = gne::gne_oracle(testgames::decoupled({c1, c2}), {0.0}, 1, 1);
  EXPECT_LE(ref.residual, 1e-9);
  EXPECT_LE((ref.x_star.head(2) - c1).norm(), 1e-8);
  EXPECT_LE((ref.x_star.tail(2) - c2).norm(), 1e-8);
  EXPECT_TRUE(ref.converged);
  EXPECT_EQ(ref.provenance, gne::Provenance::kOracle);
}

TEST(Oracle, TwoPlayerStationaryPoint) {
  // 2 x1 + x2 = 2, x1 + 2 x2 = 4.
  Matrix a(2, 2);
  a << 2, 1, 1, 2;
  Vector b(2);
  b << 2, 4;
  const Vector expected = a.lu().solve(b);
  const auto ref = gne::gne_oracle(testgames::two_player(), gne::time_grid(1, 11), 3, 2);
  EXPECT_LE(ref.residual, 1e-6);
  EXPECT_LE((ref.x_star - expected).norm(), 1e-6);
  EXPECT_NEAR(ref.x_star(0), 0.0, 1e-6);
  EXPECT_NEAR(ref.x_star(1), 2.0, 1e-6);
}

TEST(Oracle, BoxActiveMinimizer) {
  const auto ref = gne::gne_oracle(testgames::decoupled({Vector::Constant(1, 10.0)}), {0.0}, 1, 3);
  EXPECT_NEAR(ref.x_star(0), 6.0, 1e-9);
}

TEST(Oracle, ActiveCouplingConstraintAndMultiplier) {
  // min (x - 3)^2 s.t. x - 1 <= 0: x* = 1, lambda = 4.
  const auto game = testgames::scalar_game([](double, double x) { return (x - 3) * (x - 3); },
                                           [](double, double x) { return 2 * (x - 3); },
                                           [](double, double x) { return x - 1; },
                                           [](double, double) { return 1.0; });
  const auto ref = gne::gne_oracle(game, {0.0, 0.5, 1.0}, 2, 4);
  EXPECT_NEAR(ref.x_star(0), 1.0, 1e-8);
  EXPECT_NEAR(ref.multiplier(0), 4.0, 1e-7);
  EXPECT_LE(ref.grid_violation, 1e-8);
}

TEST(Oracle, TimeVaryingConstraintReportsGridViolation) {
  // Averaged constraint x - 1 <= 0 holds with equality at x* = 1, while the
  // instantaneous one x - 1 - 0.5 cos(2 pi t) is violated near t = 1/2.
  const auto game = testgames::scalar_game(
      [](double, double x) { return (x - 3) * (x - 3); },
      [](double, double x) { return 2 * (x - 3); },
      [](double t, double x) { return x - 1 - 0.5 * std::cos(2 * M_PI * t); },
      [](double, double) { return 1.0; });
  const auto ref = gne::gne_oracle(game, gne::time_grid(1.0, 201), 1, 5);
  EXPECT_NEAR(ref.x_star(0), 1.0, 1e-6);
  EXPECT_NEAR(ref.averaged_violation, 0.0, 1e-6);
  EXPECT_NEAR(ref.grid_violation, 0.5, 1e-6);
}

TEST(Oracle, NonConvergenceIsFlagged) {
  gne::OracleOptions opt;
  opt.max_iterations = 1;
  const auto ref = gne::gne_oracle(gne::load_scenario("paper5").game(), {0.0}, 1, 6, opt);
  EXPECT_FALSE(ref.converged);
  EXPECT_THROW(gne::require_converged(ref), gne::NoConvergence);
  EXPECT_THROW(gne::gne_oracle(testgames::two_player(), {}, 1, 1), gne::Error);
}

TEST(BoundCheck, ContinuousFormulaVanishesAtReference) {
  const auto game = testgames::two_player();
  Vector x_star(2);
  x_star << 0, 2;
  Trajectory traj = scripted(2, 1.0, 10, [&](double) { return x_star; });
  for (auto& st : traj.states) for (auto& u : st.upsilon) u = x_star;
  const auto ref = gne::analytic_reference(x_star);
  const auto m = gne::compute_metrics(traj, game, ref);
  gne::LipschitzEstimates est;
  est.kf_hat = 0;
  const auto lap = gne::build_laplacian(gne::Topology::path(2));
  const auto r = gne::bound_check(traj, m, game, lap, ref, est);
  EXPECT_EQ(r.regret_bound, 0.0);
  EXPECT_EQ(r.fit_bound, 0.0);
  EXPECT_FALSE(r.event_mode);
  EXPECT_TRUE(r.estimate);
}

TEST(BoundCheck, EventFormulaAdditiveTerms) {
  // N = 5, K_mu = 10, beta0 = gamma0 = 300: 10/4 * 1500 + 1500/8.
  const auto game = testgames::null_game(5, 0);
  Trajectory traj = scripted(5, 1.0, 10, [](double) { return Vector::Zero(5); });
  traj.config.k_mu = 10;
  const auto ref = gne::analytic_reference(Vector::Zero(5));
  const auto m = gne::compute_metrics(traj, game, ref);
  gne::TriggerConfig trig;
  const auto lap = gne::build_laplacian(gne::Topology::ring(5));
  const auto r = gne::bound_check(traj, m, game, lap, ref, gne::LipschitzEstimates{}, trig);
  EXPECT_DOUBLE_EQ(r.regret_bound, 3937.5);
  EXPECT_DOUBLE_EQ(r.fit_bound, std::sqrt(10 * 5 / 2.0 * 1500 + 5 / 4.0 * 1500));
}

TEST(BoundCheck, ContinuousFormulaByHand) {
  const auto game = testgames::null_game(2, 0);
  const auto traj = scripted(2, 4.0, 40, [](double t) {
    Vector x(2);
    x << t / 4, -t / 4;
    return x;
  });
  const auto ref = gne::analytic_reference(Vector::Zero(2));
  const auto m = gne::compute_metrics(traj, game, ref);
  gne::LipschitzEstimates est;
  est.l_hat = 3;
  est.kf_hat = 2;
  const auto lap = gne::build_laplacian(gne::Topology::path(2));  // lambda2 = 2
  const auto r = gne::bound_check(traj, m, game, lap, ref, est);
  const double delta = std::sqrt(2.0);
  EXPECT_DOUBLE_EQ(r.delta_hat, delta);
  EXPECT_DOUBLE_EQ(r.initial_gap, 0.0);
  EXPECT_NEAR(r.regret_bound, 9 * 2 / (4 * 2.0), 1e-12);
  EXPECT_NEAR(r.fit_bound, 2 * 2 * std::sqrt(2 * 4.0) + 3 * delta * std::sqrt(2.0) / (2 * std::sqrt(2.0)),
              1e-12);
}

TEST(BoundCheck, Paper5MeasuredAgainstEstimate) {
  const auto r = paper5_run(1);
  // Sampled constants make this a report, not a certificate.
  RecordProperty("regret_ratio", std::to_string(r.bounds.regret_ratio()));
  RecordProperty("fit_ratio", std::to_string(r.bounds.fit_ratio()));
  EXPECT_TRUE(std::isfinite(r.bounds.regret_bound));
  EXPECT_GT(r.bounds.regret_bound, 0.0);
  EXPECT_TRUE(r.bounds.estimate);
}

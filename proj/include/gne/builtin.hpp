#pragma once

// Built-in five-player example: two-dimensional actions in [-1, 6]^2,
// tracking costs with oscillating targets, bilinear couplings through
// M = [[5, 1], [-1, 5]], and one time-varying linear coupling constraint.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "gne/game.hpp"

namespace gne::builtin {

inline constexpr const char* kPaper5 = "paper5";

namespace detail {

// w * (x - amp * cos(freq * t) - offset)^2
struct Tracking {
  double weight, amp, freq, offset;
};

// (amp * sin(freq * t) + base) * x
struct Coefficient {
  double amp, freq, base;
};

struct PlayerTerms {
  std::array<Tracking, 2> tracking;
  int partner;      // 0-based
  double coupling;  // +1 or -1 in front of x_i^T M x_partner
  std::array<Coefficient, 2> constraint;
  double constraint_offset;
};

inline const std::array<PlayerTerms, 5>& players() {
  static const std::array<PlayerTerms, 5> table{{
      {{{{2, 2, 10, 1}, {2, 1, 15, 1.5}}}, 4, 1.0,
       {{{3, 1.5, 17}, {2, 1, 18}}}, 2.0},
      {{{{1, 1, 20, 1}, {2, 2, 17, 3}}}, 3, 1.0,
       {{{4, 2, 16}, {4, 2, 16}}}, 4.0},
      {{{{3, 1, 20, 3}, {1, 1, 10, 1}}}, 3, 1.0,
       {{{5, 1, 15}, {6, 2.5, 14}}}, 3.5},
      {{{{1, 3, 10, 2}, {3, 1, 20, 2}}}, 1, -1.0,
       {{{6, 1.5, 14}, {8, 1.5, 12}}}, 3.2},
      {{{{0.5, 1, 15, 1}, {2, 3, 15, 1}}}, 0, -1.0,
       {{{7, 1, 13}, {5, 1, 15}}}, 3.0},
  }};
  return table;
}

inline Eigen::Matrix2d coupling_matrix() {
  Eigen::Matrix2d m;
  m << 5, 1, -1, 5;
  return m;
}

inline double target(const Tracking& term, double t) {
  return term.amp * std::cos(term.freq * t) + term.offset;
}

inline double coefficient(const Coefficient& c, double t) {
  return c.amp * std::sin(c.freq * t) + c.base;
}

}  // namespace detail

inline GameSpec paper5_game() {
  GameSpec game;
  game.n_players = 5;
  game.action_dim = 2;
  game.constraint_dim = 1;
  for (int i = 0; i < 5; ++i) game.boxes.push_back(BoxSet::uniform(2, -1.0, 6.0));

  game.cost_value = [](int i, double t, const Vector& x) {
    const auto& p = detail::players()[i];
    const Eigen::Vector2d xi = x.segment<2>(2 * i);
    const Eigen::Vector2d xp = x.segment<2>(2 * p.partner);
    double cost = 0.0;
    for (int k = 0; k < 2; ++k) {
      const double r = xi(k) - detail::target(p.tracking[k], t);
      cost += p.tracking[k].weight * r * r;
    }
    return cost + p.coupling * xi.dot(detail::coupling_matrix() * xp);
  };
  game.cost_gradient = [](int i, double t, const Vector& x) {
    const auto& p = detail::players()[i];
    const Eigen::Vector2d xi = x.segment<2>(2 * i);
    const Eigen::Vector2d xp = x.segment<2>(2 * p.partner);
    Vector grad = p.coupling * (detail::coupling_matrix() * xp);
    for (int k = 0; k < 2; ++k) {
      grad(k) += 2.0 * p.tracking[k].weight * (xi(k) - detail::target(p.tracking[k], t));
    }
    return grad;
  };
  game.constraint_value = [](int i, double t, const Vector& xi) {
    const auto& p = detail::players()[i];
    Vector g(1);
    g(0) = detail::coefficient(p.constraint[0], t) * xi(0) +
           detail::coefficient(p.constraint[1], t) * xi(1) - p.constraint_offset;
    return g;
  };
  game.constraint_jacobian = [](int i, double t, const Vector&) {
    const auto& p = detail::players()[i];
    Matrix jac(1, 2);
    jac << detail::coefficient(p.constraint[0], t), detail::coefficient(p.constraint[1], t);
    return jac;
  };
  return game;
}

/// The same game written in the scenario expression language, one cost and
/// one constraint per player.
struct ExpressionForm {
  std::vector<std::string> costs;
  std::vector<std::vector<std::string>> constraints;
};

inline ExpressionForm paper5_expressions() {
  return {
      {
          "2*(x1_1 - 2*cos(10*t) - 1)^2 + 2*(x1_2 - cos(15*t) - 1.5)^2"
          " + 5*x1_1*x5_1 + x1_1*x5_2 - x1_2*x5_1 + 5*x1_2*x5_2",
          "(x2_1 - cos(20*t) - 1)^2 + 2*(x2_2 - 2*cos(17*t) - 3)^2"
          " + 5*x2_1*x4_1 + x2_1*x4_2 - x2_2*x4_1 + 5*x2_2*x4_2",
          "3*(x3_1 - cos(20*t) - 3)^2 + (x3_2 - cos(10*t) - 1)^2"
          " + 5*x3_1*x4_1 + x3_1*x4_2 - x3_2*x4_1 + 5*x3_2*x4_2",
          "(x4_1 - 3*cos(10*t) - 2)^2 + 3*(x4_2 - cos(20*t) - 2)^2"
          " - (5*x4_1*x2_1 + x4_1*x2_2 - x4_2*x2_1 + 5*x4_2*x2_2)",
          "0.5*(x5_1 - cos(15*t) - 1)^2 + 2*(x5_2 - 3*cos(15*t) - 1)^2"
          " - (5*x5_1*x1_1 + x5_1*x1_2 - x5_2*x1_1 + 5*x5_2*x1_2)",
      },
      {
          {"(3*sin(1.5*t) + 17)*x1_1 + (2*sin(t) + 18)*x1_2 - 2"},
          {"(4*sin(2*t) + 16)*x2_1 + (4*sin(2*t) + 16)*x2_2 - 4"},
          {"(5*sin(t) + 15)*x3_1 + (6*sin(2.5*t) + 14)*x3_2 - 3.5"},
          {"(6*sin(1.5*t) + 14)*x4_1 + (8*sin(1.5*t) + 12)*x4_2 - 3.2"},
          {"(7*sin(t) + 13)*x5_1 + (5*sin(t) + 15)*x5_2 - 3"},
      },
  };
}

}  // namespace gne::builtin

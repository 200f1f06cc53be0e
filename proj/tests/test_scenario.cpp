#include <gtest/gtest.h>

#include <string>

#include "gne/random.hpp"
#include "gne/scenario.hpp"

using gne::Vector;

namespace {

const char* kOnePlayer = R"yaml(players: 1
action_dim: 1
game:
  - cost: "(x1 - 3)^2"
    box: {lower: [-1], upper: [6]}
)yaml";

const char* kBudget = R"yaml(name: budget
players: 3
action_dim: 2
constraint_dim: 1
game:
  - cost: "(x1_1 - 2 - cos(t))^2 + x1_2^2 + 0.5*x1_1*x2_1"
    constraints: ["x1_1 + x1_2 - 1 - sin(t)"]
    box: {lower: [0, -1], upper: [4, 1]}
  - cost: "(x2_1 - 2)^2 + (x2_2 + 1)^2 + 0.5*x2_1*x3_2"
    constraints: ["2*x2_1 - x2_2*sin(3*t)"]
    box: {lower: [0, -1], upper: [4, 1]}
  - cost: "(x3_1 - 3 + sin(2*t))^2 + x3_2^4 - x3_1*x1_2"
    constraints: ["x3_1^2 - 1"]
    box: {lower: [0, -1], upper: [4, 1]}
topology:
  edges:
    - [1, 2]
    - [2, 3, 0.5]
initial:
  uniform: {lower: [0, -1], upper: [4, 1]}
solver:
  dt: 0.002
  horizon: 1.5
  k_mu: 4
  seed: 11
  mode: event
trigger:
  beta0: 30
  gamma0: 40
)yaml";

// Equivalence by oracle values at random profiles and times.
void expect_same_game(const gne::Scenario& a, const gne::Scenario& b, std::uint64_t seed) {
  ASSERT_EQ(a.n_players, b.n_players);
  ASSERT_EQ(a.action_dim, b.action_dim);
  ASSERT_EQ(a.constraint_dim, b.constraint_dim);
  const auto ga = a.game(), gb = b.game();
  gne::Sampler rng(seed);
  for (int s = 0; s < 100; ++s) {
    const Vector x = ga.sample_profile(rng);
    const double t = 3 * rng.uniform();
    for (int i = 0; i < a.n_players; ++i) {
      EXPECT_NEAR(ga.cost_value(i, t, x), gb.cost_value(i, t, x), 1e-12);
      EXPECT_LE((ga.cost_gradient(i, t, x) - gb.cost_gradient(i, t, x)).norm(), 1e-12);
      const Vector xi = ga.block(x, i);
      EXPECT_LE((ga.constraint(i, t, xi) - gb.constraint(i, t, xi)).norm(), 1e-12);
      EXPECT_LE((ga.jacobian(i, t, xi) - gb.jacobian(i, t, xi)).norm(), 1e-12);
    }
  }
  for (int i = 0; i < a.n_players; ++i) {
    EXPECT_EQ(a.boxes[i].lower(), b.boxes[i].lower());
    EXPECT_EQ(a.boxes[i].upper(), b.boxes[i].upper());
  }
}

std::string replace(std::string text, const std::string& from, const std::string& to) {
  const auto pos = text.find(from);
  EXPECT_NE(pos, std::string::npos) << from;
  return text.replace(pos, from.size(), to);
}

}  // namespace

TEST(Scenario, BuiltinPaper5) {
  const auto s = gne::load_scenario("paper5");
  EXPECT_EQ(s.n_players, 5);
  EXPECT_EQ(s.action_dim, 2);
  EXPECT_EQ(s.constraint_dim, 1);
  for (const auto& box : s.boxes) {
    EXPECT_EQ(box.lower(), Vector::Constant(2, -1));
    EXPECT_EQ(box.upper(), Vector::Constant(2, 6));
  }
  EXPECT_EQ(s.solver.dt, 1e-3);
  EXPECT_EQ(s.solver.horizon, 1.0);
  EXPECT_EQ(s.solver.k_mu, 10.0);
  EXPECT_EQ(s.trigger.beta0, 300.0);
  EXPECT_EQ(s.trigger.gamma0, 300.0);
  EXPECT_EQ(s.topology().size(), 5);
}

TEST(Scenario, Paper5InitialActionsAreSeededAndFeasible) {
  auto s = gne::load_scenario("paper5");
  s.solver.seed = 9;
  const Vector a = s.initial_actions(), b = s.initial_actions();
  EXPECT_EQ(a, b);
  s.solver.seed = 10;
  EXPECT_NE(a, s.initial_actions());
  const auto game = s.game();
  EXPECT_TRUE(game.contains(a));
}

TEST(Scenario, MinimalOnePlayerFile) {
  const auto s = gne::parse_scenario(kOnePlayer);
  EXPECT_EQ(s.n_players, 1);
  EXPECT_EQ(s.constraint_dim, 0);
  const auto game = s.game();
  EXPECT_NO_THROW(game.validate());
  Vector x(1);
  x << 1.0;
  EXPECT_NEAR(game.cost_value(0, 0.0, x), 4.0, 1e-15);
  EXPECT_NEAR(game.cost_gradient(0, 0.0, x)(0), -4.0, 1e-15);
  // Default start is the box center.
  EXPECT_NEAR(s.initial_actions()(0), 2.5, 1e-15);
}

TEST(Scenario, ReferenceToMissingPlayerIsDimensionError) {
  std::string text = R"yaml(players: 5
action_dim: 1
game:
)yaml";
  for (int i = 1; i <= 5; ++i) {
    text += "  - cost: \"(x" + std::to_string(i) + " - 1)^2" + (i == 3 ? " + x7" : "") + "\"\n";
    text += "    box: {lower: [-1], upper: [6]}\n";
  }
  try {
    gne::parse_scenario(text);
    FAIL() << "expected DimensionError";
  } catch (const gne::DimensionError& e) {
    EXPECT_NE(std::string(e.what()).find("player 7 of 5"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("line 8"), std::string::npos) << e.what();
  }
}

TEST(Scenario, ConstraintMayOnlyUseOwnAction) {
  const std::string text = replace(kBudget, "\"x3_1^2 - 1\"", "\"x3_1^2 - x1_1\"");
  EXPECT_THROW(gne::parse_scenario(text), gne::DimensionError);
}

TEST(Scenario, WrongConstraintCountIsDimensionError) {
  const std::string text = replace(kBudget, "constraint_dim: 1", "constraint_dim: 2");
  EXPECT_THROW(gne::parse_scenario(text), gne::DimensionError);
}

TEST(Scenario, EdgeOutsideRangeIsDimensionError) {
  const std::string text = replace(kBudget, "- [2, 3, 0.5]", "- [2, 4, 0.5]");
  EXPECT_THROW(gne::parse_scenario(text), gne::DimensionError);
}

TEST(Scenario, ExpressionErrorReportsFileLineAndColumn) {
  const std::string text = replace(kOnePlayer, "\"(x1 - 3)^2\"", "\"(x1 - 3)^2 + * 2\"");
  try {
    gne::parse_scenario(text);
    FAIL() << "expected ParseError";
  } catch (const gne::ParseError& e) {
    EXPECT_EQ(e.line(), 4);
    // `  - cost: "` puts the expression at column 12; the '*' is its 14th character.
    EXPECT_EQ(e.column(), 12 + 13);
  }
}

TEST(Scenario, UnquotedExpressionColumn) {
  const std::string text = replace(kOnePlayer, "\"(x1 - 3)^2\"", "x1 + $");
  try {
    gne::parse_scenario(text);
    FAIL() << "expected ParseError";
  } catch (const gne::ParseError& e) {
    EXPECT_EQ(e.line(), 4);
    EXPECT_EQ(e.column(), 11 + 5);
  }
}

TEST(Scenario, SchemaErrors) {
  EXPECT_THROW(gne::parse_scenario("players: 2\naction_dim: 1\n"), gne::ParseError);
  EXPECT_THROW(gne::parse_scenario("- a\n- b\n"), gne::ParseError);
  EXPECT_THROW(gne::parse_scenario("builtin: paper6\n"), gne::ParseError);
  EXPECT_THROW(gne::parse_scenario("builtin: paper5\nsolver: {mode: sometimes}\n"), gne::Error);
  EXPECT_THROW(gne::parse_scenario("builtin: paper5\nsolver: {dt: fast}\n"), gne::ParseError);
  try {
    gne::parse_scenario("players: [1\n");
    FAIL() << "expected ParseError";
  } catch (const gne::ParseError& e) {
    EXPECT_GE(e.line(), 1);
  }
  EXPECT_THROW(gne::load_scenario("/nonexistent/scenario.yaml"), gne::Error);
}

TEST(Scenario, FileFieldsAreRead) {
  const auto s = gne::parse_scenario(kBudget);
  EXPECT_EQ(s.name, "budget");
  EXPECT_EQ(s.solver.dt, 0.002);
  EXPECT_EQ(s.solver.horizon, 1.5);
  EXPECT_EQ(s.solver.k_mu, 4.0);
  EXPECT_EQ(s.solver.seed, 11u);
  EXPECT_EQ(s.solver.mode, gne::Mode::kEventTriggered);
  EXPECT_EQ(s.trigger.beta0, 30.0);
  EXPECT_EQ(s.trigger.gamma0, 40.0);
  const auto top = s.topology();
  EXPECT_EQ(top.weight(0, 1), 1.0);
  EXPECT_EQ(top.weight(1, 2), 0.5);
  EXPECT_EQ(top.weight(0, 2), 0.0);
  EXPECT_FALSE(s.initial.actions.has_value());
}

TEST(Scenario, ExpressionGameGradientsAreSymbolic) {
  const auto game = gne::parse_scenario(kBudget).game();
  EXPECT_LT(gne::gradient_check(game, 100, 5), 1e-6);
}

TEST(Scenario, RoundTripUserFile) {
  const auto a = gne::parse_scenario(kBudget);
  const auto b = gne::parse_scenario(gne::serialize_scenario(a));
  expect_same_game(a, b, 1);
  EXPECT_EQ(a.topology().weights(), b.topology().weights());
  EXPECT_EQ(a.initial_actions(), b.initial_actions());
  EXPECT_EQ(gne::serialize_scenario(a), gne::serialize_scenario(b));
}

TEST(Scenario, RoundTripBuiltinAndExpandedBuiltin) {
  const auto a = gne::load_scenario("paper5");
  const auto by_id = gne::parse_scenario(gne::serialize_scenario(a));
  EXPECT_EQ(by_id.builtin, "paper5");
  expect_same_game(a, by_id, 2);
  const auto expanded = gne::parse_scenario(gne::serialize_scenario(a, /*expand_builtin=*/true));
  EXPECT_TRUE(expanded.builtin.empty());
  expect_same_game(a, expanded, 3);
  EXPECT_EQ(a.initial_actions(), expanded.initial_actions());
}

TEST(Scenario, ContentHash) {
  EXPECT_EQ(gne::content_hash(""), "cbf29ce484222325");
  EXPECT_EQ(gne::content_hash("a"), "af63dc4c8601ec8c");
  EXPECT_NE(gne::content_hash(kBudget), gne::content_hash(kOnePlayer));
}

#pragma once

// Scenario files: YAML documents declaring the players, their costs and
// coupling constraints (expression strings), boxes, communication graph,
// initial conditions and default solver settings.
//
//   name: two_player
//   players: 2
//   action_dim: 1
//   constraint_dim: 1
//   topology: {edges: [[1, 2]]}          # or {kind: ring|path|complete}
//   game:
//     - cost: "(x1 - 1)^2 + x1*x2"
//       constraints: ["x1 - 2"]
//       box: {lower: [-1], upper: [6]}
//     - ...
//   initial: {x: [[0], [0]]}             # or {uniform: {lower: [..], upper: [..]}}
//   solver: {dt: 0.001, horizon: 1, k_mu: 10, mode: continuous, seed: 7}
//   trigger: {beta0: 300, gamma0: 300}
//
// `builtin: paper5` replaces players, dimensions and game with the built-in
// five-player example; the remaining sections still apply.

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gne/builtin.hpp"
#include "gne/dynamics.hpp"
#include "gne/errors.hpp"
#include "gne/expression.hpp"
#include "gne/game.hpp"
#include "gne/graph.hpp"
#include "gne/random.hpp"
#include "gne/state.hpp"

namespace gne {

struct InitialPolicy {
  // Explicit actions (player-major, length N*d) take precedence over the
  // uniform draw, which samples every player's block from [lower, upper].
  std::optional<Vector> actions;
  Vector uniform_lower;
  Vector uniform_upper;
  // Clamp drawn or given actions into the boxes.
  bool project = true;
  std::optional<std::vector<Vector>> estimates;
};

enum class TopologyKind { kEdges, kRing, kPath, kComplete };

struct Scenario {
  std::string name = "scenario";
  std::string builtin;  // empty for expression-defined games
  int n_players = 0;
  int action_dim = 0;
  int constraint_dim = 0;
  TopologyKind topology_kind = TopologyKind::kRing;
  std::vector<Edge> edges;
  std::vector<Expression> costs;
  std::vector<std::vector<Expression>> constraints;
  std::vector<BoxSet> boxes;
  InitialPolicy initial;
  SolverConfig solver;
  TriggerConfig trigger;

  Topology topology() const {
    switch (topology_kind) {
      case TopologyKind::kRing: return Topology::ring(n_players);
      case TopologyKind::kPath: return Topology::path(n_players);
      case TopologyKind::kComplete: return Topology::complete(n_players);
      case TopologyKind::kEdges: break;
    }
    return Topology::from_edges(n_players, edges);
  }

  GameSpec game() const;

  /// Initial actions after the draw (seeded by solver.seed) and projection.
  Vector initial_actions() const {
    Vector x(n_players * action_dim);
    if (initial.actions) {
      x = *initial.actions;
    } else {
      Sampler rng(solver.seed);
      for (int i = 0; i < n_players; ++i) {
        x.segment(i * action_dim, action_dim) =
            rng.uniform(initial.uniform_lower, initial.uniform_upper);
      }
    }
    if (initial.project) {
      for (int i = 0; i < n_players; ++i) {
        x.segment(i * action_dim, action_dim) =
            box_projection(boxes[i], Vector(x.segment(i * action_dim, action_dim)));
      }
    }
    return x;
  }

  SwarmState initial_state(const GameSpec& g) const {
    const Vector x = initial_actions();
    return gne::initial_state(g, x, initial.estimates ? &*initial.estimates : nullptr);
  }
};

namespace detail {

// Game built from parsed expressions. Partial derivatives are taken
// symbolically once, at construction.
struct ExpressionGame {
  int n = 0, d = 0, q = 0;
  std::vector<Expression> costs;
  std::vector<std::vector<Expression>> cost_grads;            // [i][k]
  std::vector<std::vector<Expression>> constraints;           // [i][j]
  std::vector<std::vector<std::vector<Expression>>> jacobian;  // [i][j][k]
};

inline GameSpec game_from_expressions(int n, int d, int q,
                                      const std::vector<Expression>& costs,
                                      const std::vector<std::vector<Expression>>& constraints,
                                      const std::vector<BoxSet>& boxes) {
  auto eg = std::make_shared<ExpressionGame>();
  eg->n = n;
  eg->d = d;
  eg->q = q;
  eg->costs = costs;
  eg->constraints = constraints;
  eg->cost_grads.resize(n);
  eg->jacobian.resize(n);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < d; ++k) eg->cost_grads[i].push_back(costs[i].derivative({i, k}));
    eg->jacobian[i].resize(q);
    for (int j = 0; j < q; ++j) {
      for (int k = 0; k < d; ++k) {
        eg->jacobian[i][j].push_back(constraints[i][j].derivative({i, k}));
      }
    }
  }

  GameSpec game;
  game.n_players = n;
  game.action_dim = d;
  game.constraint_dim = q;
  game.boxes = boxes;
  game.cost_value = [eg](int i, double t, const Vector& x) {
    return eg->costs[i].evaluate(t, [&](int p, int k) { return x(p * eg->d + k); });
  };
  game.cost_gradient = [eg](int i, double t, const Vector& x) {
    Vector out(eg->d);
    for (int k = 0; k < eg->d; ++k) {
      out(k) = eg->cost_grads[i][k].evaluate(t, [&](int p, int c) { return x(p * eg->d + c); });
    }
    return out;
  };
  game.constraint_value = [eg](int i, double t, const Vector& xi) {
    Vector out(eg->q);
    for (int j = 0; j < eg->q; ++j) {
      out(j) = eg->constraints[i][j].evaluate(t, [&](int, int k) { return xi(k); });
    }
    return out;
  };
  game.constraint_jacobian = [eg](int i, double t, const Vector& xi) {
    Matrix out(eg->q, eg->d);
    for (int j = 0; j < eg->q; ++j) {
      for (int k = 0; k < eg->d; ++k) {
        out(j, k) = eg->jacobian[i][j][k].evaluate(t, [&](int, int c) { return xi(c); });
      }
    }
    return out;
  };
  return game;
}

}  // namespace detail

inline GameSpec Scenario::game() const {
  if (builtin == builtin::kPaper5) return builtin::paper5_game();
  return detail::game_from_expressions(n_players, action_dim, constraint_dim, costs,
                                       constraints, boxes);
}

namespace detail {

inline int yaml_line(const YAML::Node& node) {
  return node.Mark().line >= 0 ? node.Mark().line + 1 : 0;
}
inline int yaml_column(const YAML::Node& node) {
  return node.Mark().column >= 0 ? node.Mark().column + 1 : 0;
}

[[noreturn]] inline void dimension_error(const YAML::Node& node, const std::string& message) {
  const int line = yaml_line(node);
  throw DimensionError(line > 0 ? "line " + std::to_string(line) + ": " + message : message);
}

[[noreturn]] inline void schema_error(const YAML::Node& node, const std::string& message) {
  throw ParseError(message, yaml_line(node), yaml_column(node));
}

template <class T>
T scalar(const YAML::Node& node, const std::string& what) {
  if (!node.IsScalar()) schema_error(node, what + " must be a scalar");
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    schema_error(node, what + " has the wrong type");
  }
}

inline Vector vector_of(const YAML::Node& node, const std::string& what) {
  if (!node.IsSequence()) schema_error(node, what + " must be a list of numbers");
  Vector out(static_cast<Eigen::Index>(node.size()));
  for (std::size_t k = 0; k < node.size(); ++k) {
    out(static_cast<Eigen::Index>(k)) = scalar<double>(node[k], what);
  }
  return out;
}

inline Expression expression_of(const YAML::Node& node, const std::string& what) {
  const std::string text = scalar<std::string>(node, what);
  try {
    return Expression::parse(text);
  } catch (const ParseError& e) {
    // Quoted scalars start one column before their content.
    const int quote = node.Tag() == "!" ? 1 : 0;
    throw ParseError(what + ": " + e.message(), yaml_line(node),
                     yaml_column(node) + quote + e.column() - 1);
  }
}

inline void check_variables(const YAML::Node& node, const Expression& e, int n, int d,
                            int owner, bool own_only, const std::string& what) {
  for (const auto& v : e.variables()) {
    if (v.player >= n) {
      dimension_error(node, what + " references player " + std::to_string(v.player + 1) +
                                " of " + std::to_string(n));
    }
    if (v.component >= d) {
      dimension_error(node, what + " references component " +
                                std::to_string(v.component + 1) + " of " + std::to_string(d));
    }
    if (own_only && v.player != owner) {
      dimension_error(node, what + " may only depend on player " + std::to_string(owner + 1) +
                                "'s own action");
    }
  }
}

inline void read_solver(const YAML::Node& node, SolverConfig& cfg) {
  if (!node) return;
  if (!node.IsMap()) schema_error(node, "solver must be a mapping");
  if (node["dt"]) cfg.dt = scalar<double>(node["dt"], "solver.dt");
  if (node["horizon"]) cfg.horizon = scalar<double>(node["horizon"], "solver.horizon");
  if (node["k_mu"]) cfg.k_mu = scalar<double>(node["k_mu"], "solver.k_mu");
  if (node["gain_cap"]) cfg.gain_cap = scalar<double>(node["gain_cap"], "solver.gain_cap");
  if (node["mode"]) cfg.mode = parse_mode(scalar<std::string>(node["mode"], "solver.mode"));
  if (node["seed"]) cfg.seed = scalar<std::uint64_t>(node["seed"], "solver.seed");
  if (node["sample_stride"]) {
    cfg.sample_stride = scalar<int>(node["sample_stride"], "solver.sample_stride");
  }
}

inline void read_trigger(const YAML::Node& node, TriggerConfig& cfg) {
  if (!node) return;
  if (!node.IsMap()) schema_error(node, "trigger must be a mapping");
  if (node["beta0"]) cfg.beta0 = scalar<double>(node["beta0"], "trigger.beta0");
  if (node["gamma0"]) cfg.gamma0 = scalar<double>(node["gamma0"], "trigger.gamma0");
}

inline void read_topology(const YAML::Node& node, Scenario& s) {
  if (!node) return;
  if (!node.IsMap()) schema_error(node, "topology must be a mapping");
  if (node["kind"]) {
    const auto kind = scalar<std::string>(node["kind"], "topology.kind");
    if (kind == "ring") s.topology_kind = TopologyKind::kRing;
    else if (kind == "path") s.topology_kind = TopologyKind::kPath;
    else if (kind == "complete") s.topology_kind = TopologyKind::kComplete;
    else if (kind == "edges") s.topology_kind = TopologyKind::kEdges;
    else schema_error(node["kind"], "unknown topology kind '" + kind + "'");
  }
  if (node["edges"]) {
    s.topology_kind = TopologyKind::kEdges;
    const YAML::Node edges = node["edges"];
    if (!edges.IsSequence()) schema_error(edges, "topology.edges must be a list");
    s.edges.clear();
    for (const auto& e : edges) {
      if (!e.IsSequence() || e.size() < 2 || e.size() > 3) {
        schema_error(e, "edge must be [from, to] or [from, to, weight]");
      }
      const int from = scalar<int>(e[0], "edge endpoint");
      const int to = scalar<int>(e[1], "edge endpoint");
      const double w = e.size() == 3 ? scalar<double>(e[2], "edge weight") : 1.0;
      if (from < 1 || from > s.n_players || to < 1 || to > s.n_players) {
        dimension_error(e, "edge references a player outside 1.." + std::to_string(s.n_players));
      }
      s.edges.push_back({from - 1, to - 1, w});
    }
  }
}

inline void read_initial(const YAML::Node& node, Scenario& s) {
  if (!node) return;
  if (!node.IsMap()) schema_error(node, "initial must be a mapping");
  const int n = s.n_players, d = s.action_dim;
  if (node["x"]) {
    const YAML::Node xs = node["x"];
    if (!xs.IsSequence() || static_cast<int>(xs.size()) != n) {
      dimension_error(xs, "initial.x needs one entry per player");
    }
    Vector x(n * d);
    for (int i = 0; i < n; ++i) {
      const Vector xi = vector_of(xs[i], "initial.x entry");
      if (xi.size() != d) dimension_error(xs[i], "initial.x entry has the wrong length");
      x.segment(i * d, d) = xi;
    }
    s.initial.actions = x;
  }
  if (node["uniform"]) {
    const YAML::Node u = node["uniform"];
    if (!u.IsMap() || !u["lower"] || !u["upper"]) {
      schema_error(u, "initial.uniform needs lower and upper");
    }
    s.initial.uniform_lower = vector_of(u["lower"], "initial.uniform.lower");
    s.initial.uniform_upper = vector_of(u["upper"], "initial.uniform.upper");
    if (s.initial.uniform_lower.size() != d || s.initial.uniform_upper.size() != d) {
      dimension_error(u, "initial.uniform bounds must have length action_dim");
    }
  }
  if (node["project"]) s.initial.project = scalar<bool>(node["project"], "initial.project");
  if (node["estimates"]) {
    const YAML::Node es = node["estimates"];
    if (!es.IsSequence() || static_cast<int>(es.size()) != n) {
      dimension_error(es, "initial.estimates needs one entry per player");
    }
    std::vector<Vector> out;
    for (int i = 0; i < n; ++i) {
      out.push_back(vector_of(es[i], "initial.estimates entry"));
      if (out.back().size() != n * d) {
        dimension_error(es[i], "initial.estimates entry must have length N*d");
      }
    }
    s.initial.estimates = out;
  }
}

inline void apply_paper5(Scenario& s) {
  s.builtin = builtin::kPaper5;
  s.n_players = 5;
  s.action_dim = 2;
  s.constraint_dim = 1;
  s.boxes.assign(5, BoxSet::uniform(2, -1.0, 6.0));
  const auto forms = builtin::paper5_expressions();
  s.costs.clear();
  s.constraints.clear();
  for (int i = 0; i < 5; ++i) {
    s.costs.push_back(Expression::parse(forms.costs[i]));
    s.constraints.push_back({Expression::parse(forms.constraints[i][0])});
  }
  s.topology_kind = TopologyKind::kRing;
  s.initial = {};
  s.initial.uniform_lower = Vector::Constant(2, -5.0);
  s.initial.uniform_upper = Vector::Constant(2, 0.0);
  s.initial.project = true;
  s.solver = {};
  s.solver.k_mu = 10.0;
  s.trigger = {};
}

}  // namespace detail

/// The built-in example with its default settings.
inline Scenario paper5_scenario() {
  Scenario s;
  s.name = builtin::kPaper5;
  detail::apply_paper5(s);
  return s;
}

inline Scenario parse_scenario(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ParseError(e.msg, e.mark.line + 1, e.mark.column + 1);
  }
  if (!root.IsMap()) throw ParseError("scenario must be a YAML mapping", 1, 1);

  Scenario s;
  if (root["builtin"]) {
    const auto id = detail::scalar<std::string>(root["builtin"], "builtin");
    if (id != builtin::kPaper5) detail::schema_error(root["builtin"], "unknown builtin '" + id + "'");
    detail::apply_paper5(s);
    s.name = id;
  } else {
    for (const char* key : {"players", "action_dim", "game"}) {
      if (!root[key]) throw ParseError(std::string("missing required key '") + key + "'", 0, 0);
    }
    s.n_players = detail::scalar<int>(root["players"], "players");
    s.action_dim = detail::scalar<int>(root["action_dim"], "action_dim");
    s.constraint_dim =
        root["constraint_dim"] ? detail::scalar<int>(root["constraint_dim"], "constraint_dim") : 0;
    if (s.n_players < 1 || s.action_dim < 1 || s.constraint_dim < 0) {
      detail::dimension_error(root["players"], "need players >= 1, action_dim >= 1, constraint_dim >= 0");
    }
    const YAML::Node game = root["game"];
    if (!game.IsSequence() || static_cast<int>(game.size()) != s.n_players) {
      detail::dimension_error(game, "game needs one entry per player (" +
                                        std::to_string(s.n_players) + ")");
    }
    for (int i = 0; i < s.n_players; ++i) {
      const YAML::Node p = game[i];
      const std::string who = "player " + std::to_string(i + 1);
      if (!p.IsMap() || !p["cost"]) detail::schema_error(p, who + " needs a cost");
      Expression cost = detail::expression_of(p["cost"], who + " cost");
      detail::check_variables(p["cost"], cost, s.n_players, s.action_dim, i, false, who + " cost");
      s.costs.push_back(cost);

      std::vector<Expression> cons;
      if (p["constraints"]) {
        const YAML::Node cs = p["constraints"];
        if (!cs.IsSequence()) detail::schema_error(cs, who + " constraints must be a list");
        for (const auto& c : cs) {
          Expression e = detail::expression_of(c, who + " constraint");
          detail::check_variables(c, e, s.n_players, s.action_dim, i, true, who + " constraint");
          cons.push_back(e);
        }
      }
      if (static_cast<int>(cons.size()) != s.constraint_dim) {
        detail::dimension_error(p, who + " declares " + std::to_string(cons.size()) +
                                       " constraints, expected " +
                                       std::to_string(s.constraint_dim));
      }
      s.constraints.push_back(cons);

      if (!p["box"] || !p["box"]["lower"] || !p["box"]["upper"]) {
        detail::schema_error(p, who + " needs box.lower and box.upper");
      }
      const Vector lo = detail::vector_of(p["box"]["lower"], who + " box.lower");
      const Vector hi = detail::vector_of(p["box"]["upper"], who + " box.upper");
      if (lo.size() != s.action_dim || hi.size() != s.action_dim) {
        detail::dimension_error(p["box"], who + " box must have length action_dim");
      }
      try {
        s.boxes.emplace_back(lo, hi);
      } catch (const DimensionError& e) {
        detail::dimension_error(p["box"], e.what());
      }
    }
    // Default initial condition: box centers.
    s.initial.uniform_lower.resize(s.action_dim);
    s.initial.uniform_upper.resize(s.action_dim);
    Vector centers(s.n_players * s.action_dim);
    for (int i = 0; i < s.n_players; ++i) {
      centers.segment(i * s.action_dim, s.action_dim) = s.boxes[i].center();
    }
    s.initial.actions = centers;
  }
  if (root["name"]) s.name = detail::scalar<std::string>(root["name"], "name");
  detail::read_topology(root["topology"], s);
  if (root["initial"]) {
    // An explicit uniform section replaces the default explicit start.
    if (root["initial"]["uniform"] && !root["initial"]["x"]) s.initial.actions.reset();
    detail::read_initial(root["initial"], s);
  }
  detail::read_solver(root["solver"], s.solver);
  detail::read_trigger(root["trigger"], s.trigger);
  return s;
}

/// Loads a scenario file, or a built-in by id.
inline Scenario load_scenario(const std::string& path_or_id) {
  if (path_or_id == builtin::kPaper5) return paper5_scenario();
  std::ifstream in(path_or_id);
  if (!in) throw Error("cannot open scenario file '" + path_or_id + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

namespace detail {

inline std::string number(double v) {
  if (std::isinf(v)) return v > 0 ? ".inf" : "-.inf";
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

inline std::string flow_list(const Vector& v) {
  std::string out = "[";
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    if (k) out += ", ";
    out += number(v(k));
  }
  return out + "]";
}

inline std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

}  // namespace detail

/// Writes a scenario back to YAML. Built-in games are written by id unless
/// `expand_builtin` is set, in which case their expressions are spelled out.
inline std::string serialize_scenario(const Scenario& s, bool expand_builtin = false) {
  using detail::number;
  std::ostringstream os;
  os << "name: " << detail::quoted(s.name) << "\n";
  if (!s.builtin.empty() && !expand_builtin) {
    os << "builtin: " << s.builtin << "\n";
  } else {
    os << "players: " << s.n_players << "\n";
    os << "action_dim: " << s.action_dim << "\n";
    os << "constraint_dim: " << s.constraint_dim << "\n";
    os << "game:\n";
    for (int i = 0; i < s.n_players; ++i) {
      os << "  - cost: " << detail::quoted(s.costs[i].to_string()) << "\n";
      os << "    constraints: [";
      for (std::size_t j = 0; j < s.constraints[i].size(); ++j) {
        if (j) os << ", ";
        os << detail::quoted(s.constraints[i][j].to_string());
      }
      os << "]\n";
      os << "    box: {lower: " << detail::flow_list(s.boxes[i].lower())
         << ", upper: " << detail::flow_list(s.boxes[i].upper()) << "}\n";
    }
  }
  os << "topology:\n";
  switch (s.topology_kind) {
    case TopologyKind::kRing: os << "  kind: ring\n"; break;
    case TopologyKind::kPath: os << "  kind: path\n"; break;
    case TopologyKind::kComplete: os << "  kind: complete\n"; break;
    case TopologyKind::kEdges:
      os << "  edges:\n";
      for (const auto& e : s.edges) {
        os << "    - [" << e.from + 1 << ", " << e.to + 1 << ", " << number(e.weight) << "]\n";
      }
      break;
  }
  os << "initial:\n";
  if (s.initial.actions) {
    os << "  x:\n";
    for (int i = 0; i < s.n_players; ++i) {
      os << "    - "
         << detail::flow_list(s.initial.actions->segment(i * s.action_dim, s.action_dim)) << "\n";
    }
  } else {
    os << "  uniform: {lower: " << detail::flow_list(s.initial.uniform_lower)
       << ", upper: " << detail::flow_list(s.initial.uniform_upper) << "}\n";
  }
  os << "  project: " << (s.initial.project ? "true" : "false") << "\n";
  if (s.initial.estimates) {
    os << "  estimates:\n";
    for (const auto& e : *s.initial.estimates) os << "    - " << detail::flow_list(e) << "\n";
  }
  const auto& c = s.solver;
  os << "solver:\n"
     << "  dt: " << number(c.dt) << "\n"
     << "  horizon: " << number(c.horizon) << "\n"
     << "  k_mu: " << number(c.k_mu) << "\n"
     << "  gain_cap: " << number(c.gain_cap) << "\n"
     << "  mode: " << to_string(c.mode) << "\n"
     << "  seed: " << c.seed << "\n"
     << "  sample_stride: " << c.sample_stride << "\n";
  os << "trigger:\n"
     << "  beta0: " << number(s.trigger.beta0) << "\n"
     << "  gamma0: " << number(s.trigger.gamma0) << "\n";
  return os.str();
}

/// 64-bit FNV-1a digest, printed as 16 hex digits.
inline std::string content_hash(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

}  // namespace gne

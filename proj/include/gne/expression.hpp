#pragma once

// Expression language used by scenario files for costs and constraints:
//
//   expr    := term (('+' | '-') term)*
//   term    := unary ('*' unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' integer)?
//   primary := number | 't' | variable | ('sin' | 'cos') '(' expr ')' | '(' expr ')'
//
// Variables name action components: x<i>_<k> (1-based player and component),
// x<i><letter> with a = component 1, or plain x<i> for scalar actions.

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>

#include "gne/errors.hpp"

namespace gne {

class Expression {
 public:
  enum class Kind { kConstant, kTime, kVariable, kAdd, kSub, kMul, kNeg, kPow, kSin, kCos };

  /// A variable reference; both indices are 0-based.
  struct Variable {
    int player = 0;
    int component = 0;
    bool operator<(const Variable& o) const {
      return player != o.player ? player < o.player : component < o.component;
    }
    bool operator==(const Variable& o) const {
      return player == o.player && component == o.component;
    }
  };

  Expression() : Expression(constant(0.0)) {}

  static Expression parse(std::string_view text);

  static Expression constant(double v) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::kConstant;
    n->value = v;
    return Expression(std::move(n));
  }
  static Expression time() {
    auto n = std::make_shared<Node>();
    n->kind = Kind::kTime;
    return Expression(std::move(n));
  }
  static Expression variable(int player, int component) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::kVariable;
    n->var = {player, component};
    return Expression(std::move(n));
  }

  Kind kind() const { return node_->kind; }
  bool is_constant(double v) const {
    return node_->kind == Kind::kConstant && node_->value == v;
  }

  /// Evaluates with `lookup(player, component)` supplying variable values.
  template <class Lookup>
  double evaluate(double t, Lookup&& lookup) const {
    return eval(*node_, t, lookup);
  }

  /// Partial derivative with respect to one action component.
  Expression derivative(const Variable& v) const { return Expression(diff(node_, v)); }

  std::set<Variable> variables() const {
    std::set<Variable> out;
    collect(*node_, out);
    return out;
  }

  /// Canonical text; parse(to_string()) evaluates identically.
  std::string to_string() const { return print(*node_, 0); }

  friend Expression operator+(const Expression& a, const Expression& b) {
    return Expression(make_binary(Kind::kAdd, a.node_, b.node_));
  }
  friend Expression operator-(const Expression& a, const Expression& b) {
    return Expression(make_binary(Kind::kSub, a.node_, b.node_));
  }
  friend Expression operator*(const Expression& a, const Expression& b) {
    return Expression(make_binary(Kind::kMul, a.node_, b.node_));
  }

 private:
  struct Node;
  using NodePtr = std::shared_ptr<const Node>;

  struct Node {
    Kind kind = Kind::kConstant;
    double value = 0.0;
    Variable var;
    int exponent = 0;
    NodePtr lhs;
    NodePtr rhs;
  };

  explicit Expression(NodePtr node) : node_(std::move(node)) {}

  static bool is_const(const NodePtr& n, double v) {
    return n->kind == Kind::kConstant && n->value == v;
  }

  static NodePtr make_constant(double v) { return constant(v).node_; }

  static NodePtr make_unary(Kind kind, NodePtr a) {
    if (a->kind == Kind::kConstant) {
      const double v = a->value;
      switch (kind) {
        case Kind::kNeg: return make_constant(-v);
        case Kind::kSin: return make_constant(std::sin(v));
        case Kind::kCos: return make_constant(std::cos(v));
        default: break;
      }
    }
    if (kind == Kind::kNeg && a->kind == Kind::kNeg) return a->lhs;
    auto n = std::make_shared<Node>();
    n->kind = kind;
    n->lhs = std::move(a);
    return n;
  }

  static NodePtr make_pow(NodePtr a, int exponent) {
    if (exponent == 0) return make_constant(1.0);
    if (exponent == 1) return a;
    if (a->kind == Kind::kConstant) return make_constant(std::pow(a->value, exponent));
    auto n = std::make_shared<Node>();
    n->kind = Kind::kPow;
    n->lhs = std::move(a);
    n->exponent = exponent;
    return n;
  }

  // Light algebraic simplification so derivatives stay readable.
  static NodePtr make_binary(Kind kind, NodePtr a, NodePtr b) {
    if (a->kind == Kind::kConstant && b->kind == Kind::kConstant) {
      switch (kind) {
        case Kind::kAdd: return make_constant(a->value + b->value);
        case Kind::kSub: return make_constant(a->value - b->value);
        case Kind::kMul: return make_constant(a->value * b->value);
        default: break;
      }
    }
    switch (kind) {
      case Kind::kAdd:
        if (is_const(a, 0.0)) return b;
        if (is_const(b, 0.0)) return a;
        break;
      case Kind::kSub:
        if (is_const(b, 0.0)) return a;
        if (is_const(a, 0.0)) return make_unary(Kind::kNeg, b);
        break;
      case Kind::kMul:
        if (is_const(a, 0.0) || is_const(b, 0.0)) return make_constant(0.0);
        if (is_const(a, 1.0)) return b;
        if (is_const(b, 1.0)) return a;
        break;
      default: break;
    }
    auto n = std::make_shared<Node>();
    n->kind = kind;
    n->lhs = std::move(a);
    n->rhs = std::move(b);
    return n;
  }

  template <class Lookup>
  static double eval(const Node& n, double t, Lookup& lookup) {
    switch (n.kind) {
      case Kind::kConstant: return n.value;
      case Kind::kTime: return t;
      case Kind::kVariable: return lookup(n.var.player, n.var.component);
      case Kind::kAdd: return eval(*n.lhs, t, lookup) + eval(*n.rhs, t, lookup);
      case Kind::kSub: return eval(*n.lhs, t, lookup) - eval(*n.rhs, t, lookup);
      case Kind::kMul: return eval(*n.lhs, t, lookup) * eval(*n.rhs, t, lookup);
      case Kind::kNeg: return -eval(*n.lhs, t, lookup);
      case Kind::kPow: {
        const double base = eval(*n.lhs, t, lookup);
        double acc = 1.0;
        for (int e = 0; e < n.exponent; ++e) acc *= base;
        return acc;
      }
      case Kind::kSin: return std::sin(eval(*n.lhs, t, lookup));
      case Kind::kCos: return std::cos(eval(*n.lhs, t, lookup));
    }
    return 0.0;
  }

  static NodePtr diff(const NodePtr& n, const Variable& v) {
    switch (n->kind) {
      case Kind::kConstant:
      case Kind::kTime: return make_constant(0.0);
      case Kind::kVariable: return make_constant(n->var == v ? 1.0 : 0.0);
      case Kind::kAdd:
      case Kind::kSub: return make_binary(n->kind, diff(n->lhs, v), diff(n->rhs, v));
      case Kind::kMul:
        return make_binary(Kind::kAdd, make_binary(Kind::kMul, diff(n->lhs, v), n->rhs),
                           make_binary(Kind::kMul, n->lhs, diff(n->rhs, v)));
      case Kind::kNeg: return make_unary(Kind::kNeg, diff(n->lhs, v));
      case Kind::kPow:
        return make_binary(
            Kind::kMul,
            make_binary(Kind::kMul, make_constant(n->exponent), make_pow(n->lhs, n->exponent - 1)),
            diff(n->lhs, v));
      case Kind::kSin:
        return make_binary(Kind::kMul, make_unary(Kind::kCos, n->lhs), diff(n->lhs, v));
      case Kind::kCos:
        return make_unary(Kind::kNeg, make_binary(Kind::kMul, make_unary(Kind::kSin, n->lhs),
                                                  diff(n->lhs, v)));
    }
    return make_constant(0.0);
  }

  static void collect(const Node& n, std::set<Variable>& out) {
    if (n.kind == Kind::kVariable) out.insert(n.var);
    if (n.lhs) collect(*n.lhs, out);
    if (n.rhs) collect(*n.rhs, out);
  }

  // Precedence levels: 1 additive, 2 multiplicative, 3 unary minus, 4 power.
  static std::string print(const Node& n, int context) {
    auto wrap = [&](std::string s, int own) {
      return own < context ? "(" + s + ")" : s;
    };
    switch (n.kind) {
      case Kind::kConstant: {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", std::abs(n.value));
        return n.value < 0 || std::signbit(n.value) ? wrap("-" + std::string(buf), 3)
                                                    : std::string(buf);
      }
      case Kind::kTime: return "t";
      case Kind::kVariable:
        return "x" + std::to_string(n.var.player + 1) + "_" +
               std::to_string(n.var.component + 1);
      case Kind::kAdd: return wrap(print(*n.lhs, 1) + " + " + print(*n.rhs, 2), 1);
      case Kind::kSub: return wrap(print(*n.lhs, 1) + " - " + print(*n.rhs, 2), 1);
      case Kind::kMul: return wrap(print(*n.lhs, 2) + "*" + print(*n.rhs, 3), 2);
      case Kind::kNeg: return wrap("-" + print(*n.lhs, 3), 3);
      case Kind::kPow:
        return wrap(print(*n.lhs, 5) + "^" + std::to_string(n.exponent), 4);
      case Kind::kSin: return "sin(" + print(*n.lhs, 0) + ")";
      case Kind::kCos: return "cos(" + print(*n.lhs, 0) + ")";
    }
    return "";
  }

  class Parser;

  NodePtr node_;
};

class Expression::Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  NodePtr parse() {
    NodePtr out = expr();
    skip_space();
    if (pos_ < text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return out;
  }

 private:
  [[noreturn]] void fail(const std::string& message) const {
    throw ParseError(message, 0, static_cast<int>(pos_) + 1);
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) {
      fail(pos_ < text_.size() ? "expected '" + std::string(1, c) + "'"
                               : "expected '" + std::string(1, c) + "' before end of input");
    }
  }

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = make_binary(Kind::kAdd, lhs, term());
      } else if (accept('-')) {
        lhs = make_binary(Kind::kSub, lhs, term());
      } else {
        return lhs;
      }
    }
  }

  NodePtr term() {
    NodePtr lhs = unary();
    while (accept('*')) lhs = make_binary(Kind::kMul, lhs, unary());
    return lhs;
  }

  NodePtr unary() {
    if (accept('-')) return make_unary(Kind::kNeg, unary());
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (accept('^')) {
      skip_space();
      const std::size_t start = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      if (start == pos_) fail("exponent must be a nonnegative integer");
      const int e = std::stoi(std::string(text_.substr(start, pos_ - start)));
      return make_pow(base, e);
    }
    return base;
  }

  NodePtr primary() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    const char c = text_[pos_];
    if (accept('(')) {
      NodePtr inner = expr();
      expect(')');
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
    fail("unexpected '" + std::string(1, c) + "'");
  }

  NodePtr number() {
    const std::string rest(text_.substr(pos_));
    char* end = nullptr;
    const double v = std::strtod(rest.c_str(), &end);
    if (end == rest.c_str()) fail("malformed number");
    pos_ += static_cast<std::size_t>(end - rest.c_str());
    return make_constant(v);
  }

  NodePtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
    }
    const std::string name(text_.substr(start, pos_ - start));
    if (name == "t") return Expression::time().node_;
    if (name == "sin" || name == "cos") {
      expect('(');
      NodePtr arg = expr();
      expect(')');
      return make_unary(name == "sin" ? Kind::kSin : Kind::kCos, arg);
    }
    if (auto var = parse_variable(name)) {
      return Expression::variable(var->player, var->component).node_;
    }
    pos_ = start;
    fail("unknown identifier '" + name + "'");
  }

  static std::optional<Variable> parse_variable(const std::string& name) {
    if (name.size() < 2 || name[0] != 'x') return std::nullopt;
    std::size_t p = 1;
    while (p < name.size() && std::isdigit(static_cast<unsigned char>(name[p]))) ++p;
    if (p == 1) return std::nullopt;
    const int player = std::stoi(name.substr(1, p - 1));
    if (player < 1) return std::nullopt;
    if (p == name.size()) return Variable{player - 1, 0};
    if (name[p] == '_') {
      const std::string comp = name.substr(p + 1);
      if (comp.empty() || comp.find_first_not_of("0123456789") != std::string::npos) {
        return std::nullopt;
      }
      const int k = std::stoi(comp);
      if (k < 1) return std::nullopt;
      return Variable{player - 1, k - 1};
    }
    if (p + 1 == name.size() && std::islower(static_cast<unsigned char>(name[p]))) {
      return Variable{player - 1, name[p] - 'a'};
    }
    return std::nullopt;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

inline Expression Expression::parse(std::string_view text) {
  return Expression(Parser(text).parse());
}

}  // namespace gne

#pragma once

#include <stdexcept>
#include <string>

namespace gne {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DisconnectedGraph : public Error {
 public:
  explicit DisconnectedGraph(double lambda2)
      : Error("communication graph is disconnected (lambda2 = " +
              std::to_string(lambda2) + ")"),
        lambda2_(lambda2) {}
  double lambda2() const { return lambda2_; }

 private:
  double lambda2_;
};

class InfeasiblePoint : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class NumericalBlowup : public Error {
 public:
  NumericalBlowup(int player, std::string term, double time)
      : Error("non-finite value in " + term + " of player " +
              std::to_string(player + 1) + " at t=" + std::to_string(time)),
        player_(player),
        term_(std::move(term)),
        time_(time) {}

  int player() const { return player_; }
  const std::string& term() const { return term_; }
  double time() const { return time_; }

 private:
  int player_;
  std::string term_;
  double time_;
};

class FloorViolated : public Error {
 public:
  using Error::Error;
};

class NoConvergence : public Error {
 public:
  NoConvergence(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

// Raised by the scenario and expression parsers. Line and column are 1-based;
// zero means unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, int line, int column)
      : Error(format(message, line, column)),
        message_(message),
        line_(line),
        column_(column) {}

  const std::string& message() const { return message_; }
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  static std::string format(const std::string& message, int line, int column) {
    std::string where;
    if (line > 0) where += "line " + std::to_string(line);
    if (column > 0) {
      if (!where.empty()) where += ", ";
      where += "column " + std::to_string(column);
    }
    return where.empty() ? message : where + ": " + message;
  }

  std::string message_;
  int line_;
  int column_;
};

}  // namespace gne

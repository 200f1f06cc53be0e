#pragma once

// Undirected weighted communication graph and its Laplacian spectrum.

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "gne/errors.hpp"

namespace gne {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Threshold on the algebraic connectivity below which a graph is treated as
/// disconnected.
inline constexpr double kConnectivityTol = 1e-9;

struct Edge {
  int from = 0;  // 0-based
  int to = 0;
  double weight = 1.0;
};

class Topology {
 public:
  /// Takes a symmetric nonnegative adjacency matrix with zero diagonal.
  explicit Topology(Matrix weights) : weights_(std::move(weights)) {
    if (weights_.rows() != weights_.cols() || weights_.rows() == 0) {
      throw DimensionError("adjacency matrix must be square and nonempty");
    }
    const auto n = weights_.rows();
    for (Eigen::Index i = 0; i < n; ++i) {
      if (weights_(i, i) != 0.0) {
        throw DimensionError("adjacency matrix must have a zero diagonal");
      }
      for (Eigen::Index j = 0; j < n; ++j) {
        const double a = weights_(i, j);
        if (!std::isfinite(a) || a < 0.0) {
          throw DimensionError("edge weights must be finite and nonnegative");
        }
        if (a != weights_(j, i)) {
          throw DimensionError("adjacency matrix must be symmetric");
        }
      }
    }
  }

  static Topology from_edges(int n_players, const std::vector<Edge>& edges) {
    if (n_players <= 0) throw DimensionError("graph needs at least one node");
    Matrix a = Matrix::Zero(n_players, n_players);
    for (const auto& e : edges) {
      if (e.from < 0 || e.from >= n_players || e.to < 0 || e.to >= n_players) {
        throw DimensionError("edge (" + std::to_string(e.from + 1) + ", " +
                             std::to_string(e.to + 1) +
                             ") references a node outside 1.." +
                             std::to_string(n_players));
      }
      if (e.from == e.to) throw DimensionError("self loops are not allowed");
      if (!(e.weight > 0.0)) throw DimensionError("edge weights must be positive");
      a(e.from, e.to) = e.weight;
      a(e.to, e.from) = e.weight;
    }
    return Topology(std::move(a));
  }

  static Topology ring(int n_players) {
    std::vector<Edge> edges;
    if (n_players == 2) {
      edges.push_back({0, 1, 1.0});
    } else {
      for (int i = 0; i < n_players && n_players > 2; ++i) {
        edges.push_back({i, (i + 1) % n_players, 1.0});
      }
    }
    return from_edges(n_players, edges);
  }

  static Topology path(int n_players) {
    std::vector<Edge> edges;
    for (int i = 0; i + 1 < n_players; ++i) edges.push_back({i, i + 1, 1.0});
    return from_edges(n_players, edges);
  }

  static Topology complete(int n_players) {
    std::vector<Edge> edges;
    for (int i = 0; i < n_players; ++i) {
      for (int j = i + 1; j < n_players; ++j) edges.push_back({i, j, 1.0});
    }
    return from_edges(n_players, edges);
  }

  int size() const { return static_cast<int>(weights_.rows()); }
  double weight(int i, int j) const { return weights_(i, j); }
  const Matrix& weights() const { return weights_; }
  double degree(int i) const { return weights_.row(i).sum(); }

  /// Edges with i < j, in row-major order.
  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    for (int i = 0; i < size(); ++i) {
      for (int j = i + 1; j < size(); ++j) {
        if (weights_(i, j) > 0.0) out.push_back({i, j, weights_(i, j)});
      }
    }
    return out;
  }

 private:
  Matrix weights_;
};

struct LaplacianData {
  Matrix laplacian;  // L = D - A
  Vector degrees;
  double lambda2 = 0.0;
};

/// Builds L = D - A and its algebraic connectivity. Throws DisconnectedGraph
/// when lambda2 <= kConnectivityTol. A single node is reported with
/// lambda2 = +inf since there is nothing to disagree about.
inline LaplacianData build_laplacian(const Topology& topology) {
  LaplacianData out;
  const Matrix& a = topology.weights();
  out.degrees = a.rowwise().sum();
  out.laplacian = -a;
  out.laplacian.diagonal() = out.degrees;

  if (topology.size() == 1) {
    out.lambda2 = std::numeric_limits<double>::infinity();
    return out;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(out.laplacian,
                                               Eigen::EigenvaluesOnly);
  out.lambda2 = solver.eigenvalues()(1);
  if (!(out.lambda2 > kConnectivityTol)) throw DisconnectedGraph(out.lambda2);
  return out;
}

/// Neighbors {j : a_ij > 0} of node i, ascending. Indices are 0-based.
inline std::vector<int> neighbor_set(const Topology& topology, int i) {
  if (i < 0 || i >= topology.size()) {
    throw DimensionError("player index " + std::to_string(i + 1) +
                         " out of range 1.." + std::to_string(topology.size()));
  }
  std::vector<int> out;
  for (int j = 0; j < topology.size(); ++j) {
    if (topology.weight(i, j) > 0.0) out.push_back(j);
  }
  return out;
}

}  // namespace gne

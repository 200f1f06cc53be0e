#pragma once

// Online game definition: cost and constraint oracles over private boxes,
// plus the projection operators the seeking dynamics are built from.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gne/errors.hpp"
#include "gne/graph.hpp"
#include "gne/random.hpp"

namespace gne {

/// A coordinate is treated as sitting on a face of the box when it is within
/// this distance of it.
inline constexpr double kBoundTol = 1e-12;

class BoxSet {
 public:
  BoxSet(Vector lower, Vector upper)
      : lower_(std::move(lower)), upper_(std::move(upper)) {
    if (lower_.size() != upper_.size() || lower_.size() == 0) {
      throw DimensionError("box bounds must be nonempty and of equal length");
    }
    for (Eigen::Index k = 0; k < lower_.size(); ++k) {
      if (!(lower_(k) < upper_(k))) {
        throw DimensionError("box lower bound must be below upper bound");
      }
    }
  }

  static BoxSet uniform(int dim, double lo, double hi) {
    return BoxSet(Vector::Constant(dim, lo), Vector::Constant(dim, hi));
  }

  int dim() const { return static_cast<int>(lower_.size()); }
  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }
  Vector center() const { return 0.5 * (lower_ + upper_); }

  bool contains(const Vector& x, double tol = kBoundTol) const {
    if (x.size() != lower_.size()) return false;
    return ((x - lower_).array() >= -tol).all() &&
           ((upper_ - x).array() >= -tol).all();
  }

 private:
  Vector lower_;
  Vector upper_;
};

/// Projection of v onto the tangent cone of the box at x. Components pushing
/// outward through an active face are zeroed.
inline Vector tangent_projection(const BoxSet& box, const Vector& x,
                                 const Vector& v) {
  if (x.size() != box.dim() || v.size() != box.dim()) {
    throw DimensionError("tangent_projection: dimension mismatch");
  }
  if (!box.contains(x)) {
    throw InfeasiblePoint("tangent_projection: point lies outside the box");
  }
  Vector out = v;
  for (int k = 0; k < box.dim(); ++k) {
    if (x(k) - box.lower()(k) <= kBoundTol) out(k) = std::max(out(k), 0.0);
    if (box.upper()(k) - x(k) <= kBoundTol) out(k) = std::min(out(k), 0.0);
  }
  return out;
}

/// Tangent-cone projection for the nonnegative orthant at mu.
inline Vector orthant_tangent_projection(const Vector& mu, const Vector& w) {
  if (mu.size() != w.size()) {
    throw DimensionError("orthant_tangent_projection: dimension mismatch");
  }
  Vector out = w;
  for (Eigen::Index k = 0; k < mu.size(); ++k) {
    if (mu(k) < 0.0) {
      throw InfeasiblePoint("orthant_tangent_projection: negative multiplier");
    }
    if (mu(k) == 0.0) out(k) = std::max(out(k), 0.0);
  }
  return out;
}

inline Vector box_projection(const BoxSet& box, const Vector& y) {
  if (y.size() != box.dim()) {
    throw DimensionError("box_projection: dimension mismatch");
  }
  return y.cwiseMax(box.lower()).cwiseMin(box.upper());
}

inline double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

inline Vector sgn(const Vector& v) { return v.unaryExpr(&sign); }

/// Cost and constraint oracles of an N-player online game. Every player owns
/// an action block of length d; the full profile is the player-major stack of
/// those blocks (length N*d). Each player contributes a q-vector to the shared
/// coupling constraint sum_i g_i(t, x_i) <= 0.
struct GameSpec {
  using GradientFn = std::function<Vector(int, double, const Vector&)>;
  using CostFn = std::function<double(int, double, const Vector&)>;
  using ConstraintFn = std::function<Vector(int, double, const Vector&)>;
  using JacobianFn = std::function<Matrix(int, double, const Vector&)>;

  int n_players = 0;
  int action_dim = 0;
  int constraint_dim = 0;

  // (i, t, profile) -> partial gradient of J_i w.r.t. x_i, length d. The
  // profile is player i's estimate of every action.
  GradientFn cost_gradient;
  // (i, t, profile) -> J_i(t, x_i, x_-i)
  CostFn cost_value;
  // (i, t, x_i) -> g_i(t, x_i), length q
  ConstraintFn constraint_value;
  // (i, t, x_i) -> q x d Jacobian of g_i
  JacobianFn constraint_jacobian;

  std::vector<BoxSet> boxes;

  int profile_dim() const { return n_players * action_dim; }

  void validate() const {
    if (n_players <= 0 || action_dim <= 0 || constraint_dim < 0) {
      throw DimensionError("game needs N >= 1, d >= 1, q >= 0");
    }
    if (static_cast<int>(boxes.size()) != n_players) {
      throw DimensionError("game needs one box per player");
    }
    for (const auto& b : boxes) {
      if (b.dim() != action_dim) {
        throw DimensionError("box dimension does not match the action dimension");
      }
    }
    if (!cost_gradient || !cost_value) {
      throw DimensionError("game is missing its cost oracles");
    }
    if (constraint_dim > 0 && (!constraint_value || !constraint_jacobian)) {
      throw DimensionError("game is missing its constraint oracles");
    }
  }

  auto block(Vector& profile, int i) const {
    return profile.segment(i * action_dim, action_dim);
  }
  auto block(const Vector& profile, int i) const {
    return profile.segment(i * action_dim, action_dim);
  }

  Vector constraint(int i, double t, const Vector& xi) const {
    if (constraint_dim == 0) return Vector::Zero(0);
    return constraint_value(i, t, xi);
  }
  Matrix jacobian(int i, double t, const Vector& xi) const {
    if (constraint_dim == 0) return Matrix::Zero(0, action_dim);
    return constraint_jacobian(i, t, xi);
  }

  /// Stacked partial gradients evaluated at the true profile.
  Vector pseudo_gradient(double t, const Vector& profile) const {
    Vector out(profile_dim());
    for (int i = 0; i < n_players; ++i) {
      out.segment(i * action_dim, action_dim) = cost_gradient(i, t, profile);
    }
    return out;
  }

  /// Coupling constraint value sum_i g_i(t, x_i).
  Vector coupling(double t, const Vector& profile) const {
    Vector out = Vector::Zero(constraint_dim);
    for (int i = 0; i < n_players; ++i) {
      out += constraint(i, t, Vector(block(profile, i)));
    }
    return out;
  }

  bool contains(const Vector& profile, double tol = kBoundTol) const {
    for (int i = 0; i < n_players; ++i) {
      if (!boxes[i].contains(Vector(block(profile, i)), tol)) return false;
    }
    return true;
  }

  Vector project(const Vector& profile) const {
    Vector out(profile.size());
    for (int i = 0; i < n_players; ++i) {
      block(out, i) = box_projection(boxes[i], Vector(block(profile, i)));
    }
    return out;
  }

  Vector sample_profile(Sampler& rng) const {
    Vector out(profile_dim());
    for (int i = 0; i < n_players; ++i) {
      block(out, i) = rng.uniform(boxes[i].lower(), boxes[i].upper());
    }
    return out;
  }

  Vector lower() const {
    Vector out(profile_dim());
    for (int i = 0; i < n_players; ++i) block(out, i) = boxes[i].lower();
    return out;
  }
  Vector upper() const {
    Vector out(profile_dim());
    for (int i = 0; i < n_players; ++i) block(out, i) = boxes[i].upper();
    return out;
  }
};

/// Worst relative error between cost_gradient and central differences of
/// cost_value (step 1e-6) at random interior points and times in [0, 1].
inline double gradient_check(const GameSpec& game, int samples,
                             std::uint64_t seed, double step = 1e-6) {
  Sampler rng(seed);
  const Vector lo = game.lower();
  const Vector hi = game.upper();
  // Stay a step away from the faces so the stencil remains inside the box.
  const Vector inner_lo = lo.array() + 2 * step;
  const Vector inner_hi = hi.array() - 2 * step;
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    const Vector x = rng.uniform(inner_lo, inner_hi);
    const double t = rng.uniform();
    for (int i = 0; i < game.n_players; ++i) {
      const Vector analytic = game.cost_gradient(i, t, x);
      Vector numeric(game.action_dim);
      for (int k = 0; k < game.action_dim; ++k) {
        Vector xp = x, xm = x;
        xp(i * game.action_dim + k) += step;
        xm(i * game.action_dim + k) -= step;
        numeric(k) =
            (game.cost_value(i, t, xp) - game.cost_value(i, t, xm)) / (2 * step);
      }
      const double err =
          (analytic - numeric).norm() / std::max(1.0, numeric.norm());
      worst = std::max(worst, err);
    }
  }
  return worst;
}

struct MonotonicityCertificate {
  Vector x;
  Vector y;
  double inner_product = 0.0;  // <F(x) - F(y), x - y>
};

/// Random search for a pair violating monotonicity of the pseudo-gradient at
/// time t. Returns the first pair whose inner product drops below -tol.
inline std::optional<MonotonicityCertificate> monotonicity_probe(
    const GameSpec& game, double t, int samples, std::uint64_t seed,
    double tol = 1e-9) {
  Sampler rng(seed);
  for (int s = 0; s < samples; ++s) {
    const Vector x = game.sample_profile(rng);
    const Vector y = game.sample_profile(rng);
    const double ip =
        (game.pseudo_gradient(t, x) - game.pseudo_gradient(t, y)).dot(x - y);
    if (ip < -tol) return MonotonicityCertificate{x, y, ip};
  }
  return std::nullopt;
}

/// Sampled lower estimates of the constants l, K_f and K_g.
struct LipschitzEstimates {
  double l_hat = 0.0;
  double kf_hat = 0.0;
  double kg_hat = 0.0;
};

namespace detail {

// Box vertices of the full profile. Enumerated exhaustively up to 2^16
// vertices, otherwise `limit` random ones.
inline std::vector<Vector> profile_corners(const GameSpec& game, Sampler& rng,
                                           int limit = 4096) {
  const Vector lo = game.lower();
  const Vector hi = game.upper();
  const auto dim = lo.size();
  std::vector<Vector> out;
  auto corner = [&](std::uint64_t mask) {
    Vector c(dim);
    for (Eigen::Index k = 0; k < dim; ++k) c(k) = (mask >> k) & 1u ? hi(k) : lo(k);
    return c;
  };
  if (dim <= 16) {
    for (std::uint64_t m = 0; m < (std::uint64_t{1} << dim); ++m) {
      out.push_back(corner(m));
    }
  } else {
    for (int s = 0; s < limit; ++s) {
      Vector c(dim);
      for (Eigen::Index k = 0; k < dim; ++k) c(k) = rng.bits() & 1u ? hi(k) : lo(k);
      out.push_back(c);
    }
  }
  return out;
}

}  // namespace detail

/// Scans box vertices and `samples` random profiles at every time of the
/// grid. The results are lower bounds of the true constants.
inline LipschitzEstimates estimate_constants(const GameSpec& game,
                                             const std::vector<double>& time_grid,
                                             int samples, std::uint64_t seed) {
  Sampler rng(seed);
  std::vector<Vector> points = detail::profile_corners(game, rng);
  for (int s = 0; s < samples; ++s) points.push_back(game.sample_profile(rng));

  LipschitzEstimates est;
  for (double t : time_grid) {
    for (const auto& x : points) {
      for (int i = 0; i < game.n_players; ++i) {
        est.kf_hat = std::max(est.kf_hat, std::abs(game.cost_value(i, t, x)));
        if (game.constraint_dim > 0) {
          est.kg_hat = std::max(
              est.kg_hat, game.constraint(i, t, Vector(game.block(x, i))).norm());
        }
      }
    }
  }
  // Difference quotients of each partial gradient over random pairs, with one
  // point of every pair drawn from the vertex set.
  const double t_mid = time_grid.empty() ? 0.0 : time_grid[time_grid.size() / 2];
  for (double t : {time_grid.empty() ? 0.0 : time_grid.front(), t_mid}) {
    for (int s = 0; s < samples; ++s) {
      const Vector& x = points[rng.bits() % points.size()];
      const Vector y = game.sample_profile(rng);
      const double dist = (x - y).norm();
      if (dist < 1e-12) continue;
      for (int i = 0; i < game.n_players; ++i) {
        const double q =
            (game.cost_gradient(i, t, x) - game.cost_gradient(i, t, y)).norm() /
            dist;
        est.l_hat = std::max(est.l_hat, q);
      }
    }
  }
  return est;
}

struct ConvexityReport {
  int segments = 0;
  int violations = 0;
  double worst_gap = 0.0;  // most negative of (J(a)+J(b))/2 - J(mid)
};

/// Midpoint convexity test of each J_i in x_i along random segments with the
/// opponents held fixed.
inline ConvexityReport convexity_spot_check(const GameSpec& game, int segments,
                                            std::uint64_t seed) {
  Sampler rng(seed);
  ConvexityReport report;
  for (int s = 0; s < segments; ++s) {
    const double t = rng.uniform();
    const Vector base = game.sample_profile(rng);
    for (int i = 0; i < game.n_players; ++i) {
      Vector a = base, b = base;
      game.block(b, i) =
          rng.uniform(game.boxes[i].lower(), game.boxes[i].upper());
      Vector mid = 0.5 * (a + b);
      const double gap = 0.5 * (game.cost_value(i, t, a) + game.cost_value(i, t, b)) -
                         game.cost_value(i, t, mid);
      ++report.segments;
      if (gap < -1e-9) ++report.violations;
      report.worst_gap = std::min(report.worst_gap, gap);
    }
  }
  return report;
}

}  // namespace gne

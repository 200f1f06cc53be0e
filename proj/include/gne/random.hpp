#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>

namespace gne {

// Seeded uniform sampler. The double conversion is done by hand so that the
// drawn values do not depend on the standard library's distribution code.
class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : engine_(seed) {}

  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  Eigen::VectorXd uniform(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
    Eigen::VectorXd out(lo.size());
    for (Eigen::Index k = 0; k < lo.size(); ++k) out(k) = uniform(lo(k), hi(k));
    return out;
  }

  std::uint64_t bits() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace gne

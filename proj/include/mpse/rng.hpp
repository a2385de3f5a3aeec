#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <random>

namespace mpse {

// Seeded random source. The mapping from engine output to doubles is done
// by hand so that a given seed produces the same stream on every platform,
// independent of the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t raw() { return engine_(); }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller, one cached value.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 1.0 - uniform();  // (0, 1]
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  // Uniform point in the p-ball of the given radius: Gaussian direction,
  // radius scaled by u^(1/p).
  Eigen::VectorXd ball_point(int p, double radius) {
    Eigen::VectorXd v(p);
    double norm2 = 0.0;
    do {
      for (int k = 0; k < p; ++k) v[k] = normal();
      norm2 = v.squaredNorm();
    } while (norm2 == 0.0);
    double r = radius * std::pow(uniform(), 1.0 / p);
    return v * (r / std::sqrt(norm2));
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace mpse

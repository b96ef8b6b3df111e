#pragma once

#include <cstdint>
#include <random>

namespace betamrf {

// Seeded RNG used everywhere. All draws go through this wrapper so a run is
// fully reproducible given its seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform() {
    std::uniform_real_distribution<double> d(0.0, 1.0);
    return d(gen_);
  }

  double normal() {
    std::normal_distribution<double> d(0.0, 1.0);
    return d(gen_);
  }

  double gamma(double shape) {
    std::gamma_distribution<double> d(shape, 1.0);
    return d(gen_);
  }

  // Beta(a, b) via the two-gamma construction.
  double beta(double a, double b) {
    double x = gamma(a);
    double y = gamma(b);
    return x / (x + y);
  }

  std::mt19937_64& engine() { return gen_; }

 private:
  std::mt19937_64 gen_;
};

}  // namespace betamrf

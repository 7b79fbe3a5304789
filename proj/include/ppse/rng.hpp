#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <random>

#include "ppse/errors.hpp"

namespace ppse {

// Substream identifiers. Each trial derives one independent stream per id so the
// noise sources stay mutually independent and individually reproducible.
namespace stream {
inline constexpr std::uint64_t kProcessNoise = 0;
inline constexpr std::uint64_t kMeasurementNoise = 1;
inline constexpr std::uint64_t kInitialState = 2;
inline constexpr std::uint64_t kUserChannel = 3;
inline constexpr std::uint64_t kWiretapChannel = 4;
inline constexpr std::uint64_t kQuantizer = 5;
inline constexpr std::uint64_t kWithholding = 6;
}  // namespace stream

// splitmix64 finalizer over a golden-ratio keyed sum; bijective in `a` for fixed `b`.
inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + (b + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::uint64_t trial_seed(std::uint64_t base_seed, std::uint64_t trial_index) {
  return mix64(base_seed ^ 0x5EED0000ULL, trial_index);
}

inline std::uint64_t stream_seed(std::uint64_t trial, std::uint64_t stream_id) {
  return mix64(trial, stream_id);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t raw() { return eng_(); }

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  // Standard normal via the polar method; one spare value cached.
  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

  Eigen::VectorXd gaussian_vector(Eigen::Index n) {
    Eigen::VectorXd g(n);
    for (Eigen::Index i = 0; i < n; ++i) g(i) = gaussian();
    return g;
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Index sampled from an (unnormalized-tolerant) probability vector.
  int categorical(const Eigen::VectorXd& probs) {
    if (probs.size() == 0) throw InconsistentInput("categorical: empty probability vector");
    const double total = probs.sum();
    if (!(total > 0.0)) throw InconsistentInput("categorical: probabilities sum to zero");
    double target = uniform() * total;
    for (int i = 0; i < probs.size(); ++i) {
      target -= probs(i);
      if (target < 0.0) return i;
    }
    return static_cast<int>(probs.size()) - 1;
  }

 private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace ppse

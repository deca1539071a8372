#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace netspec {

// SplitMix64 finalizer; the workhorse for turning counters into random bits.
constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  return splitmix64(splitmix64(a) + 0x9e3779b97f4a7c15ULL * (b + 1));
}

constexpr std::uint64_t mix(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  return mix(mix(a, b), c);
}

constexpr std::uint64_t mix(std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t d) {
  return mix(mix(a, b, c), d);
}

inline double bits_to_unit(std::uint64_t bits) {
  // 53 high bits -> [0, 1)
  return static_cast<double>(bits >> 11) * 0x1p-53;
}

// Streams keep env noise, policy exploration, fresh a'-resampling and resets
// on independent counter sequences.
enum NoiseStream : std::uint64_t {
  kStreamEnv = 0,
  kStreamPolicy = 1,
  kStreamAprime = 2,
  kStreamReset = 3,
};

// Counter-based Gaussian/uniform source for one trajectory. A draw is fully
// determined by (seed, episode, t, agent, stream), so trajectories are
// reproducible regardless of agent iteration order or batching.
class NoiseChannel {
 public:
  NoiseChannel(std::uint64_t seed, std::uint64_t episode)
      : base_(mix(seed, 0x6e6f6973ULL, episode)) {}

  double normal(std::uint64_t t, std::uint64_t agent, std::uint64_t stream) const {
    std::uint64_t k = mix(base_, t, agent, stream);
    double u1 = 1.0 - bits_to_unit(splitmix64(k));            // (0, 1]
    double u2 = bits_to_unit(splitmix64(k ^ 0xdeadbeefULL));  // [0, 1)
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  double uniform(std::uint64_t t, std::uint64_t agent, std::uint64_t stream) const {
    return bits_to_unit(splitmix64(mix(base_, t, agent, stream) ^ 0x75ULL));
  }

 private:
  std::uint64_t base_;
};

// Sequential generator for construction-time draws (feature frequencies,
// probe states, ...). Uses mt19937_64 with explicit Box-Muller / scaling
// transforms so the produced sequence is pinned by the standard, not by the
// library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform() { return bits_to_unit(gen_()); }  // [0, 1)

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    double u1 = 1.0 - uniform();  // (0, 1]
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  Eigen::VectorXd normal_vector(int n, double stddev = 1.0) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = stddev * normal();
    return v;
  }

  Eigen::MatrixXd normal_matrix(int rows, int cols, double stddev = 1.0) {
    Eigen::MatrixXd m(rows, cols);
    for (int c = 0; c < cols; ++c)
      for (int r = 0; r < rows; ++r) m(r, c) = stddev * normal();
    return m;
  }

  Eigen::VectorXd uniform_vector(int n, double lo, double hi) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = uniform(lo, hi);
    return v;
  }

  std::uint64_t raw() { return gen_(); }

 private:
  std::mt19937_64 gen_;
};

}  // namespace netspec

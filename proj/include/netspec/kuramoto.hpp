#pragma once

#include <cmath>

#include <Eigen/Dense>

#include "netspec/env.hpp"

namespace netspec {

inline double wrap_phase(double th) {
  return std::remainder(th, 2.0 * M_PI);  // [-pi, pi]
}

// Coupled oscillators on a ring:
//   dθ_i = ω_i + a_i + Σ_{j∈N_i} K_ij sin(θ_j − θ_i)
//   θ_i' = wrap(θ_i + dt·dθ_i + ε_i),   r_i = −|dθ_i − ω_target|
// Couplings K_ij and natural frequencies ω_i are drawn once from param_seed.
struct KuramotoParams {
  int n = 40;
  double dt = 0.01;
  double omega_target = 0.2;
  double amax = 1.0;
  double noise_std = 0.0025;
  double gamma = 0.99;
  double k_lo = 0.2, k_hi = 1.2;   // coupling range
  double w_lo = -0.5, w_hi = 0.5;  // natural-frequency range
  std::uint64_t param_seed = 7;

  // Earlier parameter set kept as a preset: faster target, wider action box.
  static KuramotoParams draft() {
    KuramotoParams p;
    p.n = 20;
    p.omega_target = 0.75;
    p.amax = 3.0;
    p.noise_std = 0.01;
    p.w_lo = 0.0;
    p.w_hi = 1.5;
    return p;
  }
};

class KuramotoEnv {
 public:
  explicit KuramotoEnv(const KuramotoParams& p) : p_(p), topo_(build_ring(p.n)) {
    if (p.dt <= 0) throw ConfigError("kuramoto: dt must be positive");
    if (p.amax <= 0) throw ConfigError("kuramoto: action box must be positive");
    if (p.gamma <= 0 || p.gamma >= 1) throw ConfigError("kuramoto: gamma must lie in (0,1)");
    Rng rng(mix(p.param_seed, 0x6b75ULL));
    k_edge_ = rng.uniform_vector(p.n, p.k_lo, p.k_hi);  // k_edge_[i] couples i and i+1
    omega_ = rng.uniform_vector(p.n, p.w_lo, p.w_hi);
    rbar_ = 0.0;
    for (int i = 0; i < p.n; ++i) {
      double ksum = k_edge_[i] + k_edge_[(i + p.n - 1) % p.n];
      rbar_ = std::max(rbar_, std::abs(omega_[i] - p.omega_target) + p.amax + ksum);
    }
  }

  const Topology& topology() const { return topo_; }
  int n() const { return p_.n; }
  double gamma() const { return p_.gamma; }
  double noise_std() const { return p_.noise_std; }
  double amax() const { return p_.amax; }
  double rbar() const { return rbar_; }
  const KuramotoParams& params() const { return p_; }
  const Eigen::VectorXd& couplings() const { return k_edge_; }
  const Eigen::VectorXd& natural_frequencies() const { return omega_; }

  Eigen::VectorXd thetadot(const Eigen::VectorXd& th, const Eigen::VectorXd& a) const {
    Eigen::VectorXd td(p_.n);
    for (int i = 0; i < p_.n; ++i) {
      int r = (i + 1) % p_.n, l = (i + p_.n - 1) % p_.n;
      td[i] = omega_[i] + a[i] + k_edge_[i] * std::sin(th[r] - th[i]) +
              k_edge_[l] * std::sin(th[l] - th[i]);
    }
    return td;
  }

  Eigen::MatrixXd thetadot(const Eigen::MatrixXd& Th, const Eigen::MatrixXd& A) const {
    Eigen::MatrixXd td(Th.rows(), p_.n);
    for (int i = 0; i < p_.n; ++i) {
      int r = (i + 1) % p_.n, l = (i + p_.n - 1) % p_.n;
      td.col(i) = omega_[i] + A.col(i).array() +
                  k_edge_[i] * (Th.col(r) - Th.col(i)).array().sin() +
                  k_edge_[l] * (Th.col(l) - Th.col(i)).array().sin();
    }
    return td;
  }

  Eigen::VectorXd step_mean(const Eigen::VectorXd& th, const Eigen::VectorXd& a) const {
    return (th + p_.dt * thetadot(th, a)).unaryExpr(&wrap_phase);
  }

  Eigen::MatrixXd step_mean(const Eigen::MatrixXd& Th, const Eigen::MatrixXd& A) const {
    return (Th + p_.dt * thetadot(Th, A)).unaryExpr(&wrap_phase);
  }

  Eigen::VectorXd reward(const Eigen::VectorXd& th, const Eigen::VectorXd& a) const {
    return -(thetadot(th, a).array() - p_.omega_target).abs();
  }

  Eigen::MatrixXd reward(const Eigen::MatrixXd& Th, const Eigen::MatrixXd& A) const {
    return -(thetadot(Th, A).array() - p_.omega_target).abs();
  }

  Eigen::VectorXd add_noise(Eigen::VectorXd mean, const NoiseChannel& ch, long t) const {
    for (int i = 0; i < p_.n; ++i)
      mean[i] = wrap_phase(mean[i] + p_.noise_std * ch.normal(t, i, kStreamEnv));
    return mean;
  }

  Eigen::MatrixXd add_noise_batch(Eigen::MatrixXd mean, std::uint64_t seed, long t) const {
    for (Eigen::Index e = 0; e < mean.rows(); ++e) {
      NoiseChannel ch(seed, e);
      for (int i = 0; i < p_.n; ++i)
        mean(e, i) = wrap_phase(mean(e, i) + p_.noise_std * ch.normal(t, i, kStreamEnv));
    }
    return mean;
  }

  Eigen::VectorXd reset(const NoiseChannel& ch) const {
    Eigen::VectorXd th(p_.n);
    for (int i = 0; i < p_.n; ++i) th[i] = 2.0 * M_PI * ch.uniform(0, i, kStreamReset) - M_PI;
    return th;
  }

  Eigen::MatrixXd reset_batch(int episodes, std::uint64_t seed) const {
    Eigen::MatrixXd Th(episodes, p_.n);
    for (int e = 0; e < episodes; ++e) Th.row(e) = reset(NoiseChannel(seed, e)).transpose();
    return Th;
  }

 private:
  KuramotoParams p_;
  Topology topo_;
  Eigen::VectorXd k_edge_;
  Eigen::VectorXd omega_;
  double rbar_ = 0.0;
};

}  // namespace netspec

#pragma once

#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "netspec/env.hpp"

namespace netspec {

// Multi-zone building with ring connectivity. Zone temperature follows
//   x_i' = x_i + (Δ/(v ζ_i))(θ° − x_i) + Σ_{j∈N_i} (Δ/(v ζ_ij))(x_j − x_i) + (Δ/v) α a_i + ε_i
// with ε_i ~ N(0, (Δ/v) β²), and per-agent cost ρ(x_i − θ*)² + a_i² (reward is
// its negative).
struct ThermalParams {
  int n = 50;
  double delta = 20.0;
  double v = 200.0;           // thermal capacitance
  double zeta_i = 0.5;        // zone-to-outside resistance
  double zeta_ij = 1.0;       // zone-to-zone resistance
  double alpha = 1.0 / 7.0;   // actuator authority
  double beta = std::sqrt(10.0);  // noise scale; default gives unit step noise
  double theta_out = 0.0;     // outside temperature
  double theta_star = 0.0;    // target temperature
  double rho = 3.0;           // state-cost weight
  double gamma = 0.75;
  double x0_std = 1.0;        // reset distribution N(0, x0_std^2 I)
};

class ThermalEnv {
 public:
  explicit ThermalEnv(const ThermalParams& p) : p_(p), topo_(build_ring(p.n)) {
    if (p.v <= 0 || p.zeta_i <= 0 || p.zeta_ij <= 0 || p.delta <= 0)
      throw ConfigError("thermal: delta, v and zeta parameters must be positive");
    if (p.gamma <= 0 || p.gamma >= 1) throw ConfigError("thermal: gamma must lie in (0,1)");
    if (p.beta < 0 || p.x0_std < 0)
      throw ConfigError("thermal: beta and x0_std must be nonnegative");
    const double leak = p.delta / (p.v * p.zeta_i);
    const double coup = p.delta / (p.v * p.zeta_ij);
    A_ = Eigen::MatrixXd::Zero(p.n, p.n);
    for (int i = 0; i < p.n; ++i) {
      const auto& nb = topo_.neighbors(i);
      A_(i, i) = 1.0 - leak - coup * static_cast<double>(nb.size());
      for (int j : nb) A_(i, j) = coup;
    }
    b_ = p.delta * p.alpha / p.v;
    offset_ = Eigen::VectorXd::Constant(p.n, leak * p.theta_out);
    noise_std_ = std::sqrt(p.delta / p.v) * p.beta;
  }

  const Topology& topology() const { return topo_; }
  int n() const { return p_.n; }
  double gamma() const { return p_.gamma; }
  double noise_std() const { return noise_std_; }
  double amax() const { return std::numeric_limits<double>::infinity(); }
  // Quadratic rewards are unbounded; decay probes require a finite rbar and
  // reject this environment.
  double rbar() const { return std::numeric_limits<double>::infinity(); }
  const ThermalParams& params() const { return p_; }
  const Eigen::MatrixXd& A() const { return A_; }
  double b_diag() const { return b_; }

  Eigen::VectorXd step_mean(const Eigen::VectorXd& x, const Eigen::VectorXd& a) const {
    return A_ * x + b_ * a + offset_;
  }

  // Batch layout: rows = samples, cols = agents.
  Eigen::MatrixXd step_mean(const Eigen::MatrixXd& X, const Eigen::MatrixXd& A) const {
    return (X * A_.transpose() + b_ * A).rowwise() + offset_.transpose();
  }

  Eigen::VectorXd reward(const Eigen::VectorXd& x, const Eigen::VectorXd& a) const {
    return -(p_.rho * (x.array() - p_.theta_star).square() + a.array().square());
  }

  Eigen::MatrixXd reward(const Eigen::MatrixXd& X, const Eigen::MatrixXd& A) const {
    return -(p_.rho * (X.array() - p_.theta_star).square() + A.array().square());
  }

  Eigen::VectorXd add_noise(Eigen::VectorXd mean, const NoiseChannel& ch, long t) const {
    for (int i = 0; i < p_.n; ++i) mean[i] += noise_std_ * ch.normal(t, i, kStreamEnv);
    return mean;
  }

  Eigen::MatrixXd add_noise_batch(Eigen::MatrixXd mean, std::uint64_t seed, long t) const {
    for (Eigen::Index e = 0; e < mean.rows(); ++e) {
      NoiseChannel ch(seed, e);
      for (int i = 0; i < p_.n; ++i) mean(e, i) += noise_std_ * ch.normal(t, i, kStreamEnv);
    }
    return mean;
  }

  Eigen::VectorXd reset(const NoiseChannel& ch) const {
    Eigen::VectorXd x(p_.n);
    for (int i = 0; i < p_.n; ++i) x[i] = p_.x0_std * ch.normal(0, i, kStreamReset);
    return x;
  }

  Eigen::MatrixXd reset_batch(int episodes, std::uint64_t seed) const {
    Eigen::MatrixXd X(episodes, p_.n);
    for (int e = 0; e < episodes; ++e) X.row(e) = reset(NoiseChannel(seed, e)).transpose();
    return X;
  }

 private:
  ThermalParams p_;
  Topology topo_;
  Eigen::MatrixXd A_;
  Eigen::VectorXd offset_;
  double b_ = 0.0;
  double noise_std_ = 1.0;
};

}  // namespace netspec

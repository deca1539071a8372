#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "netspec/errors.hpp"
#include "netspec/rng.hpp"
#include "netspec/topology.hpp"
#include "netspec/window.hpp"

namespace netspec {

// Random Fourier factorization of the kappa-hop Gaussian transition kernel
// P(y | x) ≈ φ̂(x)ᵀ μ̂(y), where x = f_{i,κ}(s_{N_i^{κ+1}}, a_{N_i^{κ+1}}) is the
// concatenated mean next state of the window and y = s'_{N_i^κ}.
//
//   φ̂(x) = scale(x) · √(2/m) cos(ω_ℓᵀ x / √(1−α²) + b_ℓ)
//   μ̂(y) = weight(y) · √(2/m) cos(√(1−α²) ω_ℓᵀ y + b_ℓ)
//
// with ω_ℓ ~ N(0, σ⁻²I), b_ℓ ~ U[0, 2π]. For α = 0 (the default and the only
// path used in training) scale ≡ 1 and weight ≡ (2πσ²)^{−d/2}; for α ∈ (0,1)
// scale(x) = g_α(x)/α^d with g_α(x) = exp(α²‖x‖²/(2(1−α²)σ²)) and weight(y) is
// the N(0, (σ/α)²I) density. Draws are frozen at construction and are fully
// determined by (seed, agent, kappa, m, alpha).
class RandomFeatureMap {
 public:
  RandomFeatureMap(const Topology& topo, int agent, int kappa, int m, double alpha, double sigma,
                   std::uint64_t seed)
      : agent_(agent), kappa_(kappa), m_(m), alpha_(alpha), sigma_(sigma), seed_(seed),
        window_(LocalWindow::make(topo, agent, kappa)) {
    if (m < 1) throw ConfigError("feature map: m must be >= 1");
    if (alpha < 0.0 || alpha >= 1.0) throw ConfigError("feature map: alpha must lie in [0, 1)");
    if (sigma <= 0.0) throw ConfigError("feature map: sigma must be positive");
    Rng rng(draw_key());
    omega_ = rng.normal_matrix(window_.size(), m, 1.0 / sigma);
    b_ = rng.uniform_vector(m, 0.0, 2.0 * M_PI);
    root_ = std::sqrt(1.0 - alpha * alpha);
  }

  int agent() const { return agent_; }
  int kappa() const { return kappa_; }
  int m() const { return m_; }
  int dim() const { return window_.size(); }
  double alpha() const { return alpha_; }
  double sigma() const { return sigma_; }
  std::uint64_t seed() const { return seed_; }
  const LocalWindow& window() const { return window_; }

  // Unscaled cosine map z(x) = √(2/m) cos(ωᵀx + b); z(x)ᵀz(y) estimates the
  // Gaussian kernel exp(−‖x−y‖²/(2σ²)).
  Eigen::VectorXd z(const Eigen::VectorXd& x) const {
    check_dim(x.size());
    return std::sqrt(2.0 / m_) *
           ((omega_.transpose() * x + b_).array().cos()).matrix();
  }

  Eigen::VectorXd phi(const Eigen::VectorXd& x) const {
    check_dim(x.size());
    Eigen::VectorXd v = std::sqrt(2.0 / m_) *
                        ((omega_.transpose() * (x / root_) + b_).array().cos()).matrix();
    return alpha_ == 0.0 ? v : Eigen::VectorXd(scale(x) * v);
  }

  // Rows = samples; X holds the window's mean-next vectors.
  Eigen::MatrixXd phi(const Eigen::MatrixXd& X) const {
    check_dim(X.cols());
    Eigen::MatrixXd out =
        (((X / root_) * omega_).rowwise() + b_.transpose()).array().cos() * std::sqrt(2.0 / m_);
    if (alpha_ != 0.0)
      for (Eigen::Index r = 0; r < out.rows(); ++r) out.row(r) *= scale(X.row(r).transpose());
    return out;
  }

  Eigen::VectorXd mu_hat(const Eigen::VectorXd& y) const {
    check_dim(y.size());
    return weight(y) * std::sqrt(2.0 / m_) *
           ((root_ * (omega_.transpose() * y) + b_).array().cos()).matrix();
  }

  double scale(const Eigen::VectorXd& x) const {
    if (alpha_ == 0.0) return 1.0;
    double g = std::exp(alpha_ * alpha_ * x.squaredNorm() / (2.0 * (1.0 - alpha_ * alpha_) * sigma_ * sigma_));
    return g / std::pow(alpha_, dim());
  }

  double weight(const Eigen::VectorXd& y) const {
    double base = std::pow(2.0 * M_PI * sigma_ * sigma_, -0.5 * dim());
    if (alpha_ == 0.0) return base;
    return std::pow(alpha_, dim()) * base *
           std::exp(-alpha_ * alpha_ * y.squaredNorm() / (2.0 * sigma_ * sigma_));
  }

  // Parameters suffice for exact reconstruction; draws are not dumped.
  std::string describe() const {
    std::ostringstream os;
    os << "agent=" << agent_ << " kappa=" << kappa_ << " m=" << m_ << " alpha=" << alpha_
       << " sigma=" << sigma_ << " seed=" << seed_;
    return os.str();
  }

 private:
  std::uint64_t draw_key() const {
    return mix(mix(seed_, static_cast<std::uint64_t>(agent_), static_cast<std::uint64_t>(kappa_)),
               static_cast<std::uint64_t>(m_), std::bit_cast<std::uint64_t>(alpha_));
  }

  void check_dim(Eigen::Index d) const {
    if (d != window_.size())
      throw ConfigError("feature map: input dimension " + std::to_string(d) +
                                  " does not match window size " + std::to_string(window_.size()));
  }

  int agent_, kappa_, m_;
  double alpha_, sigma_, root_;
  std::uint64_t seed_;
  LocalWindow window_;
  Eigen::MatrixXd omega_;  // dim x m
  Eigen::VectorXd b_;
};

template <class Env>
RandomFeatureMap sample_feature_map(const Env& env, int agent, int kappa, int m, double alpha,
                                    std::uint64_t seed) {
  return RandomFeatureMap(env.topology(), agent, kappa, m, alpha, env.noise_std(), seed);
}

inline Eigen::VectorXd eval_mu_hat(const RandomFeatureMap& map, const Eigen::VectorXd& y) {
  return map.mu_hat(y);
}

// Sup over the grid of |z(x)ᵀz(y) − k(x,y)| for the Gaussian kernel (α=0 path).
inline double kernel_gap(const RandomFeatureMap& map,
                         const std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>>& grid) {
  if (map.alpha() != 0.0) throw ConfigError("kernel_gap: defined only for alpha = 0");
  if (grid.empty()) throw ConfigError("kernel_gap: empty grid");
  double worst = 0.0;
  const double s2 = 2.0 * map.sigma() * map.sigma();
  for (const auto& [x, y] : grid) {
    double k = std::exp(-(x - y).squaredNorm() / s2);
    worst = std::max(worst, std::abs(map.z(x).dot(map.z(y)) - k));
  }
  return worst;
}

// Kronecker product of the factors, left-folded:
// ⟨u⊗v, p⊗q⟩ = ⟨u,p⟩·⟨v,q⟩.
inline Eigen::VectorXd tensor_compose(const std::vector<Eigen::VectorXd>& factors) {
  if (factors.empty()) throw ConfigError("tensor_compose: need at least one factor");
  Eigen::VectorXd acc = factors[0];
  for (std::size_t f = 1; f < factors.size(); ++f) {
    const Eigen::VectorXd& v = factors[f];
    Eigen::VectorXd next(acc.size() * v.size());
    for (Eigen::Index i = 0; i < acc.size(); ++i)
      next.segment(i * v.size(), v.size()) = acc[i] * v;
    acc.swap(next);
  }
  return acc;
}

// Reward-prefixed feature φ̃ = [r_i; φ̂], dimension m+1.
inline Eigen::VectorXd augment(double r, const Eigen::VectorXd& phi) {
  Eigen::VectorXd out(phi.size() + 1);
  out[0] = r;
  out.tail(phi.size()) = phi;
  return out;
}

}  // namespace netspec

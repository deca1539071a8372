#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "netspec/critic.hpp"
#include "netspec/errors.hpp"
#include "netspec/rng.hpp"
#include "netspec/topology.hpp"
#include "netspec/window.hpp"

namespace netspec {

// Per-agent Gaussian policy with linear mean over the κπ-hop state window:
//   a_i = clip(θ_iᵀ[s_{N_i^{κπ}}; 1] + σ_π ξ_i,  [−amax, amax]),  ξ_i ~ N(0,1).
// The score is taken from the unclipped density; clipping is part of the
// environment boundary, not the distribution.
class LocalizedGaussianPolicy {
 public:
  LocalizedGaussianPolicy(const Topology& topo, int kappa_pi, double sigma_pi, double amax)
      : n_(topo.n()), kappa_pi_(kappa_pi), sigma_pi_(sigma_pi), amax_(amax),
        windows_(all_windows(topo, kappa_pi)) {
    if (kappa_pi < 0) throw ConfigError("policy: kappa_pi must be >= 0");
    if (sigma_pi < 0) throw ConfigError("policy: sigma_pi must be >= 0");
    theta_.reserve(n_);
    for (int i = 0; i < n_; ++i)
      theta_.push_back(Eigen::VectorXd::Zero(windows_[i].size() + 1));
  }

  int n() const { return n_; }
  int kappa_pi() const { return kappa_pi_; }
  double sigma_pi() const { return sigma_pi_; }
  double amax() const { return amax_; }
  const LocalWindow& window(int i) const { return windows_[i]; }
  const Eigen::VectorXd& theta(int i) const { return theta_[i]; }
  Eigen::VectorXd& theta(int i) { return theta_[i]; }

  double mean_action(int i, const Eigen::VectorXd& s) const {
    const LocalWindow& w = windows_[i];
    double m = theta_[i][w.size()];  // bias
    for (int k = 0; k < w.size(); ++k) m += theta_[i][k] * s[w.members[k]];
    return m;
  }

  Eigen::VectorXd mean_actions(const Eigen::VectorXd& s) const {
    Eigen::VectorXd a(n_);
    for (int i = 0; i < n_; ++i) a[i] = mean_action(i, s);
    return a;
  }

  Eigen::MatrixXd mean_actions(const Eigen::MatrixXd& S) const {
    Eigen::MatrixXd a(S.rows(), n_);
    for (int i = 0; i < n_; ++i) {
      const LocalWindow& w = windows_[i];
      Eigen::VectorXd col = Eigen::VectorXd::Constant(S.rows(), theta_[i][w.size()]);
      for (int k = 0; k < w.size(); ++k) col += theta_[i][k] * S.col(w.members[k]);
      a.col(i) = col;
    }
    return a;
  }

  double clip(double a) const { return std::clamp(a, -amax_, amax_); }

  Eigen::VectorXd sample(const Eigen::VectorXd& s, const NoiseChannel& ch, long t,
                         std::uint64_t stream = kStreamPolicy) const {
    Eigen::VectorXd a = mean_actions(s);
    for (int i = 0; i < n_; ++i) a[i] = clip(a[i] + sigma_pi_ * ch.normal(t, i, stream));
    return a;
  }

  Eigen::MatrixXd sample_batch(const Eigen::MatrixXd& S, std::uint64_t seed, long t,
                               std::uint64_t stream = kStreamPolicy) const {
    Eigen::MatrixXd a = mean_actions(S);
    for (Eigen::Index e = 0; e < S.rows(); ++e) {
      NoiseChannel ch(seed, e);
      for (int i = 0; i < n_; ++i) a(e, i) = clip(a(e, i) + sigma_pi_ * ch.normal(t, i, stream));
    }
    return a;
  }

  // ∇_{θ_i} log π_i(a_i | s) = ((a_i − θ_iᵀx̃)/σ_π²) x̃ with x̃ = [s_window; 1].
  Eigen::VectorXd score(int i, const Eigen::VectorXd& s, double a_i) const {
    if (sigma_pi_ <= 0.0) throw ConfigError("score: undefined for sigma_pi = 0");
    const LocalWindow& w = windows_[i];
    Eigen::VectorXd xt(w.size() + 1);
    for (int k = 0; k < w.size(); ++k) xt[k] = s[w.members[k]];
    xt[w.size()] = 1.0;
    return ((a_i - theta_[i].dot(xt)) / (sigma_pi_ * sigma_pi_)) * xt;
  }

  // Rows = samples; columns = score coordinates for agent i.
  Eigen::MatrixXd score_batch(int i, const Eigen::MatrixXd& S, const Eigen::VectorXd& a) const {
    if (sigma_pi_ <= 0.0) throw ConfigError("score: undefined for sigma_pi = 0");
    const LocalWindow& w = windows_[i];
    Eigen::MatrixXd xt(S.rows(), w.size() + 1);
    for (int k = 0; k < w.size(); ++k) xt.col(k) = S.col(w.members[k]);
    xt.col(w.size()).setOnes();
    Eigen::VectorXd resid = (a - xt * theta_[i]) / (sigma_pi_ * sigma_pi_);
    return resid.asDiagonal() * xt;
  }

 private:
  int n_, kappa_pi_;
  double sigma_pi_, amax_;
  std::vector<LocalWindow> windows_;
  std::vector<Eigen::VectorXd> theta_;
};

// Truncated localized policy gradient on a shared batch:
//   ĝ_i = (1/M) Σ_samples [ Σ_{ℓ∈N_i^{κ+κπ}} Q̂_ℓ / n ] ∇_{θ_i} log π_i .
// Qhat holds Q̂_ℓ per sample (rows) and agent (cols); the inner sum runs over
// the sorted neighborhood, so at saturation (κ+κπ ≥ diameter) the estimator
// is operation-for-operation the plain global REINFORCE estimator.
inline std::vector<Eigen::VectorXd> gradient_estimate(const LocalizedGaussianPolicy& policy,
                                                      const Topology& topo,
                                                      const Eigen::MatrixXd& Qhat,
                                                      const Eigen::MatrixXd& S,
                                                      const Eigen::MatrixXd& A, int kappa) {
  const int n = policy.n();
  if (Qhat.cols() != n) throw ConfigError("gradient_estimate: critics missing for some agents");
  const double M = static_cast<double>(S.rows());
  std::vector<Eigen::VectorXd> grads(n);
  for (int i = 0; i < n; ++i) {
    std::vector<int> gwin = topo.khop(i, kappa + policy.kappa_pi());
    Eigen::VectorXd q = Eigen::VectorXd::Zero(S.rows());
    for (int l : gwin) q += Qhat.col(l);
    q /= static_cast<double>(n);
    Eigen::MatrixXd sc = policy.score_batch(i, S, A.col(i));
    grads[i] = sc.transpose() * q / M;
  }
  return grads;
}

enum class GradNormalization { kPerAgent, kGlobal };

// Normalized ascent step θ_i += η ĝ_i / max(‖ĝ‖, ε). Per-agent normalization
// is the default; kGlobal divides every block by the concatenated norm.
inline void normalized_update(LocalizedGaussianPolicy& policy,
                              const std::vector<Eigen::VectorXd>& grads, double eta,
                              GradNormalization mode = GradNormalization::kPerAgent,
                              double eps = 1e-12) {
  double global_norm2 = 0.0;
  for (const auto& g : grads) {
    if (!g.allFinite()) throw NumericalError("normalized_update: non-finite gradient; round aborted");
    global_norm2 += g.squaredNorm();
  }
  for (int i = 0; i < policy.n(); ++i) {
    double norm = mode == GradNormalization::kPerAgent ? grads[i].norm() : std::sqrt(global_norm2);
    policy.theta(i) += eta * grads[i] / std::max(norm, eps);
  }
}

}  // namespace netspec

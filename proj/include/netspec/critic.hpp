#pragma once

#include <cmath>
#include <cstdint>

#include <Eigen/Dense>

#include "netspec/errors.hpp"
#include "netspec/features.hpp"

namespace netspec {

// Batch of stationary-distribution transitions. Rows = samples, cols = agents;
// SP rows are drawn from P(.|s,a) and AP rows from the current policy at s'.
struct TransitionDataset {
  Eigen::MatrixXd S, A, SP, AP;
  // Provenance of the sampling pass.
  std::uint64_t seed = 0;
  int horizon = 0, burn_in = 0, thinning = 1;
  // Mean over sampled episodes of the discounted global reward (a free
  // by-product of sampling; the trainer logs it).
  double return_estimate = 0.0;

  Eigen::Index size() const { return S.rows(); }
};

struct LstdMatrices {
  Eigen::MatrixXd M;   // Ê[φ̃(φ̃ − γφ̃')ᵀ]
  Eigen::MatrixXd H;   // Ê[φ̃φ̃ᵀ]
  double max_feature_norm = 0.0;  // L diagnostic
};

struct CriticWeights {
  Eigen::VectorXd w;  // m+1; Q̂(s,a) = φ̃(s,a)ᵀ w
  double L = 0.0;     // max ‖φ̃‖ seen at assembly
  double D = 0.0;     // ‖(M+λI)⁻¹‖_F
  double cond = 0.0;  // condition estimate of M+λI
  double ridge = 0.0;
};

// Reward-prefixed feature rows for a batch: Phi = [r | φ̂(F_window)],
// where F is the global mean-next matrix (samples x n).
inline Eigen::MatrixXd build_augmented(const RandomFeatureMap& map, const Eigen::MatrixXd& F,
                                       const Eigen::VectorXd& r) {
  Eigen::MatrixXd Phi(F.rows(), map.m() + 1);
  Phi.col(0) = r;
  Phi.rightCols(map.m()) = map.phi(map.window().extract(F));
  return Phi;
}

// Weighted empirical LSTD matrices. With weights == nullptr every sample gets
// 1/|D|; an explicit (nonnegative) weight vector realizes exhaustive
// enumeration of a finite MDP under a given distribution.
inline LstdMatrices lstd_matrices(const Eigen::MatrixXd& Phi, const Eigen::MatrixXd& PhiP,
                                  double gamma, const Eigen::VectorXd* weights = nullptr) {
  if (Phi.rows() == 0) throw ConfigError("lstd_matrices: empty dataset");
  if (Phi.rows() != PhiP.rows() || Phi.cols() != PhiP.cols())
    throw ConfigError("lstd_matrices: feature matrices must have identical shape");
  LstdMatrices out;
  if (weights == nullptr) {
    const double invM = 1.0 / static_cast<double>(Phi.rows());
    out.M = Phi.transpose() * (Phi - gamma * PhiP) * invM;
    out.H = Phi.transpose() * Phi * invM;
  } else {
    Eigen::MatrixXd Wp = weights->asDiagonal() * Phi;
    out.M = Wp.transpose() * (Phi - gamma * PhiP);
    out.H = Wp.transpose() * Phi;
  }
  out.max_feature_norm = Phi.rowwise().norm().maxCoeff();
  return out;
}

inline double default_ridge(const Eigen::MatrixXd& H, double scale = 1e-6) {
  return scale * H.trace() / static_cast<double>(H.rows());
}

// ŵ = (M + λI)⁻¹ H e₁ — the LSTD fixed point with r̃ = e₁ picking out the
// reward coordinate of the augmented features.
inline CriticWeights lstd_solve(const LstdMatrices& mats, double ridge) {
  Eigen::MatrixXd Mreg = mats.M;
  Mreg.diagonal().array() += ridge;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(Mreg);
  CriticWeights cw;
  cw.ridge = ridge;
  cw.L = mats.max_feature_norm;
  cw.w = lu.solve(mats.H.col(0));
  double rcond = lu.rcond();
  cw.cond = rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
  cw.D = lu.inverse().norm();
  // An exactly singular M can still back-substitute to a finite w, so the
  // inverse norm is the reliable singularity detector.
  if (!cw.w.allFinite() || !std::isfinite(cw.D))
    throw NumericalError("lstd_solve: singular system (rcond=" + std::to_string(rcond) +
                         "); increase ridge");
  return cw;
}

// Convenience one-agent assembly straight from a dataset (the trainer shares
// the mean-next matrices across agents instead of recomputing them here).
template <class Env>
LstdMatrices assemble_lstd(const Env& env, const RandomFeatureMap& map,
                           const TransitionDataset& data) {
  Eigen::MatrixXd F = env.step_mean(data.S, data.A);
  Eigen::MatrixXd FP = env.step_mean(data.SP, data.AP);
  Eigen::VectorXd r = env.reward(data.S, data.A).col(map.agent());
  Eigen::VectorXd rp = env.reward(data.SP, data.AP).col(map.agent());
  return lstd_matrices(build_augmented(map, F, r), build_augmented(map, FP, rp), env.gamma());
}

}  // namespace netspec

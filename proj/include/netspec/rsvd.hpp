#pragma once

#include <cmath>

#include <Eigen/Dense>

#include "netspec/errors.hpp"

namespace netspec {

struct RsvdFit {
  Eigen::MatrixXd W;   // L x p; features are φ(s,a) = W ψ(s,a)
  double objective = 0.0;
  double grad_norm = 0.0;
  int iters = 0;
};

inline double rsvd_objective(const Eigen::MatrixXd& Psi, const Eigen::MatrixXd& OmegaS,
                             const Eigen::MatrixXd& W) {
  const double M = static_cast<double>(Psi.rows());
  Eigen::MatrixXd F = Psi * W.transpose();  // M x L, rows φ(s,a)ᵀ
  return (F.squaredNorm() - 2.0 * (OmegaS.array() * F.array()).sum()) / M;
}

// Fit of random probe functions onto the feature span: minimizes the sampled
// objective  Ê‖Wψ‖² − 2 Ê[ω(s')ᵀ W ψ]  (+ λ‖W‖²_F)  by accelerated gradient
// descent. Psi holds ψ(s,a) per row (M x p), OmegaS holds ω(s') per row
// (M x L). The minimizer is the least-squares projection
// W* = Ê[ωψᵀ](Ê[ψψᵀ]+λI)⁻¹, which tests use as the independent oracle.
inline RsvdFit rsvd_linear_fit(const Eigen::MatrixXd& Psi, const Eigen::MatrixXd& OmegaS,
                               double ridge, double tol = 1e-12, int max_iter = 200000) {
  if (Psi.rows() == 0) throw ConfigError("rsvd_linear_fit: empty dataset");
  if (Psi.rows() != OmegaS.rows())
    throw ConfigError("rsvd_linear_fit: psi/omega sample counts differ");
  const double M = static_cast<double>(Psi.rows());
  const Eigen::Index p = Psi.cols(), L = OmegaS.cols();

  Eigen::MatrixXd G = Psi.transpose() * Psi / M;       // Ê[ψψᵀ]
  Eigen::MatrixXd C = OmegaS.transpose() * Psi / M;    // Ê[ωψᵀ]
  G.diagonal().array() += ridge;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(G);
  const double lmax = eig.eigenvalues().maxCoeff();
  const double lmin = eig.eigenvalues().minCoeff();
  if (lmin <= 1e-14 * std::max(lmax, 1.0))
    throw NumericalError("rsvd_linear_fit: singular Gram matrix; add ridge");

  // Heavy-ball tuned to the known spectrum of the quadratic.
  const double step = 4.0 / ((std::sqrt(lmax) + std::sqrt(lmin)) * (std::sqrt(lmax) + std::sqrt(lmin)));
  const double mom = std::pow((std::sqrt(lmax) - std::sqrt(lmin)) / (std::sqrt(lmax) + std::sqrt(lmin)), 2);
  const double stop = tol * std::max(1.0, C.norm());

  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(L, p), Wprev = W;
  RsvdFit fit;
  for (fit.iters = 0; fit.iters < max_iter; ++fit.iters) {
    Eigen::MatrixXd grad = W * G - C;  // one half of the true gradient
    fit.grad_norm = grad.norm();
    if (fit.grad_norm <= stop) break;
    Eigen::MatrixXd Wnext = W - step * grad + mom * (W - Wprev);
    Wprev.swap(W);
    W.swap(Wnext);
  }
  fit.W = W;
  fit.objective = rsvd_objective(Psi, OmegaS, W);
  return fit;
}

}  // namespace netspec

#pragma once

#include <cmath>

#include <Eigen/Dense>

#include "netspec/errors.hpp"
#include "netspec/thermal.hpp"

namespace netspec {

// Discounted LQR ground truth for the linear thermal environment:
//   x' = Ax + Ba + w,  w ~ N(0, Σ),  stage cost xᵀQc x + aᵀRc a (summed over agents).
struct LinearSystem {
  Eigen::MatrixXd A, B, Qc, Rc, Sigma, X0cov;
  double gamma = 0.75;
};

inline LinearSystem hvac_to_lqr(const ThermalEnv& env) {
  const ThermalParams& p = env.params();
  if (p.theta_out != 0.0 || p.theta_star != 0.0)
    throw ConfigError("hvac_to_lqr: nonzero outside/target temperature not supported");
  const int n = env.n();
  LinearSystem sys;
  sys.A = env.A();
  sys.B = env.b_diag() * Eigen::MatrixXd::Identity(n, n);
  sys.Qc = p.rho * Eigen::MatrixXd::Identity(n, n);
  sys.Rc = Eigen::MatrixXd::Identity(n, n);
  sys.Sigma = env.noise_std() * env.noise_std() * Eigen::MatrixXd::Identity(n, n);
  sys.X0cov = p.x0_std * p.x0_std * Eigen::MatrixXd::Identity(n, n);
  sys.gamma = p.gamma;
  return sys;
}

struct RiccatiResult {
  Eigen::MatrixXd P;
  Eigen::MatrixXd K;  // optimal control u = -Kx
  double residual = 0.0;
  int iters = 0;
};

// Fixed-point iteration for P = Qc + γAᵀPA − γ²AᵀPB(Rc+γBᵀPB)⁻¹BᵀPA from P₀ = Qc.
inline RiccatiResult riccati_solve(const LinearSystem& sys, double tol = 1e-10,
                                   int max_iter = 100000) {
  const double g = sys.gamma;
  Eigen::MatrixXd P = sys.Qc;
  RiccatiResult res;
  auto rhs = [&](const Eigen::MatrixXd& P_) {
    Eigen::MatrixXd BtPA = sys.B.transpose() * P_ * sys.A;
    Eigen::MatrixXd G = sys.Rc + g * sys.B.transpose() * P_ * sys.B;
    return Eigen::MatrixXd(sys.Qc + g * sys.A.transpose() * P_ * sys.A -
                           g * g * BtPA.transpose() * G.ldlt().solve(BtPA));
  };
  for (res.iters = 0; res.iters < max_iter; ++res.iters) {
    Eigen::MatrixXd Pn = rhs(P);
    double diff = (Pn - P).cwiseAbs().maxCoeff();
    P = Pn;
    if (!P.allFinite()) throw NumericalError("riccati_solve: iteration diverged");
    if (diff < tol) {
      res.P = P;
      res.residual = (P - rhs(P)).cwiseAbs().maxCoeff();
      Eigen::MatrixXd G = sys.Rc + g * sys.B.transpose() * P * sys.B;
      res.K = g * G.ldlt().solve(sys.B.transpose() * P * sys.A);
      return res;
    }
  }
  throw NumericalError("riccati_solve: no convergence within max_iter");
}

namespace detail {
// P = Q + γ AᵀPA by iteration; converges iff √γ·A has spectral radius < 1.
inline Eigen::MatrixXd discounted_lyapunov(const Eigen::MatrixXd& A, const Eigen::MatrixXd& Q,
                                           double gamma, double tol = 1e-12,
                                           int max_iter = 400000) {
  Eigen::MatrixXd P = Q;
  for (int it = 0; it < max_iter; ++it) {
    Eigen::MatrixXd Pn = Q + gamma * A.transpose() * P * A;
    double diff = (Pn - P).cwiseAbs().maxCoeff();
    P = Pn;
    if (!P.allFinite() || P.cwiseAbs().maxCoeff() > 1e14)
      throw NumericalError("lyapunov: closed loop unstable, cost diverges");
    if (diff < tol) return P;
  }
  throw NumericalError("lyapunov: no convergence within max_iter");
}
}  // namespace detail

// Expected discounted cost of the linear feedback u = -Kx:
//   E[x₀ᵀ P_K x₀] + γ/(1−γ)·tr(P_K Σ)
// with P_K the policy-evaluation Lyapunov fixed point.
inline double lqr_cost(const LinearSystem& sys, const Eigen::MatrixXd& K) {
  Eigen::MatrixXd Acl = sys.A - sys.B * K;
  Eigen::MatrixXd Qstage = sys.Qc + K.transpose() * sys.Rc * K;
  Eigen::MatrixXd P = detail::discounted_lyapunov(Acl, Qstage, sys.gamma);
  return (P * sys.X0cov).trace() + sys.gamma / (1.0 - sys.gamma) * (P * sys.Sigma).trace();
}

// Exact discounted cost of an affine policy u = Kx·x + c (direct sign, unlike
// the -K convention above) via the augmented-state Lyapunov equation. This is
// how learned mean policies (linear + bias) are scored against the oracle.
inline double affine_policy_cost(const LinearSystem& sys, const Eigen::MatrixXd& Kx,
                                 const Eigen::VectorXd& c) {
  const int n = static_cast<int>(sys.A.rows());
  Eigen::MatrixXd Acl = sys.A + sys.B * Kx;
  Eigen::MatrixXd At = Eigen::MatrixXd::Zero(n + 1, n + 1);
  At.topLeftCorner(n, n) = Acl;
  At.topRightCorner(n, 1) = sys.B * c;
  At(n, n) = 1.0;
  Eigen::MatrixXd Qt(n + 1, n + 1);
  Qt.topLeftCorner(n, n) = sys.Qc + Kx.transpose() * sys.Rc * Kx;
  Qt.topRightCorner(n, 1) = Kx.transpose() * sys.Rc * c;
  Qt.bottomLeftCorner(1, n) = (sys.Rc * c).transpose() * Kx;
  Qt(n, n) = c.dot(sys.Rc * c);
  Eigen::MatrixXd P = detail::discounted_lyapunov(At, Qt, sys.gamma);
  Eigen::MatrixXd X0 = Eigen::MatrixXd::Zero(n + 1, n + 1);
  X0.topLeftCorner(n, n) = sys.X0cov;
  X0(n, n) = 1.0;
  Eigen::MatrixXd St = Eigen::MatrixXd::Zero(n + 1, n + 1);
  St.topLeftCorner(n, n) = sys.Sigma;
  return (P * X0).trace() + sys.gamma / (1.0 - sys.gamma) * (P * St).trace();
}

}  // namespace netspec

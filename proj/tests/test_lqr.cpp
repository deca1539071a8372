#include "netspec/lqr.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "netspec/errors.hpp"
#include "netspec/rng.hpp"
#include "netspec/thermal.hpp"

using namespace netspec;

namespace {

LinearSystem scalar_system(double a, double b, double q, double r, double gamma) {
  LinearSystem sys;
  sys.A = Eigen::MatrixXd::Constant(1, 1, a);
  sys.B = Eigen::MatrixXd::Constant(1, 1, b);
  sys.Qc = Eigen::MatrixXd::Constant(1, 1, q);
  sys.Rc = Eigen::MatrixXd::Constant(1, 1, r);
  sys.Sigma = Eigen::MatrixXd::Constant(1, 1, 1.0);
  sys.X0cov = Eigen::MatrixXd::Constant(1, 1, 1.0);
  sys.gamma = gamma;
  return sys;
}

LinearSystem random_system(int n, std::uint64_t seed, double gamma) {
  Rng r(seed);
  LinearSystem sys;
  sys.A = 0.25 * r.normal_matrix(n, n, 1.0);
  sys.B = r.normal_matrix(n, n, 0.5);
  Eigen::MatrixXd Mq = r.normal_matrix(n, n, 1.0);
  sys.Qc = Mq * Mq.transpose() / n + Eigen::MatrixXd::Identity(n, n);
  sys.Rc = Eigen::MatrixXd::Identity(n, n);
  sys.Sigma = 0.04 * Eigen::MatrixXd::Identity(n, n);
  sys.X0cov = Eigen::MatrixXd::Identity(n, n);
  sys.gamma = gamma;
  return sys;
}

TEST(Riccati, UncontrolledScalarIsGeometricSeries) {
  // B = 0: P = q·Σ (γa²)^t = q/(1−γa²), K = 0.
  double a = 0.8, q = 2.0, gamma = 0.9;
  auto res = riccati_solve(scalar_system(a, 0.0, q, 1.0, gamma));
  EXPECT_NEAR(res.P(0, 0), q / (1.0 - gamma * a * a), 1e-8);
  EXPECT_EQ(res.K(0, 0), 0.0);
}

TEST(Riccati, MemorylessDynamicsGiveStageCost) {
  auto res = riccati_solve(scalar_system(0.0, 1.0, 3.0, 1.0, 0.9));
  EXPECT_NEAR(res.P(0, 0), 3.0, 1e-10);
  EXPECT_NEAR(res.K(0, 0), 0.0, 1e-12);
}

TEST(Riccati, ScalarClosedFormRoot) {
  // Fixed point is the positive root of γb²P² + (r − γb²q − γa²r)P − qr = 0.
  double a = 1.1, b = 0.6, q = 1.7, r = 0.9, gamma = 0.8;
  double beta = r - gamma * b * b * q - gamma * a * a * r;
  double P = (-beta + std::sqrt(beta * beta + 4.0 * gamma * b * b * q * r)) /
             (2.0 * gamma * b * b);
  auto res = riccati_solve(scalar_system(a, b, q, r, gamma));
  EXPECT_NEAR(res.P(0, 0), P, 1e-8);
  EXPECT_NEAR(res.K(0, 0), gamma * b * P * a / (r + gamma * b * b * P), 1e-8);
}

TEST(Riccati, ResidualBelowToleranceOnRandomSystem) {
  auto sys = random_system(4, 31, 0.85);
  auto res = riccati_solve(sys);
  EXPECT_LT(res.residual, 1e-10);
  EXPECT_GT(res.iters, 0);
  // P is symmetric PSD
  EXPECT_LT((res.P - res.P.transpose()).cwiseAbs().maxCoeff(), 1e-9);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(res.P);
  EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-10);
}

TEST(Riccati, OptimalGainBeatsPerturbations) {
  auto sys = random_system(4, 32, 0.85);
  auto res = riccati_solve(sys);
  double c0 = lqr_cost(sys, res.K);
  Rng r(33);
  for (int p = 0; p < 20; ++p) {
    Eigen::MatrixXd Kp = res.K + 0.05 * r.normal_matrix(4, 4, 1.0);
    EXPECT_GE(lqr_cost(sys, Kp), c0 - 1e-9) << "perturbation " << p;
  }
}

TEST(Riccati, CostMatchesMonteCarlo) {
  auto sys = random_system(3, 34, 0.8);
  auto res = riccati_solve(sys);
  double analytic = lqr_cost(sys, res.K);
  const int n_roll = 4000;
  const int T = 80;  // 0.8^80 ≈ 1.8e-8: truncation ≪ SE
  Rng r(35);
  double acc = 0.0, acc2 = 0.0;
  Eigen::LLT<Eigen::MatrixXd> noise_chol(sys.Sigma);
  Eigen::MatrixXd Lw = noise_chol.matrixL();
  for (int k = 0; k < n_roll; ++k) {
    Eigen::VectorXd x = r.normal_matrix(3, 1, 1.0);  // X0cov = I
    double cost = 0.0, disc = 1.0;
    for (int t = 0; t < T; ++t) {
      Eigen::VectorXd u = -res.K * x;
      cost += disc * (x.dot(sys.Qc * x) + u.dot(sys.Rc * u));
      x = sys.A * x + sys.B * u + Lw * r.normal_matrix(3, 1, 1.0);
      disc *= sys.gamma;
    }
    acc += cost;
    acc2 += cost * cost;
  }
  double mean = acc / n_roll;
  double se = std::sqrt((acc2 / n_roll - mean * mean) / n_roll);
  EXPECT_LE(std::abs(mean - analytic), 3.0 * se)
      << "analytic=" << analytic << " mc=" << mean << " se=" << se;
}

TEST(Lqr, ThermalConversionReproducesMeanDynamics) {
  ThermalParams p;
  p.n = 6;
  p.theta_out = 0.0;
  p.theta_star = 0.0;
  ThermalEnv env(p);
  auto sys = hvac_to_lqr(env);
  Rng r(36);
  Eigen::VectorXd x = r.normal_matrix(6, 1, 1.0), a = r.normal_matrix(6, 1, 1.0);
  Eigen::VectorXd lin = sys.A * x + sys.B * a;
  EXPECT_LT((lin - env.step_mean(x, a)).cwiseAbs().maxCoeff(), 1e-13);
  EXPECT_EQ(sys.gamma, p.gamma);
  EXPECT_EQ(sys.Qc(0, 0), p.rho);
  EXPECT_EQ(sys.Rc(1, 1), 1.0);
  EXPECT_EQ(sys.Sigma(2, 2), env.noise_std() * env.noise_std());
  EXPECT_EQ(sys.X0cov(3, 3), p.x0_std * p.x0_std);
}

TEST(Lqr, ThermalConversionRejectsNonzeroSetpoints) {
  ThermalParams p;
  p.n = 4;
  p.theta_out = 4.0;
  p.theta_star = 0.0;
  EXPECT_THROW(hvac_to_lqr(ThermalEnv(p)), ConfigError);
  p.theta_out = 0.0;
  p.theta_star = 1.0;
  EXPECT_THROW(hvac_to_lqr(ThermalEnv(p)), ConfigError);
}

TEST(Lqr, AffineCostMatchesLinearCostAtZeroBias) {
  auto sys = random_system(4, 37, 0.85);
  auto res = riccati_solve(sys);
  double via_linear = lqr_cost(sys, res.K);
  // affine convention is u = Kx·x + c, the -K gain maps to Kx = -K
  double via_affine = affine_policy_cost(sys, -res.K, Eigen::VectorXd::Zero(4));
  EXPECT_NEAR(via_affine, via_linear, 1e-7 * std::abs(via_linear));
}

TEST(Lqr, BiasOnlyIncreasesCostAtOptimum) {
  auto sys = random_system(4, 38, 0.85);
  auto res = riccati_solve(sys);
  double c0 = affine_policy_cost(sys, -res.K, Eigen::VectorXd::Zero(4));
  Rng r(39);
  for (int p = 0; p < 5; ++p) {
    Eigen::VectorXd c = r.normal_matrix(4, 1, 0.5);
    EXPECT_GT(affine_policy_cost(sys, -res.K, c), c0);
  }
}

TEST(Lqr, UnstableClosedLoopThrows) {
  Eigen::MatrixXd A = 2.0 * Eigen::MatrixXd::Identity(2, 2);
  Eigen::MatrixXd Q = Eigen::MatrixXd::Identity(2, 2);
  EXPECT_THROW(detail::discounted_lyapunov(A, Q, 0.9), NumericalError);
  // and through the public cost: destabilizing gain on a scalar system
  auto sys = scalar_system(0.9, 1.0, 1.0, 1.0, 0.95);
  Eigen::MatrixXd Kbad = Eigen::MatrixXd::Constant(1, 1, -5.0);  // u = +5x
  EXPECT_THROW(lqr_cost(sys, Kbad), NumericalError);
}

}  // namespace

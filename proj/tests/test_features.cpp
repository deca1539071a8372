#include "netspec/features.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "netspec/errors.hpp"
#include "netspec/rng.hpp"
#include "netspec/thermal.hpp"
#include "netspec/topology.hpp"

using namespace netspec;

namespace {

constexpr double kPi = 3.14159265358979323846;

TEST(FeatureMap, DimensionsAndDescribe) {
  Topology t = build_ring(8);
  RandomFeatureMap map(t, 2, 1, 16, 0.0, 1.0, 5);
  EXPECT_EQ(map.m(), 16);
  EXPECT_EQ(map.dim(), 3);  // |N_2^1| on a ring
  Eigen::VectorXd x = Eigen::VectorXd::Ones(3);
  EXPECT_EQ(map.phi(x).size(), 16);
  Eigen::VectorXd wrong = Eigen::VectorXd::Ones(4);
  EXPECT_THROW(map.phi(wrong), ConfigError);
}

TEST(FeatureMap, ReEvaluationIsBitIdentical) {
  Topology t = build_ring(6);
  RandomFeatureMap map(t, 0, 1, 64, 0.3, 1.0, 9);
  Rng r(1);
  Eigen::VectorXd x = r.normal_matrix(3, 1, 1.0);
  Eigen::VectorXd a = map.phi(x), b = map.phi(x);
  EXPECT_EQ((a - b).cwiseAbs().maxCoeff(), 0.0);
}

TEST(FeatureMap, KeyReconstructionIsBitIdentical) {
  Topology t = build_ring(6);
  Rng r(2);
  Eigen::VectorXd x = r.normal_matrix(3, 1, 1.0);
  RandomFeatureMap a(t, 1, 1, 32, 0.2, 1.5, 77);
  RandomFeatureMap b(t, 1, 1, 32, 0.2, 1.5, 77);
  EXPECT_EQ((a.phi(x) - b.phi(x)).cwiseAbs().maxCoeff(), 0.0);
  // any key ingredient changes the draw
  RandomFeatureMap c(t, 2, 1, 32, 0.2, 1.5, 77);
  RandomFeatureMap d(t, 1, 1, 32, 0.2, 1.5, 78);
  RandomFeatureMap e(t, 1, 1, 32, 0.25, 1.5, 77);
  Eigen::VectorXd pa = a.phi(x);
  EXPECT_NE((c.phi(x) - pa).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_NE((d.phi(x) - pa).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_NE((e.phi(x) - pa).cwiseAbs().maxCoeff(), 0.0);
}

TEST(FeatureMap, NormBoundAlphaZero) {
  Topology t = build_ring(8);
  Rng r(3);
  for (int m : {1, 7, 64}) {
    RandomFeatureMap map(t, 0, 1, m, 0.0, 1.0, m);
    for (int trial = 0; trial < 50; ++trial) {
      Eigen::VectorXd x = r.normal_matrix(3, 1, 2.0);
      EXPECT_LE(map.phi(x).norm(), std::sqrt(2.0) + 1e-12);
    }
  }
}

TEST(FeatureMap, NormBoundScalesWithGAlpha) {
  Topology t = build_ring(8);
  const double alpha = 0.5, sigma = 1.0;
  RandomFeatureMap map(t, 0, 1, 32, alpha, sigma, 4);
  Rng r(4);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::VectorXd x = r.normal_matrix(3, 1, 1.0);
    double g = std::exp(alpha * alpha * x.squaredNorm() /
                        (2.0 * (1.0 - alpha * alpha) * sigma * sigma));
    double bound = std::sqrt(2.0) * g / std::pow(alpha, 3);
    EXPECT_LE(map.phi(x).norm(), bound + 1e-9);
  }
}

TEST(FeatureMap, UnitSecondMomentOverDraws) {
  // E over the feature draw of ||z(x)||^2 is exactly 1 for any x
  Topology t = build_ring(4);
  Rng r(5);
  Eigen::VectorXd x = r.normal_matrix(3, 1, 1.0);
  double acc = 0.0;
  const int draws = 10000;
  for (int s = 0; s < draws; ++s) {
    RandomFeatureMap map(t, 0, 1, 4, 0.0, 1.0, 1000 + s);
    acc += map.z(x).squaredNorm();
  }
  EXPECT_NEAR(acc / draws, 1.0, 0.02);
}

TEST(FeatureMap, LargeMRecoversGaussianKernel) {
  Topology t = build_ring(4);
  const double sigma = 0.8;
  RandomFeatureMap map(t, 0, 1, 200000, 0.0, sigma, 6);
  Eigen::VectorXd x(3), y(3);
  x << 0.3, -0.2, 0.5;
  // pick y at distance sigma*sqrt(2) so the true kernel value is exp(-1)
  y = x;
  y[0] += sigma * std::sqrt(2.0);
  double k = map.z(x).dot(map.z(y));
  EXPECT_NEAR(k, std::exp(-1.0), 0.01);
  EXPECT_NEAR(map.z(x).dot(map.z(x)), 1.0, 0.01);  // diagonal
}

TEST(FeatureMap, MuHatWeightIntegratesToOne) {
  // the alpha>0 sampling density p_alpha integrates to 1 (1-d quadrature)
  Topology ring3 = build_ring(3);
  const double alpha = 0.6, sigma = 0.7;
  RandomFeatureMap map(ring3, 0, 0, 8, alpha, sigma, 7);  // kappa=0: d=1
  double acc = 0.0;
  const double lo = -8.0, hi = 8.0;
  const int steps = 4000;
  const double h = (hi - lo) / steps;
  for (int i = 0; i <= steps; ++i) {
    double y = lo + i * h;
    Eigen::VectorXd yv(1);
    yv << y;
    double w = (i == 0 || i == steps) ? 0.5 : 1.0;
    acc += w * h * map.weight(yv);
  }
  EXPECT_NEAR(acc, 1.0, 1e-3);
}

TEST(FeatureMap, PhiMuProductApproximatesTransitionDensity) {
  // E_omega[phi(x)^T mu(y)] = N(y; x, sigma^2 I); check at large m for both
  // alpha = 0 and alpha > 0 (the importance-weighted construction)
  Topology ring3 = build_ring(3);
  const double sigma = 0.9;
  Eigen::VectorXd x(1), y(1);
  x << 0.4;
  y << -0.3;
  double truth = std::exp(-(x - y).squaredNorm() / (2 * sigma * sigma)) /
                 std::sqrt(2 * kPi * sigma * sigma);
  for (double alpha : {0.0, 0.5}) {
    RandomFeatureMap map(ring3, 0, 0, 400000, alpha, sigma, 8);
    double approx = map.phi(x).dot(map.mu_hat(y));
    EXPECT_NEAR(approx, truth, 0.01) << "alpha=" << alpha;
  }
}

TEST(FeatureMap, BatchPhiMatchesSingle) {
  Topology t = build_ring(8);
  RandomFeatureMap map(t, 3, 1, 24, 0.4, 1.1, 9);
  Rng r(10);
  Eigen::MatrixXd X = r.normal_matrix(20, 3, 1.0);
  Eigen::MatrixXd P = map.phi(X);
  ASSERT_EQ(P.rows(), 20);
  ASSERT_EQ(P.cols(), 24);
  for (int k = 0; k < 20; ++k) {
    Eigen::VectorXd xk = X.row(k).transpose();
    EXPECT_LT((P.row(k).transpose() - map.phi(xk)).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(FeatureMap, SampleFeatureMapUsesEnvNoiseBandwidth) {
  ThermalParams p;
  p.n = 6;
  ThermalEnv env(p);
  Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(3, -1.0, 1.0);
  for (int i = 0; i < 6; ++i) {
    RandomFeatureMap map = sample_feature_map(env, i, 1, 12, 0.0, 33);
    EXPECT_EQ(map.agent(), i);
    EXPECT_EQ(map.dim(), 3);
    EXPECT_EQ(map.sigma(), env.noise_std());
    // same seed rebuilds an identical map
    RandomFeatureMap again = sample_feature_map(env, i, 1, 12, 0.0, 33);
    EXPECT_EQ((map.phi(x) - again.phi(x)).cwiseAbs().maxCoeff(), 0.0);
    // agents draw distinct frequencies under the same seed
    if (i > 0) {
      RandomFeatureMap prev = sample_feature_map(env, i - 1, 1, 12, 0.0, 33);
      EXPECT_NE((map.phi(x) - prev.phi(x)).cwiseAbs().maxCoeff(), 0.0);
    }
  }
}

TEST(FeatureMap, EvalMuHatMatchesMapMuHat) {
  Topology t = build_ring(5);
  RandomFeatureMap map(t, 1, 1, 16, 0.3, 1.0, 11);
  Rng r(12);
  Eigen::VectorXd y = r.normal_matrix(3, 1, 1.0);
  EXPECT_EQ((eval_mu_hat(map, y) - map.mu_hat(y)).cwiseAbs().maxCoeff(), 0.0);
}

TEST(KernelGap, ShrinksWithMoreFeatures) {
  Topology t = build_ring(4);
  Rng r(13);
  std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>> grid;
  for (int p = 0; p < 60; ++p)
    grid.emplace_back(r.normal_matrix(3, 1, 1.0), r.normal_matrix(3, 1, 1.0));
  auto med_gap = [&](int m) {
    std::vector<double> g;
    for (int s = 0; s < 11; ++s) {
      RandomFeatureMap map(t, 0, 1, m, 0.0, 1.0, 100 + s);
      g.push_back(kernel_gap(map, grid));
    }
    std::sort(g.begin(), g.end());
    return g[g.size() / 2];
  };
  double g16 = med_gap(16), g256 = med_gap(256), g2048 = med_gap(2048);
  EXPECT_GT(g16, g256);
  EXPECT_GT(g256, g2048);
}

TEST(KernelGap, RejectsMisuse) {
  Topology t = build_ring(4);
  RandomFeatureMap alpha_map(t, 0, 1, 8, 0.5, 1.0, 1);
  std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>> grid;
  grid.emplace_back(Eigen::VectorXd::Zero(3), Eigen::VectorXd::Ones(3));
  EXPECT_THROW(kernel_gap(alpha_map, grid), ConfigError);
  RandomFeatureMap ok(t, 0, 1, 8, 0.0, 1.0, 1);
  EXPECT_THROW(kernel_gap(ok, {}), ConfigError);
}

TEST(TensorCompose, SingleFactorIdentity) {
  Eigen::VectorXd u(3);
  u << 1, -2, 0.5;
  EXPECT_EQ((tensor_compose({u}) - u).cwiseAbs().maxCoeff(), 0.0);
}

TEST(TensorCompose, InnerProductFactorizes) {
  Rng r(14);
  Eigen::VectorXd u = r.normal_matrix(3, 1, 1.0), v = r.normal_matrix(4, 1, 1.0);
  Eigen::VectorXd p = r.normal_matrix(3, 1, 1.0), q = r.normal_matrix(4, 1, 1.0);
  Eigen::VectorXd uv = tensor_compose({u, v}), pq = tensor_compose({p, q});
  ASSERT_EQ(uv.size(), 12);
  EXPECT_NEAR(uv.dot(pq), u.dot(p) * v.dot(q), 1e-12);
  // three factors
  Eigen::VectorXd w = r.normal_matrix(2, 1, 1.0), s = r.normal_matrix(2, 1, 1.0);
  EXPECT_NEAR(tensor_compose({u, v, w}).dot(tensor_compose({p, q, s})),
              u.dot(p) * v.dot(q) * w.dot(s), 1e-12);
}

TEST(TensorCompose, EmptyInputRejected) {
  EXPECT_THROW(tensor_compose({}), ConfigError);
}

TEST(Augment, PrependsReward) {
  Eigen::VectorXd phi(3);
  phi << 0.1, 0.2, 0.3;
  Eigen::VectorXd out = augment(2.5, phi);
  ASSERT_EQ(out.size(), 4);
  EXPECT_EQ(out[0], 2.5);
  EXPECT_EQ(out[3], 0.3);
}

}  // namespace

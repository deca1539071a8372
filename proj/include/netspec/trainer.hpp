#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <future>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "netspec/actor.hpp"
#include "netspec/critic.hpp"
#include "netspec/env.hpp"
#include "netspec/errors.hpp"
#include "netspec/features.hpp"
#include "netspec/rng.hpp"

namespace netspec {

struct ExperimentConfig {
  int kappa = 1;
  int kappa_pi = 1;
  int m = 50;
  double alpha = 0.0;
  int Ms = 200;        // transitions per round
  int K = 50;          // rounds
  double eta = 0.2;
  double sigma_pi = 0.1;
  int horizon = 20;
  int burn_in = -1;    // <0 resolves to horizon/2
  int thinning = 1;
  double ridge_scale = 1e-6;
  GradNormalization normalization = GradNormalization::kPerAgent;
  // Exploration-free learning-curve evaluation (0 episodes disables it):
  // the mean policy (clipped, no noise) is rolled on a fixed eval seed and the
  // per-step global mean reward is logged per round.
  int eval_episodes = 0;
  int eval_horizon = 0;
  std::uint64_t eval_seed = 0x45564cULL;
  std::uint64_t map_seed_offset = 77;

  int resolved_burn_in() const { return burn_in < 0 ? horizon / 2 : burn_in; }

  void validate() const {
    if (kappa < 0 || kappa_pi < 0) throw ConfigError("config: kappa and kappa_pi must be >= 0");
    if (m < 1) throw ConfigError("config: m must be >= 1");
    if (Ms < 1) throw ConfigError("config: ms must be >= 1");
    if (K < 1) throw ConfigError("config: k_rounds must be >= 1");
    if (sigma_pi <= 0) throw ConfigError("config: sigma_pi must be positive");
    if (alpha < 0 || alpha >= 1) throw ConfigError("config: alpha must lie in [0,1)");
    if (thinning < 1) throw ConfigError("config: thinning must be >= 1");
    if (horizon < 1) throw ConfigError("config: horizon must be >= 1");
    if (resolved_burn_in() >= horizon)
      throw ConfigError("config: burn_in must leave room inside the horizon");
  }
};

struct TrainRecord {
  int round = 0;
  double return_estimate = 0.0;    // mean over episodes of Σ γ^t r̄(t)
  double batch_mean_reward = 0.0;  // mean per-step global reward of the batch
  double eval_mean_reward = std::numeric_limits<double>::quiet_NaN();
  double L_max = 0.0;              // worst max-feature-norm across agents
  double D_max = 0.0;              // worst ‖(M+λI)⁻¹‖ across agents
  double grad_norm_mean = 0.0;
  double wall_ms = 0.0;
};

using TrainLog = std::vector<TrainRecord>;

// Burn-in + thinning surrogate for i.i.d. draws from the stationary
// distribution: roll ceil(Ms/kept-per-episode) episodes of the configured
// horizon, discard the first burn_in steps of each, keep every thinning-th
// transition, truncate to exactly Ms rows. a' is resampled fresh from the
// policy at s' on its own noise stream.
template <class Env>
TransitionDataset sample_stationary_batch(const Env& env, const LocalizedGaussianPolicy& policy,
                                          int Ms, int burn_in, int thinning, int horizon,
                                          std::uint64_t seed) {
  if (burn_in < 0 || thinning < 1 || Ms < 1)
    throw ConfigError("sample_stationary_batch: bad sampling parameters");
  if (horizon <= burn_in)
    throw ConfigError("sample_stationary_batch: horizon too short for the requested burn-in");
  const int kept_per_ep = (horizon - burn_in - 1) / thinning + 1;
  const int n_ep = (Ms + kept_per_ep - 1) / kept_per_ep;
  const int n = env.n();

  TransitionDataset ds;
  ds.seed = seed;
  ds.horizon = horizon;
  ds.burn_in = burn_in;
  ds.thinning = thinning;
  ds.S.resize(n_ep * kept_per_ep, n);
  ds.A.resize(n_ep * kept_per_ep, n);
  ds.SP.resize(n_ep * kept_per_ep, n);
  ds.AP.resize(n_ep * kept_per_ep, n);

  Eigen::MatrixXd X = env.reset_batch(n_ep, seed);
  Eigen::VectorXd ep_return = Eigen::VectorXd::Zero(n_ep);
  double disc = 1.0;
  int filled = 0;
  for (int t = 0; t < horizon; ++t) {
    Eigen::MatrixXd U = policy.sample_batch(X, seed, t, kStreamPolicy);
    if (!X.allFinite() || !U.allFinite())
      throw NumericalError("sample_stationary_batch: non-finite state or action");
    Eigen::MatrixXd R = env.reward(X, U);
    ep_return += disc * R.rowwise().mean();
    disc *= env.gamma();
    Eigen::MatrixXd Xn = env.add_noise_batch(env.step_mean(X, U), seed, t);
    if (t >= burn_in && (t - burn_in) % thinning == 0) {
      Eigen::MatrixXd Un = policy.sample_batch(Xn, seed, t, kStreamAprime);
      ds.S.middleRows(filled * n_ep, n_ep) = X;
      ds.A.middleRows(filled * n_ep, n_ep) = U;
      ds.SP.middleRows(filled * n_ep, n_ep) = Xn;
      ds.AP.middleRows(filled * n_ep, n_ep) = Un;
      ++filled;
    }
    X = Xn;
  }
  ds.S.conservativeResize(Ms, n);
  ds.A.conservativeResize(Ms, n);
  ds.SP.conservativeResize(Ms, n);
  ds.AP.conservativeResize(Ms, n);
  ds.return_estimate = ep_return.mean();
  return ds;
}

// One evaluate-then-update round of the main loop plus experiment plumbing.
template <class Env>
class Trainer {
 public:
  Trainer(const Env& env, const ExperimentConfig& cfg, std::uint64_t seed)
      : env_(env), cfg_(cfg), seed_(seed),
        policy_(env.topology(), cfg.kappa_pi, cfg.sigma_pi, env.amax()) {
    cfg_.validate();
    maps_.reserve(env.n());
    for (int i = 0; i < env.n(); ++i)
      maps_.push_back(sample_feature_map(env_, i, cfg_.kappa, cfg_.m, cfg_.alpha,
                                         mix(seed, cfg_.map_seed_offset)));
  }

  const LocalizedGaussianPolicy& policy() const { return policy_; }
  const std::vector<RandomFeatureMap>& maps() const { return maps_; }
  const std::vector<CriticWeights>& critics() const { return critics_; }

  TrainRecord run_round(int k) {
    auto t0 = std::chrono::steady_clock::now();
    const int n = env_.n();
    TransitionDataset ds =
        sample_stationary_batch(env_, policy_, cfg_.Ms, cfg_.resolved_burn_in(), cfg_.thinning,
                                cfg_.horizon, mix(seed_, 0x726f756eULL, k));

    Eigen::MatrixXd F = env_.step_mean(ds.S, ds.A);
    Eigen::MatrixXd FP = env_.step_mean(ds.SP, ds.AP);
    Eigen::MatrixXd R = env_.reward(ds.S, ds.A);
    Eigen::MatrixXd RP = env_.reward(ds.SP, ds.AP);

    TrainRecord rec;
    rec.round = k;
    rec.return_estimate = ds.return_estimate;
    rec.batch_mean_reward = R.mean();

    critics_.clear();
    critics_.reserve(n);
    Eigen::MatrixXd Qhat(ds.size(), n);
    for (int i = 0; i < n; ++i) {
      Eigen::MatrixXd Phi = build_augmented(maps_[i], F, R.col(i));
      Eigen::MatrixXd PhiP = build_augmented(maps_[i], FP, RP.col(i));
      LstdMatrices mats = lstd_matrices(Phi, PhiP, env_.gamma());
      CriticWeights cw = lstd_solve(mats, default_ridge(mats.H, cfg_.ridge_scale));
      Qhat.col(i) = Phi * cw.w;
      rec.L_max = std::max(rec.L_max, cw.L);
      rec.D_max = std::max(rec.D_max, cw.D);
      critics_.push_back(std::move(cw));
    }

    std::vector<Eigen::VectorXd> grads =
        gradient_estimate(policy_, env_.topology(), Qhat, ds.S, ds.A, cfg_.kappa);
    for (const auto& g : grads) rec.grad_norm_mean += g.norm();
    rec.grad_norm_mean /= static_cast<double>(n);
    normalized_update(policy_, grads, cfg_.eta, cfg_.normalization);

    if (cfg_.eval_episodes > 0) rec.eval_mean_reward = eval_mean_reward();
    rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                      .count();
    return rec;
  }

  TrainLog run() {
    TrainLog log;
    log.reserve(cfg_.K);
    for (int k = 0; k < cfg_.K; ++k) log.push_back(run_round(k));
    return log;
  }

  // Mean per-step global reward of the current MEAN policy (no exploration),
  // on a fixed evaluation seed: common random numbers across rounds.
  double eval_mean_reward() const {
    if (cfg_.eval_episodes <= 0) throw ConfigError("eval_episodes must be positive to evaluate");
    const int horizon = cfg_.eval_horizon > 0 ? cfg_.eval_horizon : cfg_.horizon;
    Eigen::MatrixXd X = env_.reset_batch(cfg_.eval_episodes, cfg_.eval_seed);
    double acc = 0.0;
    for (int t = 0; t < horizon; ++t) {
      Eigen::MatrixXd U = policy_.mean_actions(X).cwiseMax(-env_.amax()).cwiseMin(env_.amax());
      acc += env_.reward(X, U).mean();
      X = env_.add_noise_batch(env_.step_mean(X, U), cfg_.eval_seed, t);
    }
    return acc / horizon;
  }

 private:
  Env env_;
  ExperimentConfig cfg_;
  std::uint64_t seed_;
  LocalizedGaussianPolicy policy_;
  std::vector<RandomFeatureMap> maps_;
  std::vector<CriticWeights> critics_;
};

inline int mc_horizon(double gamma, double rel_tol = 1e-3) {
  return static_cast<int>(std::ceil(std::log(1.0 / rel_tol) / std::log(1.0 / gamma)));
}

// Per-rollout discounted returns (rollouts x agents) from a fixed start
// (s, a): the first action is a, afterwards the policy acts.
template <class Env>
Eigen::MatrixXd monte_carlo_q_rollouts(const Env& env, const LocalizedGaussianPolicy& policy,
                                       const Eigen::VectorXd& s, const Eigen::VectorXd& a,
                                       int horizon, int n_rollouts, std::uint64_t seed) {
  const int n = env.n();
  Eigen::MatrixXd X = s.transpose().replicate(n_rollouts, 1);
  Eigen::MatrixXd U = a.transpose().replicate(n_rollouts, 1);
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(n_rollouts, n);
  double disc = 1.0;
  for (int t = 0; t < horizon; ++t) {
    acc += disc * env.reward(X, U);
    disc *= env.gamma();
    X = env.add_noise_batch(env.step_mean(X, U), seed, t);
    U = policy.sample_batch(X, seed, t + 1, kStreamPolicy);
  }
  return acc;
}

template <class Env>
Eigen::VectorXd monte_carlo_q(const Env& env, const LocalizedGaussianPolicy& policy,
                              const Eigen::VectorXd& s, const Eigen::VectorXd& a, int horizon,
                              int n_rollouts, std::uint64_t seed) {
  return monte_carlo_q_rollouts(env, policy, s, a, horizon, n_rollouts, seed).colwise().mean();
}

template <class Env>
Eigen::MatrixXd monte_carlo_q_batch(const Env& env, const LocalizedGaussianPolicy& policy,
                                    const Eigen::MatrixXd& S, const Eigen::MatrixXd& A,
                                    int horizon, int n_rollouts, std::uint64_t seed) {
  Eigen::MatrixXd Q(S.rows(), env.n());
  for (Eigen::Index p = 0; p < S.rows(); ++p)
    Q.row(p) = monte_carlo_q(env, policy, S.row(p).transpose(), A.row(p).transpose(), horizon,
                             n_rollouts, mix(seed, 0x70726f62ULL, p))
                   .transpose();
  return Q;
}

struct DecayProbeResult {
  double max_dq = 0.0;       // max over pairs of |Q̂_i(s,a) − Q̂_i(s̃,ã)|
  double bound = 0.0;        // γ^{κ+1} r̄ / (1−γ)
  double se_at_max = 0.0;    // MC standard error of the difference at the argmax pair
  double mean_dq = 0.0;
};

// Exponential-decay probe: pairs agree on N_i^κ and are resampled outside;
// both members share rollout noise (common random numbers), so κ ≥ diameter
// yields exactly zero and the difference estimator has tiny variance.
// The bound γ^{κ+1}·r̄/(1−γ) assumes rewards in [0, r̄]; the affine shift
// r → r + r̄ that establishes this cancels in every Q difference, so ΔQ is
// computed from raw rewards unchanged.
template <class Env>
DecayProbeResult decay_probe(const Env& env, const LocalizedGaussianPolicy& policy, int agent,
                             int kappa, int n_pairs, int horizon, int n_rollouts,
                             std::uint64_t seed) {
  const double rbar = env.rbar();
  if (!std::isfinite(rbar))
    throw ConfigError("decay_probe: environment has unbounded rewards (rbar is infinite)");
  std::vector<int> win = env.topology().khop(agent, kappa);

  DecayProbeResult res;
  res.bound = std::pow(env.gamma(), kappa + 1) * rbar / (1.0 - env.gamma());
  for (int p = 0; p < n_pairs; ++p) {
    NoiseChannel c1(mix(seed, 0xa1, p), 0), c2(mix(seed, 0xa2, p), 0);
    Eigen::VectorXd s = env.reset(c1), s2 = env.reset(c2);
    Eigen::VectorXd a = policy.sample(s, c1, 0), a2 = policy.sample(s2, c2, 0);
    for (int j : win) {
      s2[j] = s[j];
      a2[j] = a[j];
    }
    std::uint64_t roll_seed = mix(seed, 0xcdULL, p);
    Eigen::VectorXd dq = (monte_carlo_q_rollouts(env, policy, s, a, horizon, n_rollouts, roll_seed) -
                          monte_carlo_q_rollouts(env, policy, s2, a2, horizon, n_rollouts, roll_seed))
                             .col(agent);
    double mean = dq.mean();
    double var = n_rollouts > 1 ? (dq.array() - mean).square().sum() / (n_rollouts - 1) : 0.0;
    double se = std::sqrt(var / n_rollouts);
    res.mean_dq += std::abs(mean) / n_pairs;
    if (std::abs(mean) > res.max_dq) {
      res.max_dq = std::abs(mean);
      res.se_at_max = se;
    }
  }
  return res;
}

// Mean absolute critic error over probe pairs and agents against a
// ground-truth Q matrix (probes x agents), e.g. from monte_carlo_q_batch.
template <class Env>
double policy_eval_probe(const Env& env, const std::vector<RandomFeatureMap>& maps,
                         const std::vector<CriticWeights>& critics, const Eigen::MatrixXd& Sprobe,
                         const Eigen::MatrixXd& Aprobe, const Eigen::MatrixXd& Qtrue) {
  const int n = env.n();
  if (static_cast<int>(maps.size()) != n || static_cast<int>(critics.size()) != n)
    throw ConfigError("policy_eval_probe: need one map and critic per agent");
  Eigen::MatrixXd F = env.step_mean(Sprobe, Aprobe);
  Eigen::MatrixXd R = env.reward(Sprobe, Aprobe);
  double err = 0.0;
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd qh = build_augmented(maps[i], F, R.col(i)) * critics[i].w;
    err += (qh - Qtrue.col(i)).cwiseAbs().mean();
  }
  return err / n;
}

// Runs one Trainer per seed, at most `threads` concurrently.
template <class Env>
std::vector<TrainLog> run_seeds(const Env& env, const ExperimentConfig& cfg,
                                const std::vector<std::uint64_t>& seeds, int threads = 1) {
  std::vector<TrainLog> logs(seeds.size());
  if (threads < 1) threads = 1;
  std::size_t next = 0;
  while (next < seeds.size()) {
    std::size_t batch = std::min<std::size_t>(threads, seeds.size() - next);
    std::vector<std::future<TrainLog>> futs;
    for (std::size_t j = 0; j < batch; ++j)
      futs.push_back(std::async(std::launch::async, [&env, &cfg, seed = seeds[next + j]] {
        return Trainer<Env>(env, cfg, seed).run();
      }));
    for (std::size_t j = 0; j < batch; ++j) logs[next + j] = futs[j].get();
    next += batch;
  }
  return logs;
}

}  // namespace netspec

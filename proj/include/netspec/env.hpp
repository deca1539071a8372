#pragma once

#include <utility>

#include <Eigen/Dense>

#include "netspec/errors.hpp"
#include "netspec/rng.hpp"
#include "netspec/topology.hpp"
#include "netspec/window.hpp"

namespace netspec {

// Global network state: one scalar block per agent (S=1 for both built-in
// environments) plus the time index that keys counter-based noise.
struct GlobalState {
  Eigen::VectorXd x;
  long t = 0;
};

// Environments are duck-typed; the expected surface is:
//   topology(), n(), gamma(), noise_std(), amax(), rbar()
//   step_mean(x, a) / step_mean(X, A)        deterministic part f(s, a)
//   reward(x, a)    / reward(X, A)           per-agent rewards at (s, a)
//   add_noise(mean, ch, t) / add_noise_batch(Mean, seed, t)
//   reset(ch) / reset_batch(episodes, seed)
// The helpers below implement the shared stepping/locality logic on top.

// One transition: rewards are evaluated at the pre-transition (s, a).
template <class Env>
std::pair<GlobalState, Eigen::VectorXd> step(const Env& env, const GlobalState& s,
                                             const Eigen::VectorXd& a, const NoiseChannel& ch) {
  if (!s.x.allFinite() || !a.allFinite())
    throw NumericalError("env step: non-finite state or action");
  Eigen::VectorXd r = env.reward(s.x, a);
  GlobalState next{env.add_noise(env.step_mean(s.x, a), ch, s.t), s.t + 1};
  return {next, r};
}

// Concatenation of f_j(s_{N_j}, a_{N_j}) over j in khop(i, kappa), sorted order.
template <class Env>
Eigen::VectorXd local_mean(const Env& env, const Eigen::VectorXd& x, const Eigen::VectorXd& a,
                           int i, int kappa) {
  LocalWindow w = LocalWindow::make(env.topology(), i, kappa);
  return w.extract(env.step_mean(x, a));
}

}  // namespace netspec

// netspec: multi-agent network-MDP control toolkit CLI.
//
// Subcommands:
//   run          train localized policies across seeds, emit per-seed CSVs
//   kernel-check random-feature kernel approximation sweep over m
//   decay-check  measured Q-sensitivity vs the exponential-decay bound
//   oracle       discounted-LQR reference solution for the thermal model
//
// Exit codes: 0 success, 2 config error, 3 numerical failure.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

#include "json.hpp"

#include "CLI11.hpp"
#include "netspec/netspec.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace netspec;

namespace {

int worker_threads(std::size_t jobs) {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  unsigned cap = hw;
  if (const char* env = std::getenv("NETSPEC_THREADS")) {
    try {
      long v = std::stol(env);
      if (v < 1) throw std::invalid_argument(env);
      cap = static_cast<unsigned>(std::min<long>(v, hw));
    } catch (const std::exception&) {
      throw ConfigError(std::string("NETSPEC_THREADS: expected positive integer, got '") + env +
                        "'");
    }
  }
  return static_cast<int>(std::min<std::size_t>(cap, std::max<std::size_t>(jobs, 1)));
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    try {
      out.push_back(std::stoull(item));
    } catch (const std::exception&) {
      throw ConfigError("--seed-override: expected unsigned integer list, got '" + item + "'");
    }
  }
  if (out.empty()) throw ConfigError("--seed-override: empty seed list");
  return out;
}

json echo_config(const ConfigMap& cfg) {
  json j = json::object();
  for (const auto& [k, v] : cfg.entries()) j[k] = v;
  return j;
}

void write_manifest(const fs::path& dir, const std::string& command,
                    const std::string& config_path, const std::string& config_text,
                    const json& resolved, const std::vector<std::uint64_t>& seeds,
                    const std::vector<std::string>& outputs) {
  json m;
  m["schema"] = "v1";
  m["command"] = command;
  m["config_path"] = config_path;
  m["config_hash"] = fnv1a64_hex(config_text);
  m["resolved"] = resolved;
  m["seeds"] = seeds;
  m["outputs"] = outputs;
  std::ofstream f(dir / "manifest.json");
  if (!f) throw ConfigError("cannot open output file: " + (dir / "manifest.json").string());
  f << m.dump(2) << "\n";
}

json train_echo(const RunConfig& rc) {
  const ExperimentConfig& t = rc.train;
  json j{{"env", rc.env_name},
         {"kappa", t.kappa},
         {"kappa_pi", t.kappa_pi},
         {"m", t.m},
         {"alpha", t.alpha},
         {"ms", t.Ms},
         {"k_rounds", t.K},
         {"eta", t.eta},
         {"sigma_pi", t.sigma_pi},
         {"horizon", t.horizon},
         {"burn_in", t.resolved_burn_in()},
         {"thinning", t.thinning},
         {"ridge_scale", t.ridge_scale},
         {"eval_episodes", t.eval_episodes},
         {"eval_horizon", t.eval_horizon},
         {"normalize", t.normalization == GradNormalization::kPerAgent ? "per_agent" : "global"},
         {"out", rc.out_dir}};
  if (rc.env_name == "thermal") {
    const ThermalParams& p = rc.thermal;
    j["env_params"] = {{"n", p.n},           {"delta", p.delta},
                       {"v", p.v},           {"zeta_i", p.zeta_i},
                       {"zeta_ij", p.zeta_ij}, {"alpha_i", p.alpha},
                       {"beta", p.beta},     {"theta_out", p.theta_out},
                       {"theta_star", p.theta_star}, {"rho", p.rho},
                       {"gamma", p.gamma},   {"x0_std", p.x0_std}};
  } else {
    const KuramotoParams& p = rc.kuramoto;
    j["env_params"] = {{"n", p.n},           {"dt", p.dt},
                       {"omega_target", p.omega_target}, {"amax", p.amax},
                       {"noise_std", p.noise_std}, {"gamma", p.gamma},
                       {"k_lo", p.k_lo},     {"k_hi", p.k_hi},
                       {"w_lo", p.w_lo},     {"w_hi", p.w_hi},
                       {"param_seed", p.param_seed}};
  }
  return j;
}

// One evaluation rollout of the policy (exploration on), one row per (t, agent).
template <class Env>
void dump_trajectory(const Env& env, const LocalizedGaussianPolicy& policy, int steps,
                     std::uint64_t seed, const fs::path& path) {
  CsvWriter csv(path.string(), {"t", "agent", "state", "action", "reward"});
  NoiseChannel ch(mix(seed, 0x7472616aULL), 0);
  Eigen::VectorXd x = env.reset(ch);
  for (int t = 0; t < steps; ++t) {
    Eigen::VectorXd a = policy.sample(x, ch, t);
    Eigen::VectorXd r = env.reward(x, a);
    for (int i = 0; i < env.n(); ++i)
      csv.row(std::vector<double>{static_cast<double>(t), static_cast<double>(i), x[i], a[i],
                                  r[i]});
    x = env.add_noise(env.step_mean(x, a), ch, t);
  }
}

template <class Env>
int run_with_env(const Env& env, RunConfig& rc, const ConfigMap& cfg,
                 const std::string& config_path, const fs::path& out, int dump_steps) {
  fs::create_directories(out);
  const bool thermal = rc.env_name == "thermal";
  double optimal_cost = 0.0;
  if (thermal) {
    if constexpr (std::is_same_v<Env, ThermalEnv>) {
      LinearSystem sys = hvac_to_lqr(env);
      RiccatiResult ric = riccati_solve(sys);
      optimal_cost = lqr_cost(sys, ric.K);
    }
  }

  std::vector<TrainLog> logs = run_seeds(env, rc.train, rc.seeds, worker_threads(rc.seeds.size()));

  std::vector<std::string> outputs;
  std::vector<std::string> cols = {"round",    "seed",  "return_estimate", "batch_mean_reward",
                                   "eval_mean_reward", "l_max", "d_max",   "grad_norm_mean"};
  if (thermal) {
    cols.push_back("cost_estimate");
    cols.push_back("optimal_cost");
  }
  for (std::size_t s = 0; s < rc.seeds.size(); ++s) {
    std::string name = "train_seed" + std::to_string(rc.seeds[s]) + ".csv";
    CsvWriter csv((out / name).string(), cols);
    for (const TrainRecord& r : logs[s]) {
      std::vector<double> row = {static_cast<double>(r.round),
                                 static_cast<double>(rc.seeds[s]),
                                 r.return_estimate,
                                 r.batch_mean_reward,
                                 r.eval_mean_reward,
                                 r.L_max,
                                 r.D_max,
                                 r.grad_norm_mean};
      if (thermal) {
        row.push_back(-static_cast<double>(env.n()) * r.return_estimate);
        row.push_back(optimal_cost);
      }
      csv.row(row);
    }
    outputs.push_back(name);

    if (dump_steps > 0) {
      std::string tname = "traj_seed" + std::to_string(rc.seeds[s]) + ".csv";
      LocalizedGaussianPolicy pol(env.topology(), rc.train.kappa_pi, rc.train.sigma_pi,
                                  env.amax());
      dump_trajectory(env, pol, dump_steps, rc.seeds[s], out / tname);
      outputs.push_back(tname);
    }
  }

  json resolved = train_echo(rc);
  if (thermal) resolved["optimal_cost"] = optimal_cost;
  write_manifest(out, "run", config_path, cfg.text(), resolved, rc.seeds, outputs);
  outputs.push_back("manifest.json");
  std::cout << "run: " << rc.seeds.size() << " seed(s), " << rc.train.K
            << " round(s) each -> " << out.string() << "\n";
  for (std::size_t s = 0; s < rc.seeds.size(); ++s) {
    const TrainRecord& last = logs[s].back();
    std::cout << "  seed " << rc.seeds[s] << ": return_estimate=" << format_double(
                     last.return_estimate);
    if (thermal)
      std::cout << " cost_estimate=" << format_double(-env.n() * last.return_estimate)
                << " optimal_cost=" << format_double(optimal_cost);
    std::cout << "\n";
  }
  return 0;
}

int cmd_run(const std::string& config_path, const std::string& seed_override,
            const std::string& out_flag, int dump_steps) {
  ConfigMap cfg = ConfigMap::from_file(config_path);
  RunConfig rc = load_run_config(cfg);
  if (!seed_override.empty()) rc.seeds = parse_seed_list(seed_override);
  fs::path out = out_flag.empty() ? fs::path(rc.out_dir) : fs::path(out_flag);
  if (rc.env_name == "thermal")
    return run_with_env(ThermalEnv(rc.thermal), rc, cfg, config_path, out, dump_steps);
  return run_with_env(KuramotoEnv(rc.kuramoto), rc, cfg, config_path, out, dump_steps);
}

int cmd_kernel_check(double sigma, double alpha, const std::string& m_list, int dim, int pairs,
                     double span, int trials, std::uint64_t seed, const std::string& out_flag) {
  if (sigma <= 0) throw ConfigError("--sigma must be positive");
  if (alpha != 0.0) throw ConfigError("kernel-check requires --alpha 0 (Gaussian kernel case)");
  if (pairs < 1 || trials < 1 || dim < 1) throw ConfigError("--pairs, --trials, --dim must be >= 1");
  std::vector<long> ms;
  for (const std::string& item : [&] {
         std::vector<std::string> parts;
         std::istringstream in(m_list);
         std::string cur;
         while (std::getline(in, cur, ',')) parts.push_back(cur);
         return parts;
       }()) {
    try {
      long v = std::stol(item);
      if (v < 1) throw std::invalid_argument(item);
      ms.push_back(v);
    } catch (const std::exception&) {
      throw ConfigError("--m: expected positive integer list, got '" + item + "'");
    }
  }
  if (ms.empty()) throw ConfigError("--m: empty list");

  // Evaluation pairs drawn once, shared across every m and trial.
  Rng grid_rng(mix(seed, 0x67726964ULL));
  std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>> grid;
  grid.reserve(pairs);
  for (int p = 0; p < pairs; ++p) {
    Eigen::VectorXd x(dim), y(dim);
    for (int j = 0; j < dim; ++j) x[j] = grid_rng.uniform(-span, span);
    for (int j = 0; j < dim; ++j) y[j] = grid_rng.uniform(-span, span);
    grid.emplace_back(std::move(x), std::move(y));
  }

  // The feature map is agnostic to which window produced its input, so a
  // star topology hub gives an arbitrary-dimension window: hub + dim-1 leaves.
  std::vector<std::pair<int, int>> edges;
  for (int j = 1; j < dim; ++j) edges.emplace_back(0, j);
  Topology topo = dim >= 2 ? Topology(dim, edges) : Topology(1, {});

  fs::path out = out_flag.empty() ? fs::path("out-kernel") : fs::path(out_flag);
  fs::create_directories(out);
  CsvWriter csv((out / "kernel.csv").string(), {"m", "median_gap", "p95_gap"});

  std::vector<double> log_m, log_gap;
  for (long m : ms) {
    std::vector<double> gaps(trials);
    for (int t = 0; t < trials; ++t) {
      RandomFeatureMap map(topo, 0, dim >= 2 ? 1 : 0, static_cast<int>(m), 0.0, sigma,
                           mix(seed, static_cast<std::uint64_t>(m), static_cast<std::uint64_t>(t)));
      gaps[t] = kernel_gap(map, grid);
    }
    std::sort(gaps.begin(), gaps.end());
    double median = gaps[gaps.size() / 2];
    double p95 = gaps[std::min(gaps.size() - 1,
                               static_cast<std::size_t>(std::ceil(0.95 * gaps.size())) - 1)];
    csv.row(std::vector<double>{static_cast<double>(m), median, p95});
    log_m.push_back(std::log(static_cast<double>(m)));
    log_gap.push_back(std::log(median));
  }

  double slope = 0.0;
  if (ms.size() >= 2) {
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < log_m.size(); ++i) {
      mx += log_m[i];
      my += log_gap[i];
    }
    mx /= log_m.size();
    my /= log_m.size();
    double num = 0, den = 0;
    for (std::size_t i = 0; i < log_m.size(); ++i) {
      num += (log_m[i] - mx) * (log_gap[i] - my);
      den += (log_m[i] - mx) * (log_m[i] - mx);
    }
    slope = num / den;
  }

  json resolved{{"sigma", sigma}, {"alpha", alpha},   {"m", ms},
                {"dim", dim},     {"pairs", pairs},   {"span", span},
                {"trials", trials}, {"slope", slope}};
  std::string flags = "sigma=" + format_double(sigma) + " alpha=" + format_double(alpha) +
                      " m=" + m_list + " dim=" + std::to_string(dim) +
                      " pairs=" + std::to_string(pairs) + " span=" + format_double(span) +
                      " trials=" + std::to_string(trials) + " seed=" + std::to_string(seed);
  write_manifest(out, "kernel-check", "<flags>", flags, resolved, {seed}, {"kernel.csv"});
  std::cout << "kernel-check: slope(log median_gap vs log m) = " << format_double(slope) << "\n";
  return 0;
}

int cmd_decay_check(const std::string& config_path, const std::string& out_flag) {
  ConfigMap cfg = ConfigMap::from_file(config_path);
  RunConfig rc = load_run_config(cfg, /*require_train_kappa=*/false);
  fs::path out = out_flag.empty() ? fs::path(rc.out_dir) : fs::path(out_flag);
  fs::create_directories(out);

  auto probe_env = [&](const auto& env) {
    LocalizedGaussianPolicy policy(env.topology(), rc.train.kappa_pi, rc.train.sigma_pi,
                                   env.amax());
    int horizon = mc_horizon(env.gamma(), rc.decay_mc_tail);
    CsvWriter csv((out / "decay.csv").string(), {"kappa", "max_dq", "bound", "mc_se"});
    for (int k = rc.decay_kappa_min; k <= rc.decay_kappa_max; ++k) {
      DecayProbeResult r = decay_probe(env, policy, rc.decay_agent, k, rc.decay_pairs, horizon,
                                       rc.decay_rollouts, rc.seeds[0]);
      csv.row(std::vector<double>{static_cast<double>(k), r.max_dq, r.bound, r.se_at_max});
      std::cout << "  kappa=" << k << " max_dq=" << format_double(r.max_dq)
                << " bound=" << format_double(r.bound) << "\n";
    }
  };
  if (rc.env_name == "thermal")
    throw ConfigError(
        "decay-check: thermal rewards are unbounded (rbar infinite); use a kuramoto config");
  probe_env(KuramotoEnv(rc.kuramoto));

  write_manifest(out, "decay-check", config_path, cfg.text(), train_echo(rc), rc.seeds,
                 {"decay.csv"});
  return 0;
}

int cmd_oracle(const std::string& config_path, const std::string& out_flag) {
  ConfigMap cfg = ConfigMap::from_file(config_path);
  RunConfig rc = load_run_config(cfg, /*require_train_kappa=*/false);
  if (rc.env_name != "thermal")
    throw ConfigError("oracle: only the thermal (linear-quadratic) environment is supported");

  ThermalEnv env(rc.thermal);
  LinearSystem sys = hvac_to_lqr(env);
  RiccatiResult ric = riccati_solve(sys);
  Eigen::MatrixXd K0 = Eigen::MatrixXd::Zero(env.n(), env.n());

  json rep;
  rep["schema"] = "v1";
  rep["n"] = env.n();
  rep["gamma"] = env.gamma();
  rep["riccati_iters"] = ric.iters;
  rep["riccati_residual"] = ric.residual;
  rep["p_trace"] = ric.P.trace();
  rep["optimal_cost"] = lqr_cost(sys, ric.K);
  rep["zero_controller_cost"] = lqr_cost(sys, K0);
  std::vector<std::vector<double>> K(env.n(), std::vector<double>(env.n()));
  for (int i = 0; i < env.n(); ++i)
    for (int j = 0; j < env.n(); ++j) K[i][j] = ric.K(i, j);
  rep["K"] = K;

  std::cout << rep.dump(2) << "\n";
  if (!out_flag.empty()) {
    fs::path out(out_flag);
    fs::create_directories(out);
    std::ofstream f(out / "oracle.json");
    if (!f) throw ConfigError("cannot open output file: " + (out / "oracle.json").string());
    f << rep.dump(2) << "\n";
    write_manifest(out, "oracle", config_path, cfg.text(), rep, {}, {"oracle.json"});
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-agent network-MDP control toolkit"};
  app.require_subcommand(1);

  std::string config_path, seed_override, out_flag;
  int dump_steps = 0;
  CLI::App* run = app.add_subcommand("run", "train localized policies across seeds");
  run->add_option("--config", config_path, "config file")->required();
  run->add_option("--seed-override", seed_override, "comma-separated seeds replacing the config");
  run->add_option("--out", out_flag, "output directory (overrides config)");
  run->add_option("--dump-traj", dump_steps, "also dump a trajectory CSV of this many steps");

  double ks_sigma = 1.0, ks_alpha = 0.0, ks_span = 2.0;
  std::string ks_m = "64,128,256,512,1024,2048,4096";
  int ks_dim = 3, ks_pairs = 200, ks_trials = 31;
  std::uint64_t ks_seed = 0;
  std::string ks_out;
  CLI::App* ks = app.add_subcommand("kernel-check", "random-feature kernel approximation sweep");
  ks->add_option("--sigma", ks_sigma, "kernel bandwidth");
  ks->add_option("--alpha", ks_alpha, "importance exponent (must be 0)");
  ks->add_option("--m", ks_m, "comma-separated feature counts");
  ks->add_option("--dim", ks_dim, "input dimension");
  ks->add_option("--pairs", ks_pairs, "evaluation pairs");
  ks->add_option("--span", ks_span, "pairs drawn uniformly from [-span, span]^dim");
  ks->add_option("--trials", ks_trials, "fresh feature draws per m");
  ks->add_option("--seed", ks_seed, "random seed");
  ks->add_option("--out", ks_out, "output directory");

  std::string dc_config, dc_out;
  CLI::App* dc = app.add_subcommand("decay-check", "Q-sensitivity vs exponential-decay bound");
  dc->add_option("--config", dc_config, "config file")->required();
  dc->add_option("--out", dc_out, "output directory (overrides config)");

  std::string or_config, or_out;
  CLI::App* orc = app.add_subcommand("oracle", "discounted-LQR reference for the thermal model");
  orc->add_option("--config", or_config, "config file")->required();
  orc->add_option("--out", or_out, "also write oracle.json + manifest to this directory");

  try {
    app.parse(argc, argv);
    if (run->parsed()) return cmd_run(config_path, seed_override, out_flag, dump_steps);
    if (ks->parsed())
      return cmd_kernel_check(ks_sigma, ks_alpha, ks_m, ks_dim, ks_pairs, ks_span, ks_trials,
                              ks_seed, ks_out);
    if (dc->parsed()) return cmd_decay_check(dc_config, dc_out);
    if (orc->parsed()) return cmd_oracle(or_config, or_out);
    return 2;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  }
}

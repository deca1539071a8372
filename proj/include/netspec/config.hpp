#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "netspec/actor.hpp"
#include "netspec/errors.hpp"
#include "netspec/kuramoto.hpp"
#include "netspec/thermal.hpp"
#include "netspec/trainer.hpp"

namespace netspec {

// Structured key-value config: `key = value` lines, nested sections in
// brackets ([train], [env.thermal]), '#' comments, comma-separated lists.
// Every key must be consumed by the loader; leftovers are hard errors so a
// typo in kappa/m/ms can never silently run a wrong experiment.
class ConfigMap {
 public:
  static ConfigMap from_string(const std::string& text, const std::string& origin = "<string>") {
    ConfigMap c;
    c.text_ = text;
    c.origin_ = origin;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']')
          throw ConfigError(origin + ":" + std::to_string(lineno) + ": malformed section header");
        section = trim(line.substr(1, line.size() - 2));
        continue;
      }
      auto eq = line.find('=');
      if (eq == std::string::npos)
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
      std::string key = trim(line.substr(0, eq));
      std::string val = trim(line.substr(eq + 1));
      if (key.empty()) throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
      if (!section.empty()) key = section + "." + key;
      if (!kv_insert(c, key, val))
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
    }
    return c;
  }

  static ConfigMap from_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return from_string(ss.str(), path);
  }

  bool has(const std::string& key) const { return kv_.count(key) > 0; }
  const std::string& text() const { return text_; }
  const std::string& origin() const { return origin_; }

  std::string get_string(const std::string& key) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) throw ConfigError("missing required field '" + key + "'");
    seen_.insert(key);
    return it->second;
  }

  std::string get_string(const std::string& key, const std::string& dflt) const {
    return has(key) ? get_string(key) : dflt;
  }

  double get_double(const std::string& key) const { return parse_double(key, get_string(key)); }
  double get_double(const std::string& key, double dflt) const {
    return has(key) ? get_double(key) : dflt;
  }

  long get_int(const std::string& key) const {
    std::string v = get_string(key);
    try {
      std::size_t pos = 0;
      long out = std::stol(v, &pos);
      if (pos != v.size()) throw std::invalid_argument(v);
      return out;
    } catch (const std::exception&) {
      throw ConfigError("field '" + key + "': expected integer, got '" + v + "'");
    }
  }
  long get_int(const std::string& key, long dflt) const {
    return has(key) ? get_int(key) : dflt;
  }

  std::vector<std::uint64_t> get_uint_list(const std::string& key) const {
    std::vector<std::uint64_t> out;
    for (const std::string& item : split(get_string(key))) {
      try {
        if (item.front() == '-') throw std::invalid_argument(item);
        std::size_t pos = 0;
        out.push_back(std::stoull(item, &pos));
        if (pos != item.size()) throw std::invalid_argument(item);
      } catch (const std::exception&) {
        throw ConfigError("field '" + key + "': expected unsigned integer list, got '" + item + "'");
      }
    }
    return out;
  }

  std::vector<long> get_int_list(const std::string& key) const {
    std::vector<long> out;
    for (const std::string& item : split(get_string(key))) {
      try {
        std::size_t pos = 0;
        out.push_back(std::stol(item, &pos));
        if (pos != item.size()) throw std::invalid_argument(item);
      } catch (const std::exception&) {
        throw ConfigError("field '" + key + "': expected integer list, got '" + item + "'");
      }
    }
    return out;
  }

  // Call once loading is done; any never-read key is a config error.
  void reject_unknown_keys() const {
    std::vector<std::string> unknown;
    for (const auto& [k, v] : kv_)
      if (!seen_.count(k)) unknown.push_back(k);
    if (!unknown.empty()) {
      std::string msg = "unknown config key(s):";
      for (const auto& k : unknown) msg += " '" + k + "'";
      throw ConfigError(msg);
    }
  }

  std::map<std::string, std::string> entries() const { return kv_; }

 private:
  static bool kv_insert(ConfigMap& c, const std::string& k, const std::string& v) {
    return c.kv_.emplace(k, v).second;
  }

  static std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? "" : s.substr(b, e - b + 1);
  }

  // List items may be separated by commas, whitespace, or both.
  static std::vector<std::string> split(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
      if (c == ',' || std::isspace(static_cast<unsigned char>(c))) {
        if (!cur.empty()) out.push_back(cur);
        cur.clear();
      } else {
        cur.push_back(c);
      }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
  }

  double parse_double(const std::string& key, const std::string& v) const {
    try {
      std::size_t pos = 0;
      double out = std::stod(v, &pos);
      if (pos != v.size()) throw std::invalid_argument(v);
      return out;
    } catch (const std::exception&) {
      throw ConfigError("field '" + key + "': expected number, got '" + v + "'");
    }
  }

  std::map<std::string, std::string> kv_;
  mutable std::set<std::string> seen_;
  std::string text_, origin_;
};

// Fully resolved experiment description as loaded from a config file.
struct RunConfig {
  std::string env_name;  // "thermal" | "kuramoto"
  ThermalParams thermal;
  KuramotoParams kuramoto;
  ExperimentConfig train;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  std::string out_dir = "out";
  // decay-check settings
  int decay_kappa_min = 0, decay_kappa_max = 4;
  int decay_pairs = 20, decay_rollouts = 32, decay_agent = 0;
  double decay_mc_tail = 1e-3;
};

inline RunConfig load_run_config(const ConfigMap& cfg, bool require_train_kappa = true) {
  RunConfig rc;
  rc.env_name = cfg.get_string("env");
  if (rc.env_name != "thermal" && rc.env_name != "kuramoto")
    throw ConfigError("field 'env': expected 'thermal' or 'kuramoto', got '" + rc.env_name + "'");
  if (cfg.has("seeds")) rc.seeds = cfg.get_uint_list("seeds");
  if (rc.seeds.empty()) throw ConfigError("field 'seeds': need at least one seed");
  rc.out_dir = cfg.get_string("out", rc.out_dir);

  if (rc.env_name == "thermal") {
    ThermalParams& p = rc.thermal;
    p.n = static_cast<int>(cfg.get_int("env.thermal.n", p.n));
    p.delta = cfg.get_double("env.thermal.delta", p.delta);
    p.v = cfg.get_double("env.thermal.v", p.v);
    p.zeta_i = cfg.get_double("env.thermal.zeta_i", p.zeta_i);
    p.zeta_ij = cfg.get_double("env.thermal.zeta_ij", p.zeta_ij);
    p.alpha = cfg.get_double("env.thermal.alpha_i", p.alpha);
    p.beta = cfg.get_double("env.thermal.beta", p.beta);
    p.theta_out = cfg.get_double("env.thermal.theta_out", p.theta_out);
    p.theta_star = cfg.get_double("env.thermal.theta_star", p.theta_star);
    p.rho = cfg.get_double("env.thermal.rho", p.rho);
    p.gamma = cfg.get_double("env.thermal.gamma", p.gamma);
    p.x0_std = cfg.get_double("env.thermal.x0_std", p.x0_std);
  } else {
    if (cfg.get_string("env.kuramoto.preset", "final") == "draft")
      rc.kuramoto = KuramotoParams::draft();
    KuramotoParams& p = rc.kuramoto;
    p.n = static_cast<int>(cfg.get_int("env.kuramoto.n", p.n));
    p.dt = cfg.get_double("env.kuramoto.dt", p.dt);
    p.omega_target = cfg.get_double("env.kuramoto.omega_target", p.omega_target);
    p.amax = cfg.get_double("env.kuramoto.amax", p.amax);
    p.noise_std = cfg.get_double("env.kuramoto.noise_std", p.noise_std);
    p.gamma = cfg.get_double("env.kuramoto.gamma", p.gamma);
    p.k_lo = cfg.get_double("env.kuramoto.k_lo", p.k_lo);
    p.k_hi = cfg.get_double("env.kuramoto.k_hi", p.k_hi);
    p.w_lo = cfg.get_double("env.kuramoto.w_lo", p.w_lo);
    p.w_hi = cfg.get_double("env.kuramoto.w_hi", p.w_hi);
    p.param_seed = static_cast<std::uint64_t>(cfg.get_int("env.kuramoto.param_seed",
                                                          static_cast<long>(p.param_seed)));
  }

  ExperimentConfig& t = rc.train;
  if (rc.env_name == "kuramoto") {  // named presets
    t.horizon = 800;
    t.K = 200;
  }
  if (require_train_kappa || cfg.has("train.kappa"))
    t.kappa = static_cast<int>(cfg.get_int("train.kappa"));
  t.kappa_pi = static_cast<int>(cfg.get_int("train.kappa_pi", t.kappa_pi));
  t.m = static_cast<int>(cfg.get_int("train.m", t.m));
  t.alpha = cfg.get_double("train.alpha", t.alpha);
  t.Ms = static_cast<int>(cfg.get_int("train.ms", t.Ms));
  t.K = static_cast<int>(cfg.get_int("train.k_rounds", t.K));
  t.eta = cfg.get_double("train.eta", t.eta);
  t.sigma_pi = cfg.get_double("train.sigma_pi", t.sigma_pi);
  t.horizon = static_cast<int>(cfg.get_int("train.horizon", t.horizon));
  t.burn_in = static_cast<int>(cfg.get_int("train.burn_in", t.burn_in));
  t.thinning = static_cast<int>(cfg.get_int("train.thinning", t.thinning));
  t.ridge_scale = cfg.get_double("train.ridge_scale", t.ridge_scale);
  t.eval_episodes = static_cast<int>(cfg.get_int("train.eval_episodes", t.eval_episodes));
  t.eval_horizon = static_cast<int>(cfg.get_int("train.eval_horizon", t.eval_horizon));
  t.map_seed_offset = static_cast<std::uint64_t>(
      cfg.get_int("train.map_seed_offset", static_cast<long>(t.map_seed_offset)));
  std::string norm = cfg.get_string("train.normalize", "per_agent");
  if (norm == "per_agent") {
    t.normalization = GradNormalization::kPerAgent;
  } else if (norm == "global") {
    t.normalization = GradNormalization::kGlobal;
  } else {
    throw ConfigError("field 'train.normalize': expected 'per_agent' or 'global'");
  }

  rc.decay_kappa_min = static_cast<int>(cfg.get_int("decay.kappa_min", rc.decay_kappa_min));
  rc.decay_kappa_max = static_cast<int>(cfg.get_int("decay.kappa_max", rc.decay_kappa_max));
  rc.decay_pairs = static_cast<int>(cfg.get_int("decay.pairs", rc.decay_pairs));
  rc.decay_rollouts = static_cast<int>(cfg.get_int("decay.rollouts", rc.decay_rollouts));
  rc.decay_agent = static_cast<int>(cfg.get_int("decay.agent", rc.decay_agent));
  rc.decay_mc_tail = cfg.get_double("decay.mc_tail", rc.decay_mc_tail);

  cfg.reject_unknown_keys();
  rc.train.validate();
  return rc;
}

}  // namespace netspec

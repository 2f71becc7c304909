#pragma once

// Flat dotted-key experiment configuration: "key = value" lines with '#'
// comments.  Unknown keys and out-of-range values are rejected with the key
// name and line number.  parse_config returns a fully resolved config
// (auto defaults filled in), and serialize_config echoes it canonically, so
// serialize(parse(text)) parses back to an equal config.

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <tuple>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "kovi/agents.hpp"
#include "kovi/beta.hpp"
#include "kovi/kernel.hpp"
#include "kovi/numfmt.hpp"

namespace kovi {

enum class InitialStateMode { fixed, round_robin, uniform };

inline std::string to_string(InitialStateMode mode) {
  switch (mode) {
    case InitialStateMode::fixed: return "fixed";
    case InitialStateMode::round_robin: return "round-robin";
    case InitialStateMode::uniform: return "uniform";
  }
  throw std::logic_error("unreachable initial-state mode");
}

inline InitialStateMode initial_state_mode_from_string(const std::string& s) {
  if (s == "fixed") return InitialStateMode::fixed;
  if (s == "round-robin") return InitialStateMode::round_robin;
  if (s == "uniform") return InitialStateMode::uniform;
  throw std::invalid_argument("unknown initial-state mode '" + s + "'");
}

enum class RewardMode { random_uniform, constant };

inline std::string to_string(RewardMode mode) {
  return mode == RewardMode::random_uniform ? "random" : "constant";
}

inline RewardMode reward_mode_from_string(const std::string& s) {
  if (s == "random") return RewardMode::random_uniform;
  if (s == "constant") return RewardMode::constant;
  throw std::invalid_argument("unknown reward mode '" + s + "'");
}

struct RewardOverride {
  int h = 0, s = 0, a = 0;
  double value = 0.0;
  bool operator==(const RewardOverride&) const = default;
};

struct ExperimentConfig {
  // kernel.*
  KernelSpec kernel{KernelFamily::squared_exponential, 0.5, 1.0, 0.2};

  // mdp.*
  int mdp_states = 8;
  int mdp_actions = 3;
  int mdp_state_dim = 2;
  int mdp_action_dim = 1;
  int mdp_horizon = 3;
  int mdp_centers = 5;
  double mdp_perturbation = 0.1;
  std::uint64_t mdp_seed = 1;
  RewardMode reward_mode = RewardMode::random_uniform;
  double reward_constant = 1.0;
  std::vector<RewardOverride> reward_overrides;  // canonical: (h,s,a)-sorted
  std::string mdp_load_path;
  std::string mdp_save_path;

  // agent.*
  AgentKind agent_kind = AgentKind::kovi;
  double agent_rho = 1.0;
  double agent_clip = 0.0;  // 0 = resolve to mdp.horizon

  // beta.*
  BetaKind beta_kind = BetaKind::self_normalized;
  double beta_c_f = 1.0;
  double beta_sigma = -1.0;  // negative = resolve to horizon / 2
  double beta_delta = 0.05;
  double beta_constant_value = 1.0;
  double beta_cover_term = 0.0;
  bool beta_cover_auto = false;
  int beta_cover_dim = 1;

  // experiment.*
  int episodes = 200;
  int seeds = 1;
  std::uint64_t seed = 1;
  int initial_state = 0;
  InitialStateMode initial_state_mode = InitialStateMode::uniform;
  std::string output_path = "out.csv";
  bool timing = false;

  // coverage.*
  int coverage_trials = 500;
  int coverage_n = 30;
  int coverage_test_points = 25;
  int coverage_centers = 8;
  int coverage_dim = 1;
  double coverage_beta_scale = 1.0;

  // infogain.*
  int infogain_max_n = 32;
  int infogain_step = 1;

  bool operator==(const ExperimentConfig&) const = default;

  // Fill auto defaults and check cross-field consistency.  Safe to call on
  // an already-resolved config (idempotent).
  void resolve() {
    kernel.validate();
    if (beta_sigma < 0.0) beta_sigma = mdp_horizon / 2.0;
    if (agent_clip == 0.0) agent_clip = static_cast<double>(mdp_horizon);
    if (agent_clip != static_cast<double>(mdp_horizon))
      throw std::invalid_argument(
          "config: agent.clip must equal mdp.horizon (or 0 for auto)");
    if (mdp_load_path.empty() &&
        mdp_perturbation > 1.0 / mdp_states + 1e-15)
      throw std::invalid_argument(
          "config: mdp.perturbation must not exceed 1/mdp.states");
    for (const RewardOverride& o : reward_overrides)
      if (o.h < 0 || o.h >= mdp_horizon || o.s < 0 || o.s >= mdp_states ||
          o.a < 0 || o.a >= mdp_actions)
        throw std::invalid_argument("config: mdp.reward override out of range");
    if (initial_state_mode == InitialStateMode::fixed &&
        mdp_load_path.empty() && initial_state >= mdp_states)
      throw std::invalid_argument(
          "config: experiment.initial-state must name a valid state");
    // Canonical override order with last-one-wins duplicates.
    std::stable_sort(reward_overrides.begin(), reward_overrides.end(),
                     [](const RewardOverride& x, const RewardOverride& y) {
                       return std::tie(x.h, x.s, x.a) < std::tie(y.h, y.s, y.a);
                     });
    std::vector<RewardOverride> dedup;
    for (const RewardOverride& o : reward_overrides) {
      if (!dedup.empty() && dedup.back().h == o.h && dedup.back().s == o.s &&
          dedup.back().a == o.a)
        dedup.back().value = o.value;
      else
        dedup.push_back(o);
    }
    reward_overrides = std::move(dedup);
  }

  BetaSchedule beta_schedule() const {
    BetaSchedule sched;
    sched.kind = beta_kind;
    sched.c_f = beta_c_f;
    sched.sigma = std::max(beta_sigma, 0.0);
    sched.delta = beta_delta;
    sched.rho = agent_rho;
    sched.constant_value = beta_constant_value;
    sched.cover_term = beta_cover_term;
    sched.cover_auto = beta_cover_auto;
    sched.cover_dim = beta_cover_dim;
    return sched;
  }

  AgentConfig agent_config() const {
    AgentConfig cfg;
    cfg.kind = agent_kind;
    cfg.spec = kernel;
    cfg.rho = agent_rho;
    cfg.clip = agent_clip;
    cfg.beta = beta_schedule();
    return cfg;
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

inline double config_num(const std::string& key, const std::string& value) {
  if (value.empty())
    throw std::invalid_argument(key + ": expected a number");
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(value.c_str(), &end);
  if (end != value.c_str() + value.size() || errno == ERANGE)
    throw std::invalid_argument(key + ": bad number '" + value + "'");
  return v;
}

inline long long config_int(const std::string& key, const std::string& value,
                            long long lo, long long hi) {
  const double v = config_num(key, value);
  const long long i = static_cast<long long>(v);
  if (static_cast<double>(i) != v)
    throw std::invalid_argument(key + ": expected an integer, got '" + value + "'");
  if (i < lo || i > hi)
    throw std::invalid_argument(key + ": value " + value + " out of range [" +
                                std::to_string(lo) + ", " + std::to_string(hi) +
                                "]");
  return i;
}

inline bool config_bool(const std::string& key, const std::string& value) {
  if (value == "true") return true;
  if (value == "false") return false;
  throw std::invalid_argument(key + ": expected true or false");
}

inline double config_positive(const std::string& key, const std::string& value) {
  const double v = config_num(key, value);
  if (!(v > 0.0)) throw std::invalid_argument(key + ": must be positive");
  return v;
}

inline double config_nonneg(const std::string& key, const std::string& value) {
  const double v = config_num(key, value);
  if (!(v >= 0.0)) throw std::invalid_argument(key + ": must be nonnegative");
  return v;
}

// "mdp.reward.<h>.<s>.<a>" -> override entry.
inline RewardOverride parse_reward_key(const std::string& key,
                                       const std::string& value) {
  RewardOverride o;
  const std::string tail = key.substr(std::string("mdp.reward.").size());
  int parts[3] = {0, 0, 0};
  std::size_t pos = 0;
  for (int i = 0; i < 3; ++i) {
    const std::size_t dot = tail.find('.', pos);
    const bool last = (i == 2);
    const std::string tok =
        last ? tail.substr(pos) : tail.substr(pos, dot - pos);
    if (tok.empty() || (!last && dot == std::string::npos))
      throw std::invalid_argument(key + ": expected mdp.reward.<h>.<s>.<a>");
    parts[i] = static_cast<int>(config_int(key, tok, 0, 1 << 20));
    pos = dot + 1;
  }
  o.h = parts[0];
  o.s = parts[1];
  o.a = parts[2];
  o.value = config_num(key, value);
  if (o.value < 0.0 || o.value > 1.0)
    throw std::invalid_argument(key + ": rewards must lie in [0, 1]");
  return o;
}

inline void apply_config_key(ExperimentConfig& cfg, const std::string& key,
                             const std::string& value) {
  if (key == "kernel.family") cfg.kernel.family = kernel_family_from_string(value);
  else if (key == "kernel.lengthscale") cfg.kernel.lengthscale = config_positive(key, value);
  else if (key == "kernel.scale") cfg.kernel.scale = config_nonneg(key, value);
  else if (key == "kernel.offset") cfg.kernel.offset = config_nonneg(key, value);
  else if (key == "mdp.states") cfg.mdp_states = static_cast<int>(config_int(key, value, 1, 4096));
  else if (key == "mdp.actions") cfg.mdp_actions = static_cast<int>(config_int(key, value, 1, 4096));
  else if (key == "mdp.state-dim") cfg.mdp_state_dim = static_cast<int>(config_int(key, value, 1, 64));
  else if (key == "mdp.action-dim") cfg.mdp_action_dim = static_cast<int>(config_int(key, value, 1, 64));
  else if (key == "mdp.horizon") cfg.mdp_horizon = static_cast<int>(config_int(key, value, 1, 1024));
  else if (key == "mdp.centers") cfg.mdp_centers = static_cast<int>(config_int(key, value, 1, 4096));
  else if (key == "mdp.perturbation") {
    cfg.mdp_perturbation = config_nonneg(key, value);
    if (cfg.mdp_perturbation > 1.0)
      throw std::invalid_argument(key + ": must lie in [0, 1]");
  } else if (key == "mdp.seed") cfg.mdp_seed = static_cast<std::uint64_t>(config_int(key, value, 0, (1LL << 62)));
  else if (key == "mdp.reward-mode") cfg.reward_mode = reward_mode_from_string(value);
  else if (key == "mdp.reward-constant") {
    cfg.reward_constant = config_nonneg(key, value);
    if (cfg.reward_constant > 1.0)
      throw std::invalid_argument(key + ": rewards must lie in [0, 1]");
  } else if (key.rfind("mdp.reward.", 0) == 0)
    cfg.reward_overrides.push_back(parse_reward_key(key, value));
  else if (key == "mdp.load-path") cfg.mdp_load_path = value;
  else if (key == "mdp.save-path") cfg.mdp_save_path = value;
  else if (key == "agent.kind") cfg.agent_kind = agent_kind_from_string(value);
  else if (key == "agent.rho") cfg.agent_rho = config_positive(key, value);
  else if (key == "agent.clip") cfg.agent_clip = config_nonneg(key, value);
  else if (key == "beta.kind") cfg.beta_kind = beta_kind_from_string(value);
  else if (key == "beta.c_f") cfg.beta_c_f = config_nonneg(key, value);
  else if (key == "beta.sigma") cfg.beta_sigma = config_nonneg(key, value);
  else if (key == "beta.delta") {
    cfg.beta_delta = config_num(key, value);
    if (!(cfg.beta_delta > 0.0 && cfg.beta_delta < 1.0))
      throw std::invalid_argument(key + ": must lie in (0, 1)");
  } else if (key == "beta.constant_value") cfg.beta_constant_value = config_nonneg(key, value);
  else if (key == "beta.cover_term") cfg.beta_cover_term = config_nonneg(key, value);
  else if (key == "beta.cover_auto") cfg.beta_cover_auto = config_bool(key, value);
  else if (key == "beta.cover_dim") cfg.beta_cover_dim = static_cast<int>(config_int(key, value, 1, 4096));
  else if (key == "experiment.episodes") cfg.episodes = static_cast<int>(config_int(key, value, 0, 100000000));
  else if (key == "experiment.seeds") cfg.seeds = static_cast<int>(config_int(key, value, 1, 100000));
  else if (key == "experiment.seed") cfg.seed = static_cast<std::uint64_t>(config_int(key, value, 0, (1LL << 62)));
  else if (key == "experiment.initial-state") cfg.initial_state = static_cast<int>(config_int(key, value, 0, 1 << 20));
  else if (key == "experiment.initial-state-mode") cfg.initial_state_mode = initial_state_mode_from_string(value);
  else if (key == "experiment.output-path") {
    if (value.empty()) throw std::invalid_argument(key + ": must not be empty");
    cfg.output_path = value;
  } else if (key == "experiment.timing") cfg.timing = config_bool(key, value);
  else if (key == "coverage.trials") cfg.coverage_trials = static_cast<int>(config_int(key, value, 0, 10000000));
  else if (key == "coverage.n") cfg.coverage_n = static_cast<int>(config_int(key, value, 1, 100000));
  else if (key == "coverage.test-points") cfg.coverage_test_points = static_cast<int>(config_int(key, value, 1, 100000));
  else if (key == "coverage.centers") cfg.coverage_centers = static_cast<int>(config_int(key, value, 1, 4096));
  else if (key == "coverage.dim") cfg.coverage_dim = static_cast<int>(config_int(key, value, 1, 64));
  else if (key == "coverage.beta-scale") cfg.coverage_beta_scale = config_nonneg(key, value);
  else if (key == "infogain.max-n") cfg.infogain_max_n = static_cast<int>(config_int(key, value, 1, 100000));
  else if (key == "infogain.step") cfg.infogain_step = static_cast<int>(config_int(key, value, 1, 100000));
  else throw std::invalid_argument("unknown key '" + key + "'");
}

}  // namespace detail

inline ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const std::string stripped = detail::trim(line);
    if (stripped.empty()) continue;
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": expected 'key = value'");
    const std::string key = detail::trim(stripped.substr(0, eq));
    const std::string value = detail::trim(stripped.substr(eq + 1));
    try {
      detail::apply_config_key(cfg, key, value);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": " + e.what());
    }
  }
  try {
    cfg.resolve();
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string(e.what()) +
                                " (after parsing " +
                                std::to_string(line_no) + " lines)");
  }
  return cfg;
}

inline ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw std::runtime_error("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

// Canonical echo of a resolved config: every key, fixed order, %.17g floats.
inline std::string serialize_config(const ExperimentConfig& cfg) {
  std::ostringstream out;
  const auto put = [&out](const std::string& key, const std::string& value) {
    out << key << " = " << value << "\n";
  };
  put("kernel.family", to_string(cfg.kernel.family));
  put("kernel.lengthscale", format_g17(cfg.kernel.lengthscale));
  put("kernel.scale", format_g17(cfg.kernel.scale));
  put("kernel.offset", format_g17(cfg.kernel.offset));
  put("mdp.states", std::to_string(cfg.mdp_states));
  put("mdp.actions", std::to_string(cfg.mdp_actions));
  put("mdp.state-dim", std::to_string(cfg.mdp_state_dim));
  put("mdp.action-dim", std::to_string(cfg.mdp_action_dim));
  put("mdp.horizon", std::to_string(cfg.mdp_horizon));
  put("mdp.centers", std::to_string(cfg.mdp_centers));
  put("mdp.perturbation", format_g17(cfg.mdp_perturbation));
  put("mdp.seed", std::to_string(cfg.mdp_seed));
  put("mdp.reward-mode", to_string(cfg.reward_mode));
  put("mdp.reward-constant", format_g17(cfg.reward_constant));
  for (const RewardOverride& o : cfg.reward_overrides)
    put("mdp.reward." + std::to_string(o.h) + "." + std::to_string(o.s) + "." +
            std::to_string(o.a),
        format_g17(o.value));
  if (!cfg.mdp_load_path.empty()) put("mdp.load-path", cfg.mdp_load_path);
  if (!cfg.mdp_save_path.empty()) put("mdp.save-path", cfg.mdp_save_path);
  put("agent.kind", to_string(cfg.agent_kind));
  put("agent.rho", format_g17(cfg.agent_rho));
  put("agent.clip", format_g17(cfg.agent_clip));
  put("beta.kind", to_string(cfg.beta_kind));
  put("beta.c_f", format_g17(cfg.beta_c_f));
  put("beta.sigma", format_g17(cfg.beta_sigma));
  put("beta.delta", format_g17(cfg.beta_delta));
  put("beta.constant_value", format_g17(cfg.beta_constant_value));
  put("beta.cover_term", format_g17(cfg.beta_cover_term));
  put("beta.cover_auto", cfg.beta_cover_auto ? "true" : "false");
  put("beta.cover_dim", std::to_string(cfg.beta_cover_dim));
  put("experiment.episodes", std::to_string(cfg.episodes));
  put("experiment.seeds", std::to_string(cfg.seeds));
  put("experiment.seed", std::to_string(cfg.seed));
  put("experiment.initial-state", std::to_string(cfg.initial_state));
  put("experiment.initial-state-mode", to_string(cfg.initial_state_mode));
  put("experiment.output-path", cfg.output_path);
  put("experiment.timing", cfg.timing ? "true" : "false");
  put("coverage.trials", std::to_string(cfg.coverage_trials));
  put("coverage.n", std::to_string(cfg.coverage_n));
  put("coverage.test-points", std::to_string(cfg.coverage_test_points));
  put("coverage.centers", std::to_string(cfg.coverage_centers));
  put("coverage.dim", std::to_string(cfg.coverage_dim));
  put("coverage.beta-scale", format_g17(cfg.coverage_beta_scale));
  put("infogain.max-n", std::to_string(cfg.infogain_max_n));
  put("infogain.step", std::to_string(cfg.infogain_step));
  return out.str();
}

}  // namespace kovi

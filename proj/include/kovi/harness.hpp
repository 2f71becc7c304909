#pragma once

// Experiment orchestration: the episode loop with exact regret accounting,
// confidence-coverage trials, seed sweeps, info-gain diagnostics, and CSV
// emission.  Per-episode policy values are computed exactly by dynamic
// programming on the simulator's true tables — the executed trajectory only
// feeds the agent — so the regret series carries no rollout noise.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "kovi/agents.hpp"
#include "kovi/config.hpp"
#include "kovi/krr.hpp"
#include "kovi/mdp.hpp"
#include "kovi/mdp_io.hpp"
#include "kovi/numfmt.hpp"
#include "kovi/rkhs.hpp"
#include "kovi/rng.hpp"

namespace kovi {

struct EpisodeRecord {
  int episode = 0;  // 1-based
  int initial_state = 0;
  double v_star = 0.0;
  double v_pi = 0.0;
  double gap = 0.0;
  double cum_regret = 0.0;
  std::vector<double> beta_by_step;
  std::vector<double> gamma_by_step;
  double wall_ms = 0.0;
};

struct RegretLedger {
  int horizon = 0;
  std::vector<EpisodeRecord> records;
  // Fraction of (episode, state) pairs whose planned V_1 dominates V*_1;
  // near 1 when the confidence widths hold.  Monitored, never asserted.
  long optimism_hits = 0;
  long optimism_total = 0;

  double final_regret() const {
    return records.empty() ? 0.0 : records.back().cum_regret;
  }
  double optimism_rate() const {
    return optimism_total == 0
               ? 0.0
               : static_cast<double>(optimism_hits) / optimism_total;
  }
};

inline std::vector<double> cumulative_regret(const RegretLedger& ledger) {
  std::vector<double> series;
  series.reserve(ledger.records.size());
  double cum = 0.0;
  for (const EpisodeRecord& r : ledger.records) {
    cum += r.gap;
    series.push_back(cum);
  }
  return series;
}

// Execute one episode under a fixed policy table.  The caller owns agent
// bookkeeping; this is a pure simulator step.
inline Trajectory run_episode(const Mdp& mdp, const PolicyTable& policy,
                              int episode, int initial_state, Rng& rng) {
  if (initial_state < 0 || initial_state >= mdp.num_states())
    throw std::invalid_argument("run_episode: initial state out of range");
  if (policy.size() != static_cast<std::size_t>(mdp.horizon))
    throw std::invalid_argument("run_episode: policy horizon mismatch");
  Trajectory traj;
  traj.episode = episode;
  traj.initial_state = initial_state;
  int s = initial_state;
  for (int h = 0; h < mdp.horizon; ++h) {
    const int a = policy[h][s];
    const int sp = transition_sample(mdp, h, s, a, rng);
    traj.steps.push_back({s, a, sp, mdp.reward(h, s, a)});
    s = sp;
  }
  return traj;
}

// Instantiate the MDP described by the config: generated or loaded, reward
// mode applied, optional save for reproducibility.
inline Mdp build_mdp(const ExperimentConfig& cfg) {
  Mdp mdp;
  if (cfg.mdp_load_path.empty()) {
    mdp = make_random_rkhs_mdp(cfg.kernel, cfg.mdp_state_dim,
                               cfg.mdp_action_dim, cfg.mdp_states,
                               cfg.mdp_actions, cfg.mdp_horizon,
                               cfg.mdp_perturbation, cfg.mdp_centers,
                               cfg.mdp_seed);
  } else {
    mdp = load_mdp(cfg.mdp_load_path);
    if (mdp.horizon != cfg.mdp_horizon)
      throw std::invalid_argument(
          "config: mdp.horizon must match the loaded instance (found " +
          std::to_string(mdp.horizon) + ")");
  }
  if (cfg.reward_mode == RewardMode::constant)
    for (auto& row : mdp.rewards)
      for (double& r : row) r = cfg.reward_constant;
  for (const RewardOverride& o : cfg.reward_overrides) {
    if (o.h >= mdp.horizon || o.s >= mdp.num_states() ||
        o.a >= mdp.num_actions())
      throw std::invalid_argument("config: mdp.reward override out of range");
    mdp.rewards[o.h][static_cast<std::size_t>(o.s) * mdp.num_actions() + o.a] =
        o.value;
  }
  if (!cfg.mdp_save_path.empty()) save_mdp(mdp, cfg.mdp_save_path);
  return mdp;
}

namespace detail {

inline int pick_initial_state(const ExperimentConfig& cfg, int episode_1based,
                              int num_states, Rng& init_rng) {
  switch (cfg.initial_state_mode) {
    case InitialStateMode::fixed: return cfg.initial_state;
    case InitialStateMode::round_robin:
      return (episode_1based - 1) % num_states;
    case InitialStateMode::uniform:
      return static_cast<int>(init_rng.below(static_cast<std::uint64_t>(num_states)));
  }
  throw std::logic_error("unreachable initial-state mode");
}

}  // namespace detail

// One full replication: T episodes of plan / evaluate / execute / learn.
inline RegretLedger run_experiment(const ExperimentConfig& raw) {
  ExperimentConfig cfg = raw;
  cfg.resolve();
  const Mdp mdp = build_mdp(cfg);
  const int S = mdp.num_states(), A = mdp.num_actions(), H = mdp.horizon;
  if (cfg.initial_state_mode == InitialStateMode::fixed &&
      cfg.initial_state >= S)
    throw std::invalid_argument(
        "config: experiment.initial-state must name a valid state");

  const ValueTable star = exact_optimal_values(mdp);

  AgentConfig acfg = cfg.agent_config();
  if (acfg.kind == AgentKind::greedy_no_bonus) {
    acfg.beta.kind = BetaKind::constant;
    acfg.beta.constant_value = 0.0;
  }
  std::optional<KoviAgent> value_agent;
  std::optional<KernelUcbAgent> bandit_agent;
  if (acfg.kind == AgentKind::kovi || acfg.kind == AgentKind::greedy_no_bonus)
    value_agent.emplace(mdp, acfg);
  else if (acfg.kind == AgentKind::kernel_ucb_bandit)
    bandit_agent.emplace(mdp, acfg);

  Rng env_rng(derive_seed(cfg.seed, 1));
  Rng init_rng(derive_seed(cfg.seed, 2));
  Rng policy_rng(derive_seed(cfg.seed, 3));

  RegretLedger ledger;
  ledger.horizon = H;
  ledger.records.reserve(static_cast<std::size_t>(cfg.episodes));
  double cum = 0.0;
  for (int t = 1; t <= cfg.episodes; ++t) {
    const auto t_start = std::chrono::steady_clock::now();
    const int s1 = detail::pick_initial_state(cfg, t, S, init_rng);

    EpisodePlan plan;
    PolicyTable policy;
    bool have_plan = false;
    if (value_agent) {
      plan = value_agent->plan();
      policy = greedy_policy(plan);
      have_plan = true;
    } else if (bandit_agent) {
      plan = bandit_agent->plan();
      policy = greedy_policy(plan);
      have_plan = true;
    } else {
      policy.assign(H, std::vector<int>(S, 0));
      for (int h = 0; h < H; ++h)
        for (int s = 0; s < S; ++s) policy[h][s] = baseline_act(policy_rng, A);
    }

    const ValueTable pi_values = evaluate_policy(mdp, policy);
    const double gap = star.v[0][s1] - pi_values.v[0][s1];
    if (gap < -1e-12)
      throw std::runtime_error(
          "regret accounting: a policy value exceeded the optimal value");
    cum += gap;

    if (have_plan) {
      for (int s = 0; s < S; ++s) {
        double v1 = 0.0;
        for (int a = 0; a < A; ++a)
          v1 = std::max(v1, plan.q[0][static_cast<std::size_t>(s) * A + a]);
        if (v1 >= star.v[0][s]) ++ledger.optimism_hits;
      }
      ledger.optimism_total += S;
    }

    const Trajectory traj = run_episode(mdp, policy, t, s1, env_rng);
    for (int h = 0; h < H; ++h) {
      const Trajectory::Step& step = traj.steps[h];
      if (value_agent)
        value_agent->observe(h, step.state, step.action, step.next_state);
      else if (bandit_agent)
        bandit_agent->observe(step.state, step.action, step.next_state);
    }

    EpisodeRecord rec;
    rec.episode = t;
    rec.initial_state = s1;
    rec.v_star = star.v[0][s1];
    rec.v_pi = pi_values.v[0][s1];
    rec.gap = gap;
    rec.cum_regret = cum;
    rec.beta_by_step =
        have_plan ? plan.beta_by_step : std::vector<double>(H, 0.0);
    rec.gamma_by_step =
        have_plan ? plan.gamma_by_step : std::vector<double>(H, 0.0);
    // Deterministic output by default: wall time is recorded only on
    // request, otherwise the column is exactly zero.
    rec.wall_ms =
        cfg.timing
            ? std::chrono::duration<double, std::milli>(
                  std::chrono::steady_clock::now() - t_start)
                  .count()
            : 0.0;
    ledger.records.push_back(std::move(rec));
  }
  return ledger;
}

// ---------------------------------------------------------------------------
// Confidence coverage

struct CoverageTrial {
  int trial = 0;
  double max_abs_err = 0.0;
  double max_width = 0.0;
  bool hit = false;
};

struct CoverageReport {
  std::vector<CoverageTrial> trials;
  long hits = 0;
  double coverage = 0.0;
};

// Fixed-design interval check: sample a target of norm exactly c_f, observe
// it with Gaussian noise at a predetermined lattice, fit, and demand
// |f - mean| <= beta * stddev at every held-out grid point.
inline CoverageReport coverage_experiment(const ExperimentConfig& raw) {
  ExperimentConfig cfg = raw;
  cfg.resolve();
  const std::vector<Point> design = lattice_grid(cfg.coverage_n, cfg.coverage_dim);
  const std::vector<Point> tests =
      lattice_grid(cfg.coverage_test_points, cfg.coverage_dim);

  BetaSchedule sched = cfg.beta_schedule();
  sched.kind = BetaKind::fixed_design;  // the schedule this bound is proved for
  const double beta =
      beta_width(sched, design.size(), 0.0) * cfg.coverage_beta_scale;
  const double noise = cfg.beta_sigma;

  CoverageReport report;
  report.trials.reserve(static_cast<std::size_t>(cfg.coverage_trials));
  for (int trial = 0; trial < cfg.coverage_trials; ++trial) {
    Rng rng(derive_seed(cfg.seed, 40000 + static_cast<std::uint64_t>(trial)));

    RepresenterFunction f;
    f.spec = cfg.kernel;
    for (int c = 0; c < cfg.coverage_centers; ++c) {
      std::vector<double> coords(static_cast<std::size_t>(cfg.coverage_dim));
      for (double& x : coords) x = rng.uniform();
      f.centers.push_back(Point{std::move(coords)});
      f.weights.push_back(rng.normal());
    }
    const double norm = rkhs_norm(f);
    if (norm > 1e-12)
      for (double& w : f.weights) w *= cfg.beta_c_f / norm;

    std::vector<double> targets(design.size());
    for (std::size_t i = 0; i < design.size(); ++i)
      targets[i] = rkhs_eval(f, design[i]) + noise * rng.normal();
    const Posterior post = fit_posterior(cfg.kernel, cfg.agent_rho, design, targets);

    CoverageTrial row;
    row.trial = trial;
    row.hit = true;
    for (const Point& z : tests) {
      const double err = std::abs(rkhs_eval(f, z) - post.mean(z));
      const double width = beta * post.stddev(z);
      row.max_abs_err = std::max(row.max_abs_err, err);
      row.max_width = std::max(row.max_width, width);
      // The 1e-9 slack only absorbs floating-point noise in the exactly
      // saturated noiseless case; it is invisible at stochastic scales.
      if (err > width + 1e-9) row.hit = false;
    }
    if (row.hit) ++report.hits;
    report.trials.push_back(row);
  }
  report.coverage = report.trials.empty()
                        ? 0.0
                        : static_cast<double>(report.hits) /
                              static_cast<double>(report.trials.size());
  return report;
}

// ---------------------------------------------------------------------------
// Seed sweeps

struct SweepRow {
  int episode = 0;
  double mean_gap = 0.0;
  double mean_cum_regret = 0.0;
  double stderr_cum_regret = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<double> final_regret_by_seed;
};

// Replicate the experiment over experiment.seeds consecutive seeds and
// aggregate mean and standard error per episode.  Replications run
// concurrently; each owns its agent, generator, and ledger, and results are
// joined in seed order so aggregation is deterministic.
inline SweepResult sweep(const ExperimentConfig& raw) {
  ExperimentConfig cfg = raw;
  cfg.resolve();
  if (!cfg.mdp_save_path.empty()) {
    build_mdp(cfg);  // write the instance once, not per replicate
    cfg.mdp_save_path.clear();
  }
  std::vector<std::future<RegretLedger>> futures;
  futures.reserve(static_cast<std::size_t>(cfg.seeds));
  for (int i = 0; i < cfg.seeds; ++i) {
    ExperimentConfig rep = cfg;
    rep.seed = cfg.seed + static_cast<std::uint64_t>(i);
    futures.push_back(std::async(std::launch::async,
                                 [rep]() { return run_experiment(rep); }));
  }
  std::vector<RegretLedger> ledgers;
  ledgers.reserve(futures.size());
  for (auto& f : futures) ledgers.push_back(f.get());

  SweepResult result;
  for (const RegretLedger& ledger : ledgers)
    result.final_regret_by_seed.push_back(ledger.final_regret());
  const std::size_t T = ledgers.empty() ? 0 : ledgers.front().records.size();
  const double k = static_cast<double>(ledgers.size());
  for (std::size_t t = 0; t < T; ++t) {
    SweepRow row;
    row.episode = static_cast<int>(t) + 1;
    double mean_gap = 0.0, mean_cum = 0.0;
    for (const RegretLedger& ledger : ledgers) {
      mean_gap += ledger.records[t].gap;
      mean_cum += ledger.records[t].cum_regret;
    }
    mean_gap /= k;
    mean_cum /= k;
    double ss = 0.0;
    for (const RegretLedger& ledger : ledgers) {
      const double d = ledger.records[t].cum_regret - mean_cum;
      ss += d * d;
    }
    row.mean_gap = mean_gap;
    row.mean_cum_regret = mean_cum;
    row.stderr_cum_regret =
        ledgers.size() > 1 ? std::sqrt(ss / (k - 1.0)) / std::sqrt(k) : 0.0;
    result.rows.push_back(row);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Info-gain diagnostics

struct InfoGainRow {
  int n = 0;
  double realized = 0.0;  // log-det gain of the first-n lattice design
  double greedy = 0.0;    // greedy max-variance selection over the grid
};

// Realized-vs-greedy information gain on the configured grid.  The grid is
// the coverage lattice (coverage.test-points points in coverage.dim
// dimensions); the realized design cycles through it in order.
inline std::vector<InfoGainRow> info_gain_table(const ExperimentConfig& raw) {
  ExperimentConfig cfg = raw;
  cfg.resolve();
  const std::vector<Point> grid =
      lattice_grid(cfg.coverage_test_points, cfg.coverage_dim);
  std::vector<InfoGainRow> rows;
  Posterior post(cfg.kernel, cfg.agent_rho);
  int appended = 0;
  for (int n = cfg.infogain_step; n <= cfg.infogain_max_n;
       n += cfg.infogain_step) {
    while (appended < n) {
      post = append_observation(std::move(post),
                                grid[static_cast<std::size_t>(appended) % grid.size()],
                                0.0);
      ++appended;
    }
    InfoGainRow row;
    row.n = n;
    row.realized = post.information_gain();
    row.greedy = max_info_gain_greedy(cfg.kernel, cfg.agent_rho, grid,
                                      static_cast<std::size_t>(n));
    rows.push_back(row);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// CSV emission

// All-or-nothing file emission: write to a sibling temp file, rename on
// success, so readers never observe partial output.
inline void write_text_file_atomic(const std::string& path,
                                   const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
      throw std::runtime_error("cannot open '" + tmp + "' for writing");
    out << content;
    if (!out)
      throw std::runtime_error("failed writing '" + tmp + "'");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw std::runtime_error("cannot move output into place at '" + path + "'");
  }
}

namespace detail {

inline std::string comment_block(const ExperimentConfig& cfg) {
  std::istringstream in(serialize_config(cfg));
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) out << "# " << line << "\n";
  return out.str();
}

}  // namespace detail

inline std::string regret_csv(const ExperimentConfig& cfg,
                              const RegretLedger& ledger) {
  std::ostringstream out;
  out << detail::comment_block(cfg);
  out << "# optimism_rate = " << format_g17(ledger.optimism_rate()) << " ("
      << ledger.optimism_hits << "/" << ledger.optimism_total << ")\n";
  out << "episode,initial_state,v_star,v_pi,gap,cum_regret";
  for (int h = 1; h <= ledger.horizon; ++h) out << ",beta_h" << h;
  for (int h = 1; h <= ledger.horizon; ++h) out << ",gamma_h" << h;
  out << ",wall_ms\n";
  for (const EpisodeRecord& r : ledger.records) {
    out << r.episode << "," << r.initial_state << "," << format_g17(r.v_star)
        << "," << format_g17(r.v_pi) << "," << format_g17(r.gap) << ","
        << format_g17(r.cum_regret);
    for (double b : r.beta_by_step) out << "," << format_g17(b);
    for (double g : r.gamma_by_step) out << "," << format_g17(g);
    out << "," << format_g17(r.wall_ms) << "\n";
  }
  return out.str();
}

inline std::string coverage_csv(const ExperimentConfig& cfg,
                                const CoverageReport& report) {
  std::ostringstream out;
  out << detail::comment_block(cfg);
  out << "# coverage = " << format_g17(report.coverage) << " (" << report.hits
      << "/" << report.trials.size() << ")\n";
  out << "trial,max_abs_err,max_width,hit\n";
  for (const CoverageTrial& t : report.trials)
    out << t.trial << "," << format_g17(t.max_abs_err) << ","
        << format_g17(t.max_width) << "," << (t.hit ? 1 : 0) << "\n";
  return out.str();
}

inline std::string sweep_csv(const ExperimentConfig& cfg,
                             const SweepResult& result) {
  std::ostringstream out;
  out << detail::comment_block(cfg);
  out << "episode,mean_gap,mean_cum_regret,stderr_cum_regret\n";
  for (const SweepRow& r : result.rows)
    out << r.episode << "," << format_g17(r.mean_gap) << ","
        << format_g17(r.mean_cum_regret) << ","
        << format_g17(r.stderr_cum_regret) << "\n";
  return out.str();
}

inline std::string info_gain_csv(const ExperimentConfig& cfg,
                                 const std::vector<InfoGainRow>& rows) {
  std::ostringstream out;
  out << detail::comment_block(cfg);
  out << "n,realized_gamma,greedy_gamma\n";
  for (const InfoGainRow& r : rows)
    out << r.n << "," << format_g17(r.realized) << "," << format_g17(r.greedy)
        << "\n";
  return out.str();
}

inline void emit_csv(const ExperimentConfig& cfg, const RegretLedger& ledger,
                     const std::string& path) {
  write_text_file_atomic(path, regret_csv(cfg, ledger));
}
inline void emit_csv(const ExperimentConfig& cfg, const CoverageReport& report,
                     const std::string& path) {
  write_text_file_atomic(path, coverage_csv(cfg, report));
}
inline void emit_csv(const ExperimentConfig& cfg, const SweepResult& result,
                     const std::string& path) {
  write_text_file_atomic(path, sweep_csv(cfg, result));
}
inline void emit_csv(const ExperimentConfig& cfg,
                     const std::vector<InfoGainRow>& rows,
                     const std::string& path) {
  write_text_file_atomic(path, info_gain_csv(cfg, rows));
}

// Parse the numeric body of an emitted CSV: '#' comments and the single
// header line are skipped, every remaining field must be a number.
inline std::vector<std::vector<double>> parse_csv_rows(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  bool header_skipped = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_skipped) {
      header_skipped = true;
      continue;
    }
    std::vector<double> row;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      const std::size_t comma = line.find(',', pos);
      const std::string tok =
          line.substr(pos, comma == std::string::npos ? std::string::npos
                                                      : comma - pos);
      char* end = nullptr;
      const double v = std::strtod(tok.c_str(), &end);
      if (tok.empty() || end != tok.c_str() + tok.size())
        throw std::invalid_argument("csv: bad numeric field '" + tok + "'");
      row.push_back(v);
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace kovi

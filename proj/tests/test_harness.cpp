#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "kovi/harness.hpp"

using namespace kovi;

namespace {

Mdp chain_mdp() {
  Mdp mdp;
  mdp.spec = KernelSpec{KernelFamily::squared_exponential, 0.5, 1.0, 0.2};
  mdp.states = {Point{0.0}, Point{1.0}};
  mdp.actions = {Point{0.0}, Point{1.0}};
  mdp.horizon = 2;
  const std::vector<double> rewards = {1.0, 0.0, 0.0, 0.0};
  const std::vector<double> transitions = {1.0, 0.0, 0.0, 1.0,
                                           0.0, 1.0, 0.0, 1.0};
  mdp.rewards = {rewards, rewards};
  mdp.transitions = {transitions, transitions};
  return mdp;
}

}  // namespace

TEST_CASE("run_episode follows the policy and the dynamics") {
  const Mdp mdp = chain_mdp();
  Rng rng(5);

  // Deterministic dynamics + fixed policy => the same trajectory each time.
  const PolicyTable stay = {{0, 0}, {0, 0}};
  for (int t = 1; t <= 3; ++t) {
    const Trajectory traj = run_episode(mdp, stay, t, 0, rng);
    REQUIRE(traj.steps.size() == 2);
    CHECK(traj.episode == t);
    CHECK(traj.steps[0].state == 0);
    CHECK(traj.steps[0].next_state == 0);
    CHECK(traj.steps[0].reward == 1.0);
    CHECK(traj.steps[1].next_state == 0);
  }
  const PolicyTable leave = {{1, 1}, {1, 1}};
  const Trajectory traj = run_episode(mdp, leave, 1, 0, rng);
  CHECK(traj.steps[0].next_state == 1);
  CHECK(traj.steps[1].state == 1);
  CHECK(traj.steps[1].reward == 0.0);

  CHECK_THROWS_AS(run_episode(mdp, stay, 1, 7, rng), std::invalid_argument);
  CHECK_THROWS_AS(run_episode(mdp, {{0, 0}}, 1, 0, rng),
                  std::invalid_argument);
}

TEST_CASE("cumulative regret is a prefix sum") {
  RegretLedger ledger;
  ledger.horizon = 1;
  for (double gap : {1.0, 0.5, 0.25}) {
    EpisodeRecord r;
    r.gap = gap;
    ledger.records.push_back(r);
  }
  CHECK(cumulative_regret(ledger) == std::vector<double>{1.0, 1.5, 1.75});
  CHECK(cumulative_regret(RegretLedger{}).empty());
}

TEST_CASE("an oracle-greedy policy accumulates zero regret") {
  const Mdp mdp = chain_mdp();
  const ValueTable star = exact_optimal_values(mdp);
  PolicyTable greedy(2, std::vector<int>(2, 0));
  for (int h = 0; h < 2; ++h)
    for (int s = 0; s < 2; ++s) {
      int best = 0;
      for (int a = 1; a < 2; ++a)
        if (star.q[h][s * 2 + a] > star.q[h][s * 2 + best]) best = a;
      greedy[h][s] = best;
    }
  const ValueTable got = evaluate_policy(mdp, greedy);
  for (int s = 0; s < 2; ++s)
    CHECK(star.v[0][s] - got.v[0][s] == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("experiment loop runs zero episodes cleanly") {
  const ExperimentConfig cfg = parse_config(
      "mdp.states = 3\nmdp.actions = 2\nmdp.horizon = 2\n"
      "experiment.episodes = 0\n");
  const RegretLedger ledger = run_experiment(cfg);
  CHECK(ledger.records.empty());
  CHECK(ledger.final_regret() == 0.0);

  // Header plus comments only.
  const std::string csv = regret_csv(cfg, ledger);
  CHECK(parse_csv_rows(csv).empty());
}

TEST_CASE("random baseline matches its closed-form expected gap") {
  // On the two-state chain started in state 0, a uniformly random policy
  // earns 2 with prob 1/4, 1 with prob 1/4, and 0 with prob 1/2, so the
  // expected per-episode gap is 1.25 with variance 0.6875.
  ExperimentConfig cfg = parse_config(
      "mdp.states = 2\nmdp.actions = 2\nmdp.horizon = 2\n"
      "mdp.state-dim = 1\nmdp.action-dim = 1\n"
      "mdp.perturbation = 0\n"
      "agent.kind = random\n"
      "experiment.episodes = 400\n"
      "experiment.initial-state-mode = fixed\n"
      "experiment.initial-state = 0\n");
  // Swap in the hand-built chain via explicit reward/transition tables:
  // generate a uniform MDP, then overwrite its tables.
  Mdp mdp = build_mdp(cfg);
  const Mdp chain = chain_mdp();
  mdp.states = chain.states;
  mdp.actions = chain.actions;
  mdp.rewards = chain.rewards;
  mdp.transitions = chain.transitions;
  const std::string path = "harness_chain.tmp.mdp";
  save_mdp(mdp, path);
  cfg = parse_config(
      "mdp.horizon = 2\nmdp.load-path = " + path +
      "\nagent.kind = random\n"
      "experiment.episodes = 400\n"
      "experiment.initial-state-mode = fixed\n"
      "experiment.initial-state = 0\n");
  const RegretLedger ledger = run_experiment(cfg);
  std::remove(path.c_str());

  REQUIRE(ledger.records.size() == 400);
  double mean = 0.0;
  for (const EpisodeRecord& r : ledger.records) {
    mean += r.gap;
    CHECK(r.v_star == Catch::Approx(2.0).margin(1e-12));
    CHECK(r.initial_state == 0);
    CHECK(r.gap >= -1e-12);
  }
  mean /= 400.0;
  const double three_se = 3.0 * std::sqrt(0.6875 / 400.0);
  CHECK(std::abs(mean - 1.25) < three_se);
  CHECK(ledger.optimism_total == 0);  // baselines publish no plan
}

TEST_CASE("learning runs satisfy the ledger invariants") {
  const ExperimentConfig cfg = parse_config(
      "mdp.states = 4\nmdp.actions = 2\nmdp.horizon = 2\n"
      "mdp.seed = 11\nexperiment.episodes = 25\nexperiment.seed = 3\n"
      "agent.rho = 0.5\nbeta.sigma = 1.0\n");
  const RegretLedger ledger = run_experiment(cfg);
  REQUIRE(ledger.records.size() == 25);

  const Mdp mdp = build_mdp(cfg);
  const ValueTable star = exact_optimal_values(mdp);
  double prev_cum = 0.0;
  std::vector<double> prev_gamma(2, -1.0);
  for (const EpisodeRecord& r : ledger.records) {
    CHECK(r.gap >= -1e-12);
    CHECK(r.cum_regret >= prev_cum - 1e-15);
    prev_cum = r.cum_regret;
    CHECK(r.v_star == star.v[0][r.initial_state]);  // oracle consistency
    CHECK(r.wall_ms == 0.0);                        // timing off by default
    for (int h = 0; h < 2; ++h) {
      CHECK(r.beta_by_step[h] > 0.0);
      CHECK(r.gamma_by_step[h] >= prev_gamma[h]);  // data only accumulates
      prev_gamma[h] = r.gamma_by_step[h];
    }
  }
  const std::vector<double> series = cumulative_regret(ledger);
  CHECK(series.back() == Catch::Approx(ledger.final_regret()).margin(1e-12));
  CHECK(ledger.optimism_total == 25 * 4);
  CHECK(ledger.optimism_rate() >= 0.0);
  CHECK(ledger.optimism_rate() <= 1.0);
}

TEST_CASE("experiments are deterministic in config and seed") {
  const std::string text =
      "mdp.states = 3\nmdp.actions = 2\nmdp.horizon = 2\n"
      "experiment.episodes = 12\nexperiment.seed = 9\n";
  const ExperimentConfig cfg = parse_config(text);
  const std::string a = regret_csv(cfg, run_experiment(cfg));
  const std::string b = regret_csv(cfg, run_experiment(cfg));
  CHECK(a == b);

  const ExperimentConfig other = parse_config(text + "experiment.seed = 10\n");
  const std::string c = regret_csv(other, run_experiment(other));
  CHECK(a != c);
}

TEST_CASE("initial-state modes behave as configured") {
  const std::string base =
      "mdp.states = 3\nmdp.actions = 2\nmdp.horizon = 1\n"
      "agent.kind = random\nexperiment.episodes = 7\n";
  const RegretLedger round = run_experiment(
      parse_config(base + "experiment.initial-state-mode = round-robin\n"));
  for (int t = 0; t < 7; ++t)
    CHECK(round.records[t].initial_state == t % 3);

  const RegretLedger fixed = run_experiment(
      parse_config(base + "experiment.initial-state-mode = fixed\n"
                          "experiment.initial-state = 2\n"));
  for (const EpisodeRecord& r : fixed.records) CHECK(r.initial_state == 2);

  const RegretLedger uniform = run_experiment(parse_config(base));
  bool varied = false;
  for (const EpisodeRecord& r : uniform.records) {
    CHECK(r.initial_state >= 0);
    CHECK(r.initial_state < 3);
    varied = varied || r.initial_state != uniform.records[0].initial_state;
  }
  CHECK(varied);
}

TEST_CASE("reward modes and overrides reach the tables") {
  const ExperimentConfig cfg = parse_config(
      "mdp.states = 2\nmdp.actions = 2\nmdp.horizon = 2\n"
      "mdp.reward-mode = constant\nmdp.reward-constant = 0.5\n"
      "mdp.reward.1.0.1 = 0.875\n");
  const Mdp mdp = build_mdp(cfg);
  CHECK(mdp.reward(0, 0, 0) == 0.5);
  CHECK(mdp.reward(1, 0, 1) == 0.875);
  CHECK(mdp.reward(1, 1, 1) == 0.5);

  // A bandit agent demands a one-step task.
  const ExperimentConfig bad = parse_config(
      "mdp.horizon = 2\nagent.kind = kernel-ucb-bandit\n"
      "experiment.episodes = 1\n");
  CHECK_THROWS_AS(run_experiment(bad), std::invalid_argument);
}

TEST_CASE("emitted CSV round-trips bit-exactly") {
  const ExperimentConfig cfg = parse_config(
      "mdp.states = 3\nmdp.actions = 2\nmdp.horizon = 2\n"
      "experiment.episodes = 3\n");
  const RegretLedger ledger = run_experiment(cfg);
  const std::string csv = regret_csv(cfg, ledger);

  const auto rows = parse_csv_rows(csv);
  REQUIRE(rows.size() == 3);
  for (std::size_t t = 0; t < rows.size(); ++t) {
    const EpisodeRecord& r = ledger.records[t];
    REQUIRE(rows[t].size() == 6 + 2 * 2 + 1);
    CHECK(rows[t][0] == r.episode);
    CHECK(rows[t][1] == r.initial_state);
    CHECK(rows[t][2] == r.v_star);  // bitwise through %.17g
    CHECK(rows[t][3] == r.v_pi);
    CHECK(rows[t][4] == r.gap);
    CHECK(rows[t][5] == r.cum_regret);
    CHECK(rows[t][6] == r.beta_by_step[0]);
    CHECK(rows[t][8] == r.gamma_by_step[0]);
  }
  CHECK_THROWS_AS(parse_csv_rows("h\n1,x\n"), std::invalid_argument);

  const std::string path = "harness_csv.tmp.csv";
  emit_csv(cfg, ledger, path);
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  CHECK(buf.str() == csv);
  std::remove(path.c_str());
}

TEST_CASE("coverage: noiseless fits always land inside the band") {
  const ExperimentConfig cfg = parse_config(
      "beta.sigma = 0\nbeta.c_f = 1\nagent.rho = 0.1\n"
      "coverage.trials = 40\ncoverage.n = 20\ncoverage.test-points = 16\n"
      "coverage.centers = 6\n");
  const CoverageReport report = coverage_experiment(cfg);
  REQUIRE(report.trials.size() == 40);
  CHECK(report.coverage == 1.0);
  for (const CoverageTrial& t : report.trials) CHECK(t.max_width > 0.0);
}

TEST_CASE("coverage: zero width with real noise almost never hits") {
  const ExperimentConfig cfg = parse_config(
      "beta.sigma = 0.5\ncoverage.beta-scale = 0\n"
      "coverage.trials = 40\ncoverage.n = 20\ncoverage.test-points = 16\n");
  const CoverageReport report = coverage_experiment(cfg);
  CHECK(report.coverage <= 0.05);
}

TEST_CASE("coverage is monotone in the width scale") {
  const std::string base =
      "beta.sigma = 0.75\nagent.rho = 0.3\nbeta.c_f = 0.5\n"
      "coverage.trials = 60\ncoverage.n = 15\ncoverage.test-points = 12\n"
      "coverage.beta-scale = ";
  const CoverageReport narrow =
      coverage_experiment(parse_config(base + "0.25\n"));
  const CoverageReport wide = coverage_experiment(parse_config(base + "2\n"));
  CHECK(wide.hits >= narrow.hits);  // same noise realizations per trial

  // And the stock interval is comfortably calibrated.
  const CoverageReport stock = coverage_experiment(parse_config(
      "beta.sigma = 0.25\nagent.rho = 0.1\n"
      "coverage.trials = 100\ncoverage.n = 30\ncoverage.test-points = 16\n"));
  CHECK(stock.coverage >= 0.9);

  const std::string csv = coverage_csv(parse_config(""), stock);
  const auto rows = parse_csv_rows(csv);
  REQUIRE(rows.size() == 100);
  CHECK(rows[0].size() == 4);
}

TEST_CASE("sweeps aggregate replicate ledgers deterministically") {
  const ExperimentConfig cfg = parse_config(
      "mdp.states = 3\nmdp.actions = 2\nmdp.horizon = 2\n"
      "experiment.episodes = 10\nexperiment.seeds = 3\nexperiment.seed = 5\n");
  const SweepResult result = sweep(cfg);
  REQUIRE(result.rows.size() == 10);
  REQUIRE(result.final_regret_by_seed.size() == 3);

  double mean_final = 0.0;
  for (double r : result.final_regret_by_seed) mean_final += r;
  mean_final /= 3.0;
  CHECK(result.rows.back().mean_cum_regret ==
        Catch::Approx(mean_final).margin(1e-12));

  // Replicate i of the sweep equals a run at seed base+i.
  ExperimentConfig rep = cfg;
  rep.seed = 6;
  CHECK(run_experiment(rep).final_regret() ==
        Catch::Approx(result.final_regret_by_seed[1]).margin(1e-12));

  const SweepResult again = sweep(cfg);
  CHECK(sweep_csv(cfg, again) == sweep_csv(cfg, result));

  const ExperimentConfig solo = parse_config(
      "mdp.states = 3\nmdp.actions = 2\nmdp.horizon = 2\n"
      "experiment.episodes = 4\n");
  for (const SweepRow& row : sweep(solo).rows)
    CHECK(row.stderr_cum_regret == 0.0);
}

TEST_CASE("info-gain table compares realized and greedy designs") {
  const ExperimentConfig cfg = parse_config(
      "agent.rho = 0.5\ncoverage.test-points = 9\ncoverage.dim = 1\n"
      "infogain.max-n = 12\ninfogain.step = 3\n");
  const auto rows = info_gain_table(cfg);
  REQUIRE(rows.size() == 4);
  double prev_realized = 0.0, prev_greedy = 0.0;
  for (const InfoGainRow& row : rows) {
    CHECK(row.realized >= prev_realized - 1e-12);
    CHECK(row.greedy >= prev_greedy - 1e-12);
    // greedy >= (1 - 1/e) * sup >= (1 - 1/e) * realized
    CHECK(row.greedy >= (1.0 - 1.0 / std::exp(1.0)) * row.realized - 1e-9);
    prev_realized = row.realized;
    prev_greedy = row.greedy;
  }
  CHECK(rows[0].greedy >= rows[0].realized - 1e-12);  // n=1: greedy maximizes
  CHECK(parse_csv_rows(info_gain_csv(cfg, rows)).size() == 4);
}

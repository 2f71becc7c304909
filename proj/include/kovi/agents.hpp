#pragma once

// Learning agents over tabulated kernel MDPs.
//
// The main agent performs optimistic least-squares value iteration: at each
// step h it fits a KRR posterior to bootstrapped value targets and acts
// greedily on Q_h(z) = min{clip, max{0, r_h(z) + mean(z) + beta * stddev(z)}}.
// Q is evaluated on the finite (state, action) grid, so a plan is a table.
//
// kovi_plan() is the batch reference implementation (refits from scratch).
// KoviAgent keeps incremental per-step factors and per-grid-point caches so a
// full T-episode run costs O(T^2) factor work per step instead of O(T^3).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "kovi/beta.hpp"
#include "kovi/kernel.hpp"
#include "kovi/krr.hpp"
#include "kovi/mdp.hpp"
#include "kovi/point.hpp"
#include "kovi/rng.hpp"

namespace kovi {

enum class AgentKind { kovi, kernel_ucb_bandit, random_uniform, greedy_no_bonus };

inline std::string to_string(AgentKind kind) {
  switch (kind) {
    case AgentKind::kovi: return "kovi";
    case AgentKind::kernel_ucb_bandit: return "kernel-ucb-bandit";
    case AgentKind::random_uniform: return "random";
    case AgentKind::greedy_no_bonus: return "greedy-oracle-free";
  }
  throw std::logic_error("unreachable agent kind");
}

inline AgentKind agent_kind_from_string(const std::string& name) {
  if (name == "kovi") return AgentKind::kovi;
  if (name == "kernel-ucb-bandit") return AgentKind::kernel_ucb_bandit;
  if (name == "random") return AgentKind::random_uniform;
  if (name == "greedy-oracle-free") return AgentKind::greedy_no_bonus;
  throw std::invalid_argument("unknown agent kind '" + name + "'");
}

struct AgentConfig {
  AgentKind kind = AgentKind::kovi;
  KernelSpec spec;
  double rho = 1.0;
  double clip = 1.0;  // value cap; must equal the horizon of the target MDP
  BetaSchedule beta;

  void validate() const {
    spec.validate();
    beta.validate();
    if (!(rho > 0.0)) throw std::invalid_argument("agent: rho must be positive");
    if (!(clip > 0.0)) throw std::invalid_argument("agent: clip must be positive");
  }
};

// The slice of an Mdp that agents are allowed to see: geometry and rewards,
// never transitions or certificates.
class MdpView {
 public:
  explicit MdpView(const Mdp& mdp) : mdp_(&mdp) {}

  int num_states() const { return mdp_->num_states(); }
  int num_actions() const { return mdp_->num_actions(); }
  int horizon() const { return mdp_->horizon; }
  double reward(int h, int s, int a) const { return mdp_->reward(h, s, a); }
  Point z(int s, int a) const { return mdp_->z_point(s, a); }

 private:
  const Mdp* mdp_;
};

// Everything observed at one step index across past episodes.
struct StepHistory {
  std::vector<Point> inputs;     // z = (s, a) visited at this step
  std::vector<int> next_states;  // state reached afterwards
};

struct EpisodePlan {
  int num_states = 0;
  int num_actions = 0;
  std::vector<std::vector<double>> q;  // per step: S*A values, state-major
  std::vector<double> beta_by_step;
  std::vector<double> gamma_by_step;
};

// Greedy action with lowest-index tie-breaking.
inline int act(const EpisodePlan& plan, int h, int s) {
  if (h < 0 || static_cast<std::size_t>(h) >= plan.q.size())
    throw std::invalid_argument("act: step out of range");
  if (s < 0 || s >= plan.num_states)
    throw std::invalid_argument("act: state out of range");
  const std::vector<double>& row = plan.q[h];
  int best = 0;
  for (int a = 1; a < plan.num_actions; ++a)
    if (row[s * plan.num_actions + a] > row[s * plan.num_actions + best])
      best = a;
  return best;
}

inline PolicyTable greedy_policy(const EpisodePlan& plan) {
  PolicyTable policy(plan.q.size(), std::vector<int>(plan.num_states));
  for (std::size_t h = 0; h < plan.q.size(); ++h)
    for (int s = 0; s < plan.num_states; ++s)
      policy[h][s] = act(plan, static_cast<int>(h), s);
  return policy;
}

inline double clip_value(double q, double clip) {
  return std::min(clip, std::max(0.0, q));
}

namespace detail {

inline void check_agent_against_view(const AgentConfig& cfg,
                                     const MdpView& view) {
  cfg.validate();
  if (cfg.clip != static_cast<double>(view.horizon()))
    throw std::invalid_argument(
        "agent: clip must equal the MDP horizon (value class cap)");
}

}  // namespace detail

// Batch reference planner: refits every per-step posterior from scratch.
inline EpisodePlan kovi_plan(const MdpView& view,
                             const std::vector<StepHistory>& history,
                             const AgentConfig& cfg) {
  detail::check_agent_against_view(cfg, view);
  const int H = view.horizon(), S = view.num_states(), A = view.num_actions();
  if (history.size() != static_cast<std::size_t>(H))
    throw std::invalid_argument("kovi_plan: history must have one entry per step");

  EpisodePlan plan;
  plan.num_states = S;
  plan.num_actions = A;
  plan.q.assign(H, std::vector<double>(static_cast<std::size_t>(S) * A, 0.0));
  plan.beta_by_step.assign(H, 0.0);
  plan.gamma_by_step.assign(H, 0.0);

  std::vector<double> v_next(S, 0.0);  // V_{h+1}; zero beyond the last step
  for (int h = H - 1; h >= 0; --h) {
    const StepHistory& hist = history[h];
    std::vector<double> targets(hist.inputs.size());
    for (std::size_t i = 0; i < hist.inputs.size(); ++i)
      targets[i] = v_next[hist.next_states[i]];
    const Posterior post = fit_posterior(cfg.spec, cfg.rho, hist.inputs, targets);
    const double gamma = post.information_gain();
    const double beta = beta_width(cfg.beta, post.size(), gamma);
    plan.gamma_by_step[h] = gamma;
    plan.beta_by_step[h] = beta;
    for (int s = 0; s < S; ++s) {
      double best = 0.0;
      for (int a = 0; a < A; ++a) {
        const Point z = view.z(s, a);
        const double q = clip_value(
            view.reward(h, s, a) + post.mean(z) + beta * post.stddev(z),
            cfg.clip);
        plan.q[h][static_cast<std::size_t>(s) * A + a] = q;
        if (a == 0 || q > best) best = q;
      }
      v_next[s] = best;
    }
  }
  return plan;
}

// Incremental posterior over a fixed evaluation grid.  Appending one
// observation extends the Cholesky factor by a row and refreshes the cached
// cross-covariances, whitened cross terms, and grid variances in O(n * m).
// Re-solving dual weights for fresh targets against the unchanged factor is
// O(n^2), so per-episode replanning never refactorizes.
class StepModel {
 public:
  StepModel() = default;
  StepModel(KernelSpec spec, double rho, std::vector<Point> grid)
      : post_(std::move(spec), rho), grid_(std::move(grid)) {
    if (grid_.empty())
      throw std::invalid_argument("step model: evaluation grid is empty");
    const auto m = static_cast<Eigen::Index>(grid_.size());
    var_.resize(grid_.size());
    for (std::size_t i = 0; i < grid_.size(); ++i)
      var_[i] = eval_kernel(post_.spec(), grid_[i], grid_[i]);
    cross_.resize(m, 0);
    whitened_.resize(m, 0);
  }

  std::size_t size() const { return post_.size(); }
  const std::vector<Point>& grid() const { return grid_; }
  const Posterior& posterior() const { return post_; }
  double information_gain() const { return post_.information_gain(); }
  const std::vector<double>& variances() const { return var_; }

  double stddev(std::size_t i) const { return std::sqrt(var_.at(i)); }

  void append(const Point& z) {
    const auto n = static_cast<Eigen::Index>(post_.size());
    reserve_columns(n + 1);
    for (Eigen::Index i = 0; i < cross_.rows(); ++i)
      cross_(i, n) = eval_kernel(post_.spec(), grid_[static_cast<std::size_t>(i)], z);

    post_ = append_observation(std::move(post_), z, 0.0);

    const auto row = post_.chol_row(static_cast<std::size_t>(n));
    const Eigen::Map<const Eigen::VectorXd> l12(row.data(), n);
    const double l22 = row[static_cast<std::size_t>(n)];
    whitened_.col(n) =
        (cross_.col(n) - whitened_.leftCols(n) * l12) / l22;
    for (Eigen::Index i = 0; i < whitened_.rows(); ++i) {
      double v = var_[static_cast<std::size_t>(i)] - whitened_(i, n) * whitened_(i, n);
      if (v < 0.0) {
        if (v < -1e-10)
          throw std::runtime_error("step model variance went negative");
        v = 0.0;
      }
      var_[static_cast<std::size_t>(i)] = v;
    }
  }

  // Posterior means at every grid point for the given targets, using the
  // current factor.  Targets are per past observation, in append order.
  std::vector<double> means(const std::vector<double>& targets) const {
    if (targets.size() != post_.size())
      throw std::invalid_argument("step model: one target per observation required");
    std::vector<double> out(grid_.size(), 0.0);
    if (targets.empty()) return out;
    const auto n = static_cast<Eigen::Index>(targets.size());
    const Eigen::Map<const Eigen::VectorXd> t(targets.data(), n);
    const Eigen::VectorXd alpha = post_.backward_solve(post_.forward_solve(t));
    const Eigen::VectorXd m = cross_.leftCols(n) * alpha;
    for (std::size_t i = 0; i < out.size(); ++i)
      out[i] = m[static_cast<Eigen::Index>(i)];
    return out;
  }

 private:
  void reserve_columns(Eigen::Index needed) {
    if (needed <= cross_.cols()) return;
    const Eigen::Index cap = std::max<Eigen::Index>(16, 2 * cross_.cols());
    const Eigen::Index n = static_cast<Eigen::Index>(post_.size());
    Eigen::MatrixXd c(cross_.rows(), std::max(cap, needed));
    Eigen::MatrixXd w(whitened_.rows(), std::max(cap, needed));
    c.leftCols(n) = cross_.leftCols(n);
    w.leftCols(n) = whitened_.leftCols(n);
    cross_.swap(c);
    whitened_.swap(w);
  }

  Posterior post_;  // stored targets unused; factor + solves only
  std::vector<Point> grid_;
  Eigen::MatrixXd cross_;     // m x cap; column t holds k(grid, z_t)
  Eigen::MatrixXd whitened_;  // m x cap; column t of L^{-1} K_cross^T rows
  std::vector<double> var_;   // posterior variance at each grid point
};

// Optimistic value-iteration agent with incremental per-step models.
class KoviAgent {
 public:
  KoviAgent(const Mdp& mdp, AgentConfig cfg)
      : view_(mdp), cfg_(std::move(cfg)) {
    detail::check_agent_against_view(cfg_, view_);
    const int H = view_.horizon();
    std::vector<Point> grid;
    grid.reserve(static_cast<std::size_t>(view_.num_states()) *
                 view_.num_actions());
    for (int s = 0; s < view_.num_states(); ++s)
      for (int a = 0; a < view_.num_actions(); ++a) grid.push_back(view_.z(s, a));
    models_.reserve(H);
    for (int h = 0; h < H; ++h) models_.emplace_back(cfg_.spec, cfg_.rho, grid);
    histories_.resize(H);
  }

  const AgentConfig& config() const { return cfg_; }
  const std::vector<StepHistory>& history() const { return histories_; }

  void observe(int h, int s, int a, int next_state) {
    if (h < 0 || h >= view_.horizon() || s < 0 || s >= view_.num_states() ||
        a < 0 || a >= view_.num_actions() || next_state < 0 ||
        next_state >= view_.num_states())
      throw std::invalid_argument("agent observe: index out of range");
    histories_[h].inputs.push_back(view_.z(s, a));
    histories_[h].next_states.push_back(next_state);
    models_[h].append(histories_[h].inputs.back());
  }

  EpisodePlan plan() const {
    const int H = view_.horizon(), S = view_.num_states(), A = view_.num_actions();
    EpisodePlan plan;
    plan.num_states = S;
    plan.num_actions = A;
    plan.q.assign(H, std::vector<double>(static_cast<std::size_t>(S) * A, 0.0));
    plan.beta_by_step.assign(H, 0.0);
    plan.gamma_by_step.assign(H, 0.0);

    std::vector<double> v_next(S, 0.0);
    std::vector<double> targets;
    for (int h = H - 1; h >= 0; --h) {
      const StepModel& model = models_[h];
      const StepHistory& hist = histories_[h];
      targets.resize(hist.next_states.size());
      for (std::size_t i = 0; i < targets.size(); ++i)
        targets[i] = v_next[hist.next_states[i]];
      const std::vector<double> means = model.means(targets);
      const double gamma = model.information_gain();
      const double beta = beta_width(cfg_.beta, model.size(), gamma);
      plan.gamma_by_step[h] = gamma;
      plan.beta_by_step[h] = beta;
      for (int s = 0; s < S; ++s) {
        double best = 0.0;
        for (int a = 0; a < A; ++a) {
          const std::size_t i = static_cast<std::size_t>(s) * A + a;
          const double q = clip_value(
              view_.reward(h, s, a) + means[i] + beta * model.stddev(i),
              cfg_.clip);
          plan.q[h][i] = q;
          if (a == 0 || q > best) best = q;
        }
        v_next[s] = best;
      }
    }
    return plan;
  }

 private:
  MdpView view_;
  AgentConfig cfg_;
  std::vector<StepModel> models_;
  std::vector<StepHistory> histories_;
};

// One decision of the stand-alone kernel-UCB bandit: fit the history, then
// take the highest upper confidence bound over the candidates.
inline int kernel_ucb_bandit_step(const std::vector<Point>& points,
                                  const std::vector<double>& rewards,
                                  const std::vector<Point>& candidates,
                                  const AgentConfig& cfg) {
  cfg.validate();
  if (candidates.empty())
    throw std::invalid_argument("bandit step: no candidates");
  if (points.size() != rewards.size())
    throw std::invalid_argument("bandit step: one reward per point required");
  const Posterior post = fit_posterior(cfg.spec, cfg.rho, points, rewards);
  const double beta = beta_width(cfg.beta, post.size(), post.information_gain());
  int best = 0;
  double best_ucb = 0.0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const double ucb =
        post.mean(candidates[i]) + beta * post.stddev(candidates[i]);
    if (i == 0 || ucb > best_ucb) {
      best_ucb = ucb;
      best = static_cast<int>(i);
    }
  }
  return best;
}

// Kernel-UCB agent embedded in a horizon-1 MDP with known rewards.  Its
// index r(z) + mean(z) + beta * stddev(z) is computed through the same
// incremental machinery as KoviAgent, so with identical seeds and configs
// the two agents take identical actions on any one-step task.
class KernelUcbAgent {
 public:
  KernelUcbAgent(const Mdp& mdp, AgentConfig cfg)
      : view_(mdp), cfg_(std::move(cfg)) {
    detail::check_agent_against_view(cfg_, view_);
    if (view_.horizon() != 1)
      throw std::invalid_argument("kernel-ucb agent requires horizon 1");
    std::vector<Point> grid;
    for (int s = 0; s < view_.num_states(); ++s)
      for (int a = 0; a < view_.num_actions(); ++a) grid.push_back(view_.z(s, a));
    model_ = StepModel(cfg_.spec, cfg_.rho, grid);
  }

  const AgentConfig& config() const { return cfg_; }

  void observe(int s, int a, int next_state) {
    if (s < 0 || s >= view_.num_states() || a < 0 || a >= view_.num_actions() ||
        next_state < 0 || next_state >= view_.num_states())
      throw std::invalid_argument("agent observe: index out of range");
    (void)next_state;  // terminal: the successor carries no value
    model_.append(view_.z(s, a));
    targets_.push_back(0.0);
  }

  EpisodePlan plan() const {
    const int S = view_.num_states(), A = view_.num_actions();
    EpisodePlan plan;
    plan.num_states = S;
    plan.num_actions = A;
    plan.q.assign(1, std::vector<double>(static_cast<std::size_t>(S) * A, 0.0));
    const std::vector<double> means = model_.means(targets_);
    const double gamma = model_.information_gain();
    const double beta = beta_width(cfg_.beta, model_.size(), gamma);
    plan.gamma_by_step = {gamma};
    plan.beta_by_step = {beta};
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < A; ++a) {
        const std::size_t i = static_cast<std::size_t>(s) * A + a;
        plan.q[0][i] = clip_value(
            view_.reward(0, s, a) + means[i] + beta * model_.stddev(i),
            cfg_.clip);
      }
    return plan;
  }

  int act_at(int s) const { return act(plan(), 0, s); }

 private:
  MdpView view_;
  AgentConfig cfg_;
  StepModel model_;
  std::vector<double> targets_;  // terminal values, identically zero
};

// Control baselines.
inline int baseline_act(Rng& rng, int num_actions) {
  if (num_actions <= 0) throw std::invalid_argument("baseline: no actions");
  return static_cast<int>(rng.below(static_cast<std::uint64_t>(num_actions)));
}

inline int baseline_act(int fixed_index, int num_actions) {
  if (num_actions <= 0) throw std::invalid_argument("baseline: no actions");
  if (fixed_index < 0 || fixed_index >= num_actions)
    throw std::invalid_argument("baseline: fixed action out of range");
  return fixed_index;
}

}  // namespace kovi

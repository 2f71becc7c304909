#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "kovi/kernel.hpp"
#include "kovi/point.hpp"
#include "kovi/rkhs.hpp"
#include "kovi/rng.hpp"

namespace kovi {

// Finite episodic MDP.  States and actions are grid points in [0,1]^d so the
// (s, a) pairs embed into the kernel's domain; transitions are tabulated, and
// generated instances carry one representer certificate per (step, next
// state) witnessing that the transition row, as a function of z = (s, a),
// lies in the kernel's RKHS with norm at most norm_bound.
struct Mdp {
  std::vector<Point> states;
  std::vector<Point> actions;
  int horizon = 1;
  // rewards[h][s * A + a]; transitions[h][(s * A + a) * S + s'].
  std::vector<std::vector<double>> rewards;
  std::vector<std::vector<double>> transitions;
  KernelSpec spec;
  double norm_bound = 0.0;
  // certificates[h][s']; empty for hand-built instances.
  std::vector<std::vector<RepresenterFunction>> certificates;
  std::uint64_t seed = 0;

  int num_states() const { return static_cast<int>(states.size()); }
  int num_actions() const { return static_cast<int>(actions.size()); }

  Point z_point(int s, int a) const { return concat(states[s], actions[a]); }

  double reward(int h, int s, int a) const {
    return rewards[h][s * num_actions() + a];
  }

  std::span<const double> transition_row(int h, int s, int a) const {
    return {transitions[h].data() +
                static_cast<std::size_t>(s * num_actions() + a) *
                    num_states(),
            static_cast<std::size_t>(num_states())};
  }

  void validate() const {
    spec.validate();
    const std::size_t s = states.size(), a = actions.size();
    if (s == 0 || a == 0 || horizon < 1)
      throw std::invalid_argument("mdp: needs states, actions, horizon >= 1");
    if (rewards.size() != static_cast<std::size_t>(horizon) ||
        transitions.size() != static_cast<std::size_t>(horizon))
      throw std::invalid_argument("mdp: tables must cover every step");
    for (int h = 0; h < horizon; ++h) {
      if (rewards[h].size() != s * a || transitions[h].size() != s * a * s)
        throw std::invalid_argument("mdp: table shape mismatch");
    }
  }
};

// All (h, s) -> action assignments for one episode.
using PolicyTable = std::vector<std::vector<int>>;

struct Trajectory {
  struct Step {
    int state = 0;
    int action = 0;
    int next_state = 0;
    double reward = 0.0;
  };
  int episode = 0;
  int initial_state = 0;
  std::vector<Step> steps;
};

// Optimal (or policy) state and state-action values: v[h][s] for
// h = 0..H (v[H] is the terminal zero row) and q[h][s * A + a] for h < H.
struct ValueTable {
  std::vector<std::vector<double>> v;
  std::vector<std::vector<double>> q;
};

// Uniform lattice of `count` points in [0,1]^dim: the smallest per-axis grid
// with enough sites, enumerated with axis 0 varying fastest.
inline std::vector<Point> lattice_grid(int count, int dim) {
  if (count < 1 || dim < 1)
    throw std::invalid_argument("lattice_grid: count and dim must be >= 1");
  int g = 1;
  while (std::pow(static_cast<double>(g), dim) < static_cast<double>(count))
    ++g;
  std::vector<Point> pts;
  pts.reserve(count);
  for (int i = 0; i < count; ++i) {
    Point p;
    p.coords.resize(dim);
    int rem = i;
    for (int k = 0; k < dim; ++k) {
      const int digit = rem % g;
      rem /= g;
      p.coords[k] =
          (g == 1) ? 0.5 : static_cast<double>(digit) / (g - 1);
    }
    pts.push_back(std::move(p));
  }
  return pts;
}

namespace detail {

// Upper bound on sup_z k_base(z, c) over z in [0,1]^d.  Stationary families
// peak at distance zero; the linear family peaks at the all-ones corner.
inline double base_sup_bound(const KernelSpec& spec, const Point& center) {
  if (spec.family != KernelFamily::linear) return spec.scale;
  double s = 0.0;
  for (double c : center.coords) s += c;
  return spec.scale * s / (spec.lengthscale * spec.lengthscale);
}

}  // namespace detail

// Random RKHS-certified MDP.  Transition rows are built as
//
//   P_h(s' | z) = 1/S + sum_j w[j][s'] k_base(z, c_j)
//
// with the weights summing to zero across s' for every center (rows then
// telescope to exactly 1) and sum_j |w[j][s']| sup k_base <= perturbation
// (entries then stay >= 1/S - perturbation >= 0).  Each row is tabulated by
// evaluating its certificate, so reconstruction is exact by construction.
inline Mdp make_random_rkhs_mdp(const KernelSpec& spec, int state_dim,
                                int action_dim, int num_states,
                                int num_actions, int horizon,
                                double perturbation, int centers_per_row,
                                std::uint64_t seed) {
  spec.validate();
  if (!(spec.offset > 0.0))
    throw std::invalid_argument(
        "make_random_rkhs_mdp: kernel offset must be positive so the "
        "uniform baseline is certifiable");
  if (state_dim < 1 || action_dim < 1)
    throw std::invalid_argument("make_random_rkhs_mdp: dims must be >= 1");
  if (num_states < 1 || num_actions < 1 || horizon < 1)
    throw std::invalid_argument("make_random_rkhs_mdp: sizes must be >= 1");
  if (centers_per_row < 1)
    throw std::invalid_argument(
        "make_random_rkhs_mdp: centers_per_row must be >= 1");
  const double inv_s = 1.0 / num_states;
  if (perturbation < 0.0 || perturbation > inv_s)
    throw std::invalid_argument(
        "make_random_rkhs_mdp: perturbation must lie in [0, 1/num_states]");

  Mdp mdp;
  mdp.spec = spec;
  mdp.seed = seed;
  mdp.horizon = horizon;
  mdp.states = lattice_grid(num_states, state_dim);
  mdp.actions = lattice_grid(num_actions, action_dim);

  Rng structure_rng(derive_seed(seed, 0));
  Rng reward_rng(derive_seed(seed, 1));
  const int z_dim = state_dim + action_dim;

  mdp.rewards.resize(horizon);
  mdp.transitions.resize(horizon);
  mdp.certificates.resize(horizon);
  double max_norm = 0.0;

  for (int h = 0; h < horizon; ++h) {
    // Shared perturbation centers for this step.
    std::vector<Point> centers(centers_per_row);
    for (auto& c : centers) {
      c.coords.resize(z_dim);
      for (auto& x : c.coords) x = structure_rng.uniform();
    }

    // Zero-sum weights per center, scaled so the worst next-state column
    // meets the perturbation budget with equality.
    std::vector<std::vector<double>> w(
        centers_per_row, std::vector<double>(num_states, 0.0));
    if (perturbation > 0.0) {
      for (auto& row : w) {
        double mean = 0.0;
        for (auto& x : row) {
          x = structure_rng.uniform(-1.0, 1.0);
          mean += x;
        }
        mean /= num_states;
        for (auto& x : row) x -= mean;
      }
      double worst = 0.0;
      for (int sp = 0; sp < num_states; ++sp) {
        double col = 0.0;
        for (int j = 0; j < centers_per_row; ++j)
          col += std::abs(w[j][sp]) *
                 detail::base_sup_bound(spec, centers[j]);
        worst = std::max(worst, col);
      }
      if (worst > 0.0) {
        const double f = perturbation / worst;
        for (auto& row : w)
          for (auto& x : row) x *= f;
      }
    }

    // One certificate per next state; the constant component absorbs the
    // uniform baseline minus the offset the full-kernel sections carry.
    mdp.certificates[h].resize(num_states);
    for (int sp = 0; sp < num_states; ++sp) {
      RepresenterFunction& cert = mdp.certificates[h][sp];
      cert.spec = spec;
      cert.centers = centers;
      cert.weights.resize(centers_per_row);
      double wsum = 0.0;
      for (int j = 0; j < centers_per_row; ++j) {
        cert.weights[j] = w[j][sp];
        wsum += w[j][sp];
      }
      cert.constant = inv_s - spec.offset * wsum;
      max_norm = std::max(max_norm, rkhs_norm(cert));
    }

    // Tabulate rewards and transitions; rows come from the certificates so
    // verification reconstructs them bit-exactly.
    mdp.rewards[h].resize(static_cast<std::size_t>(num_states) * num_actions);
    mdp.transitions[h].resize(static_cast<std::size_t>(num_states) *
                              num_actions * num_states);
    for (int s = 0; s < num_states; ++s) {
      for (int a = 0; a < num_actions; ++a) {
        mdp.rewards[h][s * num_actions + a] = reward_rng.uniform();
        const Point z = mdp.z_point(s, a);
        const std::size_t base =
            static_cast<std::size_t>(s * num_actions + a) * num_states;
        for (int sp = 0; sp < num_states; ++sp)
          mdp.transitions[h][base + sp] =
              rkhs_eval(mdp.certificates[h][sp], z);
      }
    }
  }

  mdp.norm_bound = max_norm * (1.0 + 1e-9);
  return mdp;
}

// Per-(step, next-state) certification report.
struct AssumptionReport {
  struct Entry {
    int h = 0;
    int next_state = 0;
    double norm = 0.0;        // certificate RKHS norm
    double recon_error = 0.0; // max |certificate(z) - table| over the grid
    double min_entry = 0.0;   // min transition probability in this column
  };
  double norm_bound = 0.0;
  double max_norm = 0.0;
  double max_recon_error = 0.0;
  double max_row_sum_error = 0.0;
  double min_entry = 0.0;
  bool pass = false;
  std::vector<Entry> entries;

  std::string to_text() const {
    std::ostringstream out;
    out << "assumption report: norm bound u = " << norm_bound << "\n";
    out << "h next_state norm recon_error min_entry\n";
    for (const auto& e : entries)
      out << e.h << " " << e.next_state << " " << e.norm << " "
          << e.recon_error << " " << e.min_entry << "\n";
    out << "max norm            = " << max_norm << "\n";
    out << "max recon error     = " << max_recon_error << "\n";
    out << "max row-sum error   = " << max_row_sum_error << "\n";
    out << "min entry           = " << min_entry << "\n";
    out << "verdict             = " << (pass ? "PASS" : "FAIL") << "\n";
    return out.str();
  }
};

// Checks that every transition row is reconstructed by its certificate to
// 1e-9, that certificate norms respect the recorded bound, and that rows are
// stochastic (sums within 1e-9 of one, entries nonnegative to jitter).
inline AssumptionReport verify_assumption(const Mdp& mdp) {
  mdp.validate();
  if (mdp.certificates.size() != static_cast<std::size_t>(mdp.horizon))
    throw std::invalid_argument(
        "verify_assumption: the instance carries no certificates");
  const int S = mdp.num_states(), A = mdp.num_actions();

  AssumptionReport report;
  report.norm_bound = mdp.norm_bound;
  report.min_entry = 1.0;
  for (int h = 0; h < mdp.horizon; ++h) {
    if (mdp.certificates[h].size() != static_cast<std::size_t>(S))
      throw std::invalid_argument(
          "verify_assumption: missing certificate for some next state");
    for (int sp = 0; sp < S; ++sp) {
      AssumptionReport::Entry e;
      e.h = h;
      e.next_state = sp;
      e.norm = rkhs_norm(mdp.certificates[h][sp]);
      e.min_entry = 1.0;
      for (int s = 0; s < S; ++s) {
        for (int a = 0; a < A; ++a) {
          const double table = mdp.transition_row(h, s, a)[sp];
          const double fit =
              rkhs_eval(mdp.certificates[h][sp], mdp.z_point(s, a));
          e.recon_error = std::max(e.recon_error, std::abs(fit - table));
          e.min_entry = std::min(e.min_entry, table);
        }
      }
      report.entries.push_back(e);
      report.max_norm = std::max(report.max_norm, e.norm);
      report.max_recon_error = std::max(report.max_recon_error, e.recon_error);
      report.min_entry = std::min(report.min_entry, e.min_entry);
    }
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < A; ++a) {
        double sum = 0.0;
        for (double p : mdp.transition_row(h, s, a)) sum += p;
        report.max_row_sum_error =
            std::max(report.max_row_sum_error, std::abs(sum - 1.0));
      }
    }
  }
  report.pass = report.max_norm <= report.norm_bound &&
                report.max_recon_error <= 1e-9 &&
                report.max_row_sum_error <= 1e-9 &&
                report.min_entry >= -1e-12;
  return report;
}

// Inverse-CDF draw from the transition row.
inline int transition_sample(const Mdp& mdp, int h, int s, int a, Rng& rng) {
  if (h < 0 || h >= mdp.horizon || s < 0 || s >= mdp.num_states() || a < 0 ||
      a >= mdp.num_actions())
    throw std::invalid_argument("transition_sample: index out of range");
  const double u = rng.uniform();
  double cum = 0.0;
  const auto row = mdp.transition_row(h, s, a);
  for (int sp = 0; sp < mdp.num_states(); ++sp) {
    cum += row[sp];
    if (u < cum) return sp;
  }
  return mdp.num_states() - 1;  // guards the sum-rounding sliver at 1
}

// Exact optimal values by backward induction over the tabulated model.
inline ValueTable exact_optimal_values(const Mdp& mdp) {
  mdp.validate();
  const int S = mdp.num_states(), A = mdp.num_actions(), H = mdp.horizon;
  ValueTable t;
  t.v.assign(H + 1, std::vector<double>(S, 0.0));
  t.q.assign(H, std::vector<double>(static_cast<std::size_t>(S) * A, 0.0));
  for (int h = H - 1; h >= 0; --h) {
    for (int s = 0; s < S; ++s) {
      double best = 0.0;
      for (int a = 0; a < A; ++a) {
        double cont = 0.0;
        const auto row = mdp.transition_row(h, s, a);
        for (int sp = 0; sp < S; ++sp) cont += row[sp] * t.v[h + 1][sp];
        const double q = mdp.reward(h, s, a) + cont;
        t.q[h][s * A + a] = q;
        if (a == 0 || q > best) best = q;
      }
      t.v[h][s] = best;
    }
  }
  return t;
}

// Exact policy evaluation: same induction with the policy's action in place
// of the maximum.
inline ValueTable evaluate_policy(const Mdp& mdp, const PolicyTable& policy) {
  mdp.validate();
  const int S = mdp.num_states(), A = mdp.num_actions(), H = mdp.horizon;
  if (policy.size() != static_cast<std::size_t>(H))
    throw std::invalid_argument("evaluate_policy: policy must cover every step");
  for (const auto& row : policy) {
    if (row.size() != static_cast<std::size_t>(S))
      throw std::invalid_argument(
          "evaluate_policy: policy must cover every state");
    for (int a : row)
      if (a < 0 || a >= A)
        throw std::invalid_argument("evaluate_policy: action out of range");
  }
  ValueTable t;
  t.v.assign(H + 1, std::vector<double>(S, 0.0));
  t.q.assign(H, std::vector<double>(static_cast<std::size_t>(S) * A, 0.0));
  for (int h = H - 1; h >= 0; --h) {
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < A; ++a) {
        double cont = 0.0;
        const auto row = mdp.transition_row(h, s, a);
        for (int sp = 0; sp < S; ++sp) cont += row[sp] * t.v[h + 1][sp];
        t.q[h][s * A + a] = mdp.reward(h, s, a) + cont;
      }
      t.v[h][s] = t.q[h][s * A + policy[h][s]];
    }
  }
  return t;
}

}  // namespace kovi

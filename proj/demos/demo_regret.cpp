// Run the optimistic planner and the uniform-random baseline on the same
// randomly generated MDP and print cumulative regret at a few checkpoints.

#include <cstdio>
#include <string>

#include "kovi/config.hpp"
#include "kovi/harness.hpp"

namespace {

const char* kBase = R"(kernel.family = squared-exponential
kernel.lengthscale = 0.4
kernel.offset = 0.2
mdp.states = 8
mdp.actions = 3
mdp.state-dim = 2
mdp.horizon = 3
mdp.perturbation = 0.1
mdp.seed = 11
agent.rho = 0.2
beta.kind = self-normalized
beta.sigma = 0.3
experiment.episodes = 400
experiment.seeds = 3
experiment.seed = 5
)";

kovi::SweepResult run(const std::string& kind) {
  kovi::ExperimentConfig cfg =
      kovi::parse_config(std::string(kBase) + "agent.kind = " + kind + "\n");
  return kovi::sweep(cfg);
}

}  // namespace

int main() {
  const kovi::SweepResult opt = run("kovi");
  const kovi::SweepResult rnd = run("random");

  std::printf("%8s %12s %12s %8s\n", "episode", "optimist", "random", "ratio");
  for (std::size_t t : {49UL, 99UL, 199UL, 399UL}) {
    const double a = opt.rows[t].mean_cum_regret;
    const double b = rnd.rows[t].mean_cum_regret;
    std::printf("%8zu %12.3f %12.3f %8.3f\n", t + 1, a, b, a / b);
  }

  const double tail = opt.rows.back().mean_cum_regret / 400.0;
  const double head = opt.rows[99].mean_cum_regret / 100.0;
  std::printf("\nper-episode gap: first quarter %.4f, overall %.4f\n", head,
              tail);
  return 0;
}

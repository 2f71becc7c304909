// Fit a kernel ridge posterior to noisy samples of a known RKHS function and
// print the confidence band, then show how the realized information gain
// compares with greedy max-variance selection on the same grid.

#include <cstdio>
#include <vector>

#include "kovi/beta.hpp"
#include "kovi/krr.hpp"
#include "kovi/mdp.hpp"
#include "kovi/rkhs.hpp"
#include "kovi/rng.hpp"

int main() {
  using namespace kovi;

  const KernelSpec spec{KernelFamily::squared_exponential, 0.25, 1.0, 0.1};
  const double rho = 0.05, noise = 0.1;

  RepresenterFunction f;
  f.spec = spec;
  f.centers = {Point{0.15}, Point{0.4}, Point{0.8}};
  f.weights = {1.2, -0.8, 0.9};
  std::printf("target: 3-center representer, |f| = %.4f\n", rkhs_norm(f));

  Rng rng(7);
  std::vector<Point> xs;
  std::vector<double> ys;
  for (int i = 0; i < 24; ++i) {
    Point x{rng.uniform()};
    ys.push_back(rkhs_eval(f, x) + noise * rng.normal());
    xs.push_back(std::move(x));
  }
  const Posterior post = fit_posterior(spec, rho, xs, ys);

  BetaSchedule sched;
  sched.kind = BetaKind::fixed_design;
  sched.c_f = rkhs_norm(f);
  sched.sigma = noise;
  sched.rho = rho;
  sched.delta = 0.05;
  const double beta = beta_width(sched, post.size(), 0.0);
  std::printf("n = %zu, info gain = %.4f, beta = %.4f\n\n", post.size(),
              post.information_gain(), beta);

  std::printf("%6s %9s %9s %9s %s\n", "z", "f(z)", "mean", "width", "inside");
  int misses = 0;
  for (const Point& z : lattice_grid(15, 1)) {
    const double truth = rkhs_eval(f, z);
    const double mean = post.mean(z);
    const double width = beta * post.stddev(z);
    const bool inside = std::abs(truth - mean) <= width;
    misses += inside ? 0 : 1;
    std::printf("%6.3f %9.4f %9.4f %9.4f %s\n", z[0], truth, mean, width,
                inside ? "yes" : "NO");
  }
  std::printf("\nmisses: %d of 15\n", misses);

  std::printf("\n%4s %10s %10s\n", "n", "realized", "greedy");
  const std::vector<Point> grid = lattice_grid(25, 1);
  Posterior inc(spec, rho);
  for (int n = 1; n <= 12; ++n) {
    inc = append_observation(std::move(inc), grid[(3 * n) % grid.size()], 0.0);
    std::printf("%4d %10.5f %10.5f\n", n, inc.information_gain(),
                max_info_gain_greedy(spec, rho, grid, n));
  }
  return 0;
}

#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "kovi/kernel.hpp"
#include "kovi/point.hpp"

namespace kovi {

// Kernel ridge regression posterior over n observations (z_i, v_i):
//
//   mean(z) = k_n(z)' (K_n + rho I)^{-1} v
//   var(z)  = k(z, z) - k_n(z)' (K_n + rho I)^{-1} k_n(z)
//
// held as the lower-triangular Cholesky factor of K_n + rho I in packed
// row-major form.  Appending an observation extends the factor by one row
// (one triangular solve, no refactorization); replacing the targets re-solves
// the dual coefficients against the unchanged factor.  Both are O(n^2), which
// is what makes per-episode refreshes affordable in the value-iteration loop.
class Posterior {
 public:
  Posterior() = default;
  Posterior(KernelSpec spec, double rho) : spec_(std::move(spec)), rho_(rho) {
    spec_.validate();
    if (!(rho > 0.0))
      throw std::invalid_argument("posterior: rho must be positive");
  }

  const KernelSpec& spec() const { return spec_; }
  double rho() const { return rho_; }
  std::size_t size() const { return points_.size(); }
  const std::vector<Point>& points() const { return points_; }
  const std::vector<double>& targets() const { return targets_; }

  // Row i of the packed factor: entries L(i, 0..i), diagonal last.
  std::span<const double> chol_row(std::size_t i) const {
    return {fac_.data() + i * (i + 1) / 2, i + 1};
  }

  // k_n(z) against the stored points.
  Eigen::VectorXd kernel_vector(const Point& z) const {
    Eigen::VectorXd kv(static_cast<Eigen::Index>(size()));
    for (std::size_t i = 0; i < size(); ++i)
      kv[static_cast<Eigen::Index>(i)] = eval_kernel(spec_, z, points_[i]);
    return kv;
  }

  double mean(const Point& z) const {
    if (size() == 0) return 0.0;
    return kernel_vector(z).dot(alpha_);
  }

  double variance(const Point& z) const {
    const double kzz = eval_kernel(spec_, z, z);
    if (size() == 0) return kzz;
    const Eigen::VectorXd w = forward_solve(kernel_vector(z));
    double var = kzz - w.squaredNorm();
    if (var < 0.0) {
      if (var < -1e-10)
        throw std::runtime_error("posterior variance went negative");
      var = 0.0;
    }
    return var;
  }

  double stddev(const Point& z) const { return std::sqrt(variance(z)); }

  // (1/2) log det(I + K_n / rho) = sum_i log(L_ii / sqrt(rho)).
  double information_gain() const {
    double g = 0.0;
    const double half_log_rho = 0.5 * std::log(rho_);
    for (std::size_t i = 0; i < size(); ++i)
      g += std::log(chol_row(i)[i]) - half_log_rho;
    return g;
  }

  // L y = b, rows of the packed factor read contiguously.
  Eigen::VectorXd forward_solve(const Eigen::VectorXd& b) const {
    const std::size_t n = size();
    Eigen::VectorXd y(static_cast<Eigen::Index>(n));
    const double* f = fac_.data();
    for (std::size_t i = 0; i < n; ++i) {
      const double* row = f + i * (i + 1) / 2;
      double s = b[static_cast<Eigen::Index>(i)];
      for (std::size_t j = 0; j < i; ++j)
        s -= row[j] * y[static_cast<Eigen::Index>(j)];
      y[static_cast<Eigen::Index>(i)] = s / row[i];
    }
    return y;
  }

  // L' x = y, in saxpy order so rows are again read contiguously.
  Eigen::VectorXd backward_solve(Eigen::VectorXd y) const {
    const std::size_t n = size();
    const double* f = fac_.data();
    for (std::size_t jj = n; jj-- > 0;) {
      const double* row = f + jj * (jj + 1) / 2;
      const double xj = y[static_cast<Eigen::Index>(jj)] / row[jj];
      y[static_cast<Eigen::Index>(jj)] = xj;
      for (std::size_t i = 0; i < jj; ++i)
        y[static_cast<Eigen::Index>(i)] -= row[i] * xj;
    }
    return y;
  }

  friend Posterior fit_posterior(const KernelSpec& spec, double rho,
                                 const std::vector<Point>& points,
                                 const std::vector<double>& targets);
  friend Posterior append_observation(Posterior post, const Point& z,
                                      double v);
  friend Posterior with_targets(Posterior post, std::vector<double> targets);

 private:
  void resolve_alpha() {
    Eigen::Map<const Eigen::VectorXd> v(targets_.data(),
                                        static_cast<Eigen::Index>(size()));
    alpha_ = backward_solve(forward_solve(v));
  }

  KernelSpec spec_{};
  double rho_ = 1.0;
  std::vector<Point> points_;
  std::vector<double> targets_;
  std::vector<double> fac_;  // packed row-major lower Cholesky factor
  Eigen::VectorXd alpha_;    // (K_n + rho I)^{-1} targets
};

// Batch fit via a dense factorization of K_n + rho I.
inline Posterior fit_posterior(const KernelSpec& spec, double rho,
                               const std::vector<Point>& points,
                               const std::vector<double>& targets) {
  Posterior post(spec, rho);
  if (points.size() != targets.size())
    throw std::invalid_argument(
        "fit_posterior: points and targets must have equal length");
  if (points.empty()) return post;
  const Eigen::Index n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd k = gram_matrix(spec, points);
  k.diagonal().array() += rho;
  const Eigen::LLT<Eigen::MatrixXd> llt(k);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error(
        "fit_posterior: K + rho I is not numerically positive definite");
  const Eigen::MatrixXd l = llt.matrixL();
  post.points_ = points;
  post.targets_ = targets;
  post.fac_.resize(static_cast<std::size_t>(n) * (n + 1) / 2);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j <= i; ++j)
      post.fac_[static_cast<std::size_t>(i) * (i + 1) / 2 + j] = l(i, j);
  post.resolve_alpha();
  return post;
}

// Extends the factor by one row; the argument is taken by value, so the
// caller's posterior is untouched unless it is moved in.
inline Posterior append_observation(Posterior post, const Point& z, double v) {
  const std::size_t n = post.size();
  if (n > 0) check_same_dim(post.points_[0], z);
  const double kzz = eval_kernel(post.spec_, z, z);
  Eigen::VectorXd l12;
  if (n > 0) l12 = post.forward_solve(post.kernel_vector(z));
  double d = kzz + post.rho_ - (n > 0 ? l12.squaredNorm() : 0.0);
  if (!(d > 0.0))
    throw std::runtime_error(
        "append_observation: factor update lost positive definiteness");
  post.fac_.reserve((n + 1) * (n + 2) / 2);
  for (std::size_t j = 0; j < n; ++j)
    post.fac_.push_back(l12[static_cast<Eigen::Index>(j)]);
  post.fac_.push_back(std::sqrt(d));
  post.points_.push_back(z);
  post.targets_.push_back(v);
  post.resolve_alpha();
  return post;
}

// Same factor, new targets (the value-iteration proxies change every
// episode; the Gram matrix does not).
inline Posterior with_targets(Posterior post, std::vector<double> targets) {
  if (targets.size() != post.size())
    throw std::invalid_argument(
        "with_targets: target length must match the posterior size");
  post.targets_ = std::move(targets);
  post.resolve_alpha();
  return post;
}

inline double predict_mean(const Posterior& post, const Point& z) {
  return post.mean(z);
}

inline double predict_stddev(const Posterior& post, const Point& z) {
  return post.stddev(z);
}

inline double info_gain(const Posterior& post) {
  return post.information_gain();
}

// Greedy approximation of the n-point information-gain supremum over a
// candidate set (repeats allowed): always pick the candidate with the
// largest current posterior variance.  Monotone submodularity of the log
// determinant puts the result within a (1 - 1/e) factor of the supremum.
inline double max_info_gain_greedy(const KernelSpec& spec, double rho,
                                   const std::vector<Point>& candidates,
                                   std::size_t n) {
  if (candidates.empty())
    throw std::invalid_argument("max_info_gain_greedy: no candidates");
  if (n == 0)
    throw std::invalid_argument("max_info_gain_greedy: n must be positive");
  Posterior post(spec, rho);
  for (std::size_t t = 0; t < n; ++t) {
    std::size_t best = 0;
    double best_var = -1.0;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      const double var = post.variance(candidates[c]);
      if (var > best_var) {
        best_var = var;
        best = c;
      }
    }
    post = append_observation(std::move(post), candidates[best], 0.0);
  }
  return post.information_gain();
}

}  // namespace kovi

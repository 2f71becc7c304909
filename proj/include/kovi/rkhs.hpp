#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "kovi/kernel.hpp"
#include "kovi/point.hpp"

namespace kovi {

// f(z) = constant + sum_i weights[i] * k(z, centers[i]).
//
// The explicit constant component exists so that functions of the form
// "uniform baseline plus kernel bumps" (the certified transition rows) can
// be represented exactly instead of through an ill-conditioned interpolation
// of the constant.  A nonzero constant requires spec.offset > 0, since only
// the offset part of the kernel carries constants in the RKHS.
struct RepresenterFunction {
  std::vector<Point> centers;
  std::vector<double> weights;
  KernelSpec spec;
  double constant = 0.0;

  void validate() const {
    spec.validate();
    if (centers.size() != weights.size())
      throw std::invalid_argument(
          "representer: centers and weights must have equal length");
    for (std::size_t i = 1; i < centers.size(); ++i)
      check_same_dim(centers[0], centers[i]);
  }
};

inline double rkhs_eval(const RepresenterFunction& f, const Point& z) {
  f.validate();
  double v = f.constant;
  for (std::size_t i = 0; i < f.centers.size(); ++i)
    v += f.weights[i] * eval_kernel(f.spec, z, f.centers[i]);
  return v;
}

// RKHS norm of f under the kernel k = offset + k_base.
//
// For a pure section combination (constant == 0) this is sqrt(a' K a) with K
// the full-kernel Gram of the centers.  With an explicit constant component
// the kernel splits as a sum of the constant kernel and the base kernel, and
// each full-kernel section contributes offset to the constant part; grouping
// terms gives
//
//   norm^2 = (constant + offset * sum(a))^2 / offset  +  a' K_base a,
//
// which reduces to a' K a when constant == 0.  For base families whose RKHS
// also contains constants this value is an upper bound on the minimal-norm
// decomposition, which is the conservative direction for certification.
inline double rkhs_norm(const RepresenterFunction& f) {
  f.validate();
  const std::size_t n = f.centers.size();
  double q = 0.0;
  if (f.constant != 0.0 && !(f.spec.offset > 0.0))
    throw std::invalid_argument(
        "representer: constant component requires a positive kernel offset");
  if (n == 0) {
    q = (f.constant == 0.0) ? 0.0
                            : f.constant * f.constant / f.spec.offset;
  } else {
    Eigen::Map<const Eigen::VectorXd> a(f.weights.data(),
                                        static_cast<Eigen::Index>(n));
    if (f.spec.offset > 0.0) {
      const Eigen::MatrixXd kb = gram_matrix(f.spec.without_offset(), f.centers);
      const double c = f.constant + f.spec.offset * a.sum();
      q = c * c / f.spec.offset + a.dot(kb * a);
    } else {
      const Eigen::MatrixXd k = gram_matrix(f.spec, f.centers);
      q = a.dot(k * a);
    }
  }
  // The quadratic form can go infinitesimally negative on a numerically
  // semidefinite Gram matrix.
  if (q < 0.0) {
    if (q < -1e-10)
      throw std::runtime_error("rkhs_norm: Gram matrix is not PSD");
    q = 0.0;
  }
  return std::sqrt(q);
}

}  // namespace kovi

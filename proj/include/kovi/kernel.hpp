#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "kovi/point.hpp"

namespace kovi {

enum class KernelFamily {
  linear,
  squared_exponential,
  matern_half,        // Matern nu = 1/2
  matern_three_half,  // Matern nu = 3/2
  matern_five_half,   // Matern nu = 5/2
};

inline const char* to_string(KernelFamily f) {
  switch (f) {
    case KernelFamily::linear: return "linear";
    case KernelFamily::squared_exponential: return "squared-exponential";
    case KernelFamily::matern_half: return "matern-1/2";
    case KernelFamily::matern_three_half: return "matern-3/2";
    case KernelFamily::matern_five_half: return "matern-5/2";
  }
  throw std::invalid_argument("unknown kernel family");
}

inline KernelFamily kernel_family_from_string(const std::string& s) {
  if (s == "linear") return KernelFamily::linear;
  if (s == "squared-exponential") return KernelFamily::squared_exponential;
  if (s == "matern-1/2") return KernelFamily::matern_half;
  if (s == "matern-3/2") return KernelFamily::matern_three_half;
  if (s == "matern-5/2") return KernelFamily::matern_five_half;
  throw std::invalid_argument("unknown kernel family '" + s + "'");
}

// k(z, z') = offset + scale * base(z, z').  The radial families use
// base(d) with d = ||z - z'|| / lengthscale; the linear family uses
// <z, z'> / lengthscale^2.  A positive offset puts constant functions
// into the induced RKHS, which the transition generator relies on.
struct KernelSpec {
  KernelFamily family = KernelFamily::squared_exponential;
  double lengthscale = 0.5;
  double scale = 1.0;
  double offset = 0.0;

  void validate() const {
    if (!(lengthscale > 0.0))
      throw std::invalid_argument("kernel lengthscale must be positive");
    if (!(scale > 0.0))
      throw std::invalid_argument("kernel scale must be positive");
    if (offset < 0.0)
      throw std::invalid_argument("kernel offset must be nonnegative");
  }

  KernelSpec without_offset() const {
    KernelSpec s = *this;
    s.offset = 0.0;
    return s;
  }

  friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

// Base part, i.e. eval_kernel minus the constant offset.
inline double eval_kernel_base(const KernelSpec& spec, const Point& z1,
                               const Point& z2) {
  spec.validate();
  switch (spec.family) {
    case KernelFamily::linear:
      return spec.scale * dot(z1, z2) / (spec.lengthscale * spec.lengthscale);
    case KernelFamily::squared_exponential: {
      const double q = squared_distance(z1, z2) /
                       (2.0 * spec.lengthscale * spec.lengthscale);
      return spec.scale * std::exp(-q);
    }
    case KernelFamily::matern_half: {
      const double d = std::sqrt(squared_distance(z1, z2)) / spec.lengthscale;
      return spec.scale * std::exp(-d);
    }
    case KernelFamily::matern_three_half: {
      const double d = std::sqrt(squared_distance(z1, z2)) / spec.lengthscale;
      const double t = std::sqrt(3.0) * d;
      return spec.scale * (1.0 + t) * std::exp(-t);
    }
    case KernelFamily::matern_five_half: {
      const double d = std::sqrt(squared_distance(z1, z2)) / spec.lengthscale;
      const double t = std::sqrt(5.0) * d;
      return spec.scale * (1.0 + t + t * t / 3.0) * std::exp(-t);
    }
  }
  throw std::invalid_argument("unknown kernel family");
}

inline double eval_kernel(const KernelSpec& spec, const Point& z1,
                          const Point& z2) {
  return spec.offset + eval_kernel_base(spec, z1, z2);
}

// Dense Gram matrix K[i][j] = k(z_i, z_j); symmetric by construction.
inline Eigen::MatrixXd gram_matrix(const KernelSpec& spec,
                                   const std::vector<Point>& pts) {
  if (pts.empty()) throw std::invalid_argument("gram_matrix: empty point set");
  const Eigen::Index n = static_cast<Eigen::Index>(pts.size());
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double v = eval_kernel(spec, pts[i], pts[j]);
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

}  // namespace kovi

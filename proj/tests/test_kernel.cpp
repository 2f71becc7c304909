#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <vector>

#include "kovi/kernel.hpp"
#include "kovi/rkhs.hpp"
#include "kovi/rng.hpp"

using namespace kovi;

namespace {

KernelSpec make_spec(KernelFamily f, double l, double s, double o) {
  KernelSpec spec;
  spec.family = f;
  spec.lengthscale = l;
  spec.scale = s;
  spec.offset = o;
  return spec;
}

std::vector<Point> random_points(Rng& rng, std::size_t n, std::size_t d) {
  std::vector<Point> pts(n);
  for (auto& p : pts) {
    p.coords.resize(d);
    for (auto& c : p.coords) c = rng.uniform();
  }
  return pts;
}

const KernelFamily kAllFamilies[] = {
    KernelFamily::linear, KernelFamily::squared_exponential,
    KernelFamily::matern_half, KernelFamily::matern_three_half,
    KernelFamily::matern_five_half};

}  // namespace

TEST_CASE("kernel evaluation matches hand values") {
  // Unit squared-exponential at distance sqrt(2).
  auto se = make_spec(KernelFamily::squared_exponential, 1.0, 1.0, 0.0);
  CHECK(eval_kernel(se, Point{0.0, 0.0}, Point{1.0, 1.0}) ==
        Catch::Approx(0.36787944117144233).epsilon(1e-12));

  // Same distance, lengthscale 2: exp(-2 / (2 * 4)).
  se.lengthscale = 2.0;
  CHECK(eval_kernel(se, Point{0.0, 0.0}, Point{1.0, 1.0}) ==
        Catch::Approx(0.7788007830714049).epsilon(1e-12));

  // Matern-1/2 with offset 0.5 at distance 1.
  auto m12 = make_spec(KernelFamily::matern_half, 1.0, 1.0, 0.5);
  CHECK(eval_kernel(m12, Point{0.0}, Point{1.0}) ==
        Catch::Approx(0.8678794411714423).epsilon(1e-12));

  auto m32 = make_spec(KernelFamily::matern_three_half, 1.0, 1.0, 0.0);
  CHECK(eval_kernel(m32, Point{0.0}, Point{1.0}) ==
        Catch::Approx(0.4833577245965077).epsilon(1e-12));

  auto m52 = make_spec(KernelFamily::matern_five_half, 1.0, 1.0, 0.0);
  CHECK(eval_kernel(m52, Point{0.0}, Point{1.0}) ==
        Catch::Approx(0.5239941088318203).epsilon(1e-12));

  // Linear kernel is offset + <z, z'> / lengthscale^2.
  auto lin = make_spec(KernelFamily::linear, 0.5, 2.0, 0.25);
  CHECK(eval_kernel(lin, Point{1.0, 2.0}, Point{3.0, 0.5}) ==
        Catch::Approx(0.25 + 2.0 * 4.0 / 0.25).epsilon(1e-12));
}

TEST_CASE("kernel diagonal and symmetry") {
  Rng rng(2024);
  for (auto family : kAllFamilies) {
    const auto spec = make_spec(family, 0.7, 1.3, 0.2);
    auto pts = random_points(rng, 16, 3);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      for (std::size_t j = 0; j < pts.size(); ++j) {
        const double kij = eval_kernel(spec, pts[i], pts[j]);
        const double kji = eval_kernel(spec, pts[j], pts[i]);
        CHECK(kij == Catch::Approx(kji).margin(1e-14));
      }
      if (family != KernelFamily::linear) {
        CHECK(eval_kernel(spec, pts[i], pts[i]) ==
              Catch::Approx(spec.offset + spec.scale).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("kernel rejects invalid inputs") {
  auto spec = make_spec(KernelFamily::squared_exponential, 1.0, 1.0, 0.0);
  CHECK_THROWS_AS(eval_kernel(spec, Point{0.0}, Point{0.0, 1.0}),
                  std::invalid_argument);
  spec.lengthscale = 0.0;
  CHECK_THROWS_AS(eval_kernel(spec, Point{0.0}, Point{1.0}),
                  std::invalid_argument);
  spec.lengthscale = 1.0;
  spec.scale = -1.0;
  CHECK_THROWS_AS(eval_kernel(spec, Point{0.0}, Point{1.0}),
                  std::invalid_argument);
  spec.scale = 1.0;
  spec.offset = -0.1;
  CHECK_THROWS_AS(eval_kernel(spec, Point{0.0}, Point{1.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(gram_matrix(make_spec(KernelFamily::linear, 1, 1, 0), {}),
                  std::invalid_argument);
}

TEST_CASE("gram matrices are symmetric PSD for every family") {
  Rng rng(7);
  for (auto family : kAllFamilies) {
    for (int rep = 0; rep < 4; ++rep) {
      const auto spec =
          make_spec(family, 0.3 + rng.uniform(), 0.5 + rng.uniform(),
                    rng.uniform());
      auto pts = random_points(rng, 24, 1 + rep % 3);
      pts.push_back(pts[0]);  // duplicates must stay PSD
      pts.push_back(pts[5]);
      const Eigen::MatrixXd k = gram_matrix(spec, pts);
      CHECK((k - k.transpose()).cwiseAbs().maxCoeff() < 1e-13);
      // Independent oracle: dense symmetric eigensolver.
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(k);
      REQUIRE(eig.info() == Eigen::Success);
      CHECK(eig.eigenvalues().minCoeff() >= -1e-10);
    }
  }
}

TEST_CASE("representer evaluation and reproducing identity") {
  const auto spec = make_spec(KernelFamily::squared_exponential, 0.6, 1.0, 0.0);
  RepresenterFunction f;
  f.spec = spec;
  f.centers = {Point{0.1, 0.2}, Point{0.8, 0.4}, Point{0.5, 0.9}};
  f.weights = {1.5, -0.7, 0.3};

  // Empty combination is the zero function.
  RepresenterFunction zero;
  zero.spec = spec;
  CHECK(rkhs_eval(zero, Point{0.3, 0.3}) == 0.0);
  CHECK(rkhs_norm(zero) == 0.0);

  Rng rng(99);
  for (int rep = 0; rep < 20; ++rep) {
    const Point z{rng.uniform(), rng.uniform()};
    double manual = 0.0;
    for (std::size_t i = 0; i < f.centers.size(); ++i)
      manual += f.weights[i] * eval_kernel(spec, z, f.centers[i]);
    CHECK(rkhs_eval(f, z) == Catch::Approx(manual).margin(1e-14));
  }
}

TEST_CASE("representer norm matches the quadratic-form oracle") {
  Rng rng(31);
  for (auto family : kAllFamilies) {
    const auto spec = make_spec(family, 0.8, 1.1, 0.3);
    RepresenterFunction f;
    f.spec = spec;
    f.centers = random_points(rng, 6, 2);
    for (int i = 0; i < 6; ++i) f.weights.push_back(rng.uniform(-1.0, 1.0));

    const Eigen::MatrixXd k = gram_matrix(spec, f.centers);
    Eigen::Map<const Eigen::VectorXd> a(f.weights.data(), 6);
    const double oracle = std::sqrt(std::max(0.0, a.dot(k * a)));
    CHECK(rkhs_norm(f) == Catch::Approx(oracle).margin(1e-10));
    f.weights.clear();
  }

  // Single unit-diagonal center: norm is |alpha| * sqrt(k(c,c)) = 3.
  RepresenterFunction g;
  g.spec = make_spec(KernelFamily::squared_exponential, 1.0, 1.0, 0.0);
  g.centers = {Point{0.4}};
  g.weights = {3.0};
  CHECK(rkhs_norm(g) == Catch::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("representer norm bounds evaluations (Cauchy-Schwarz)") {
  Rng rng(55);
  for (auto family : kAllFamilies) {
    const auto spec = make_spec(family, 0.5, 1.0, 0.2);
    RepresenterFunction f;
    f.spec = spec;
    f.centers = random_points(rng, 8, 2);
    for (int i = 0; i < 8; ++i) f.weights.push_back(rng.uniform(-1.0, 1.0));
    const double norm = rkhs_norm(f);
    for (int rep = 0; rep < 50; ++rep) {
      const Point z{rng.uniform(), rng.uniform()};
      const double bound = norm * std::sqrt(eval_kernel(spec, z, z));
      CHECK(std::abs(rkhs_eval(f, z)) <= bound + 1e-10);
    }
  }
}

TEST_CASE("representer constant component") {
  const auto spec = make_spec(KernelFamily::squared_exponential, 0.5, 1.0, 0.4);

  // A bare constant has norm |b| / sqrt(offset).
  RepresenterFunction c;
  c.spec = spec;
  c.constant = 0.25;
  CHECK(rkhs_eval(c, Point{0.1, 0.9}) == 0.25);
  CHECK(rkhs_norm(c) == Catch::Approx(0.25 / std::sqrt(0.4)).epsilon(1e-12));

  // Constant components require a kernel offset to live in.
  RepresenterFunction bad = c;
  bad.spec.offset = 0.0;
  CHECK_THROWS_AS(rkhs_norm(bad), std::invalid_argument);

  // With constant == 0 the decomposition formula must agree with the plain
  // quadratic form on the full-kernel Gram matrix.
  Rng rng(13);
  RepresenterFunction f;
  f.spec = spec;
  f.centers = random_points(rng, 5, 2);
  for (int i = 0; i < 5; ++i) f.weights.push_back(rng.uniform(-1.0, 1.0));
  const Eigen::MatrixXd k = gram_matrix(spec, f.centers);
  Eigen::Map<const Eigen::VectorXd> a(f.weights.data(), 5);
  CHECK(rkhs_norm(f) ==
        Catch::Approx(std::sqrt(a.dot(k * a))).margin(1e-10));

  // Baseline-plus-bumps telescoping: choosing the constant as
  // u - offset * sum(w) makes the function exactly u + sum w k_base(., c).
  RepresenterFunction p = f;
  double wsum = 0.0;
  for (double w : p.weights) wsum += w;
  const double u = 0.0625;
  p.constant = u - spec.offset * wsum;
  for (int rep = 0; rep < 25; ++rep) {
    const Point z{rng.uniform(), rng.uniform()};
    double expect = u;
    for (std::size_t i = 0; i < p.centers.size(); ++i)
      expect += p.weights[i] *
                eval_kernel_base(spec, z, p.centers[i]);
    CHECK(rkhs_eval(p, z) == Catch::Approx(expect).margin(1e-12));
  }

  RepresenterFunction mismatched = f;
  mismatched.weights.pop_back();
  CHECK_THROWS_AS(rkhs_eval(mismatched, Point{0.0, 0.0}),
                  std::invalid_argument);
}

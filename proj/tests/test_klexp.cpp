#include <cmath>

#include "doctest.h"
#include "klexp.hpp"
#include "rng.hpp"

using namespace stochbif;

TEST_CASE("scalar expansion with zero variance is deterministic") {
  const auto kl = KLExpansion::scalar(0.9, 0.0, SeedFamily::Gaussian);
  CHECK(kl.mean_value() == 0.9);
  CHECK(kl.sigma() == 0.0);
  CHECK(kl.lambda(0) == 1.0);
  CHECK(kl.lambda(1) == 0.0);
  RandomStream rng(3);
  for (int i = 0; i < 10; ++i) CHECK(kl.draw_scalar(rng) == 0.9);
  CHECK_THROWS(KLExpansion::scalar(0.9, -0.1, SeedFamily::Gaussian));
}

TEST_CASE("scalar gaussian perturbation matches its law") {
  const double sigma = std::sqrt(0.001);
  const auto kl = KLExpansion::scalar(0.9, sigma, SeedFamily::Gaussian);
  CHECK(kl.lambda(1) == doctest::Approx(0.001));
  RandomStream rng(2024);
  const int n = 100000;
  double mean = 0.0, second = 0.0;
  for (int i = 0; i < n; ++i) {
    const double mu = kl.draw_scalar(rng);
    mean += mu;
    second += mu * mu;
  }
  mean /= n;
  const double var = second / n - mean * mean;
  // three standard errors
  CHECK(std::abs(mean - 0.9) < 3.0 * sigma / std::sqrt(static_cast<double>(n)));
  CHECK(std::abs(var - 0.001) < 3.0 * 0.001 * std::sqrt(2.0 / n));
}

TEST_CASE("scalar uniform perturbation has the stated support and moments") {
  // U(0.845, 0.955): half width 0.055, unit-variance seed scaling sigma = 0.055/sqrt(3)
  const double sigma = 0.055 / kUniformHalfWidth;
  const auto kl = KLExpansion::scalar(0.9, sigma, SeedFamily::Uniform);
  RandomStream rng(99);
  double lo = 1e30, hi = -1e30, mean = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double mu = kl.draw_scalar(rng);
    lo = std::min(lo, mu);
    hi = std::max(hi, mu);
    mean += mu;
  }
  mean /= n;
  CHECK(lo >= 0.845);
  CHECK(hi <= 0.955);
  CHECK(hi - lo > 0.1095);  // support width 0.11 nearly filled
  CHECK(std::abs(mean - 0.9) < 3.0 * sigma / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("rank-one kernel has a single mode carrying the domain measure") {
  const int n = 33;
  std::vector<double> grid(n), weights(n, 1.0 / n);  // measure of [0,1]
  for (int i = 0; i < n; ++i) grid[i] = (i + 0.5) / n;
  const auto kl = KLExpansion::nystrom([](double, double) { return 1.0; }, grid, weights, 4,
                                       SeedFamily::Gaussian);
  CHECK(kl.lambda(1) == doctest::Approx(1.0).epsilon(1e-12));  // sum of weights
  for (int i = 2; i <= 4; ++i) CHECK(std::abs(kl.lambda(i)) < 1e-12);
  // constant eigenfunction, normalized under the quadrature weights
  const auto& pi1 = kl.mode(1).eigenfunction;
  for (int i = 1; i < n; ++i) CHECK(pi1[i] == doctest::Approx(pi1[0]).epsilon(1e-10));
  double norm = 0.0;
  for (int i = 0; i < n; ++i) norm += weights[i] * pi1[i] * pi1[i];
  CHECK(norm == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("zero kernel yields no stochastic energy") {
  std::vector<double> grid = {0.0, 0.5, 1.0};
  std::vector<double> weights = {0.25, 0.5, 0.25};
  const auto kl = KLExpansion::nystrom([](double, double) { return 0.0; }, grid, weights, 3,
                                       SeedFamily::Uniform);
  for (int i = 1; i <= 3; ++i) CHECK(std::abs(kl.lambda(i)) < 1e-14);
  CHECK(kl.trace_covariance() == 0.0);
}

TEST_CASE("nystrom eigenpairs match a dense eigensolve of the weighted matrix") {
  const int n = 64;
  std::vector<double> grid(n), weights(n);
  for (int i = 0; i < n; ++i) {
    grid[i] = static_cast<double>(i) / (n - 1);
    weights[i] = (i == 0 || i == n - 1) ? 0.5 / (n - 1) : 1.0 / (n - 1);  // trapezoid
  }
  const auto kernel = [](double x, double y) { return std::exp(-std::abs(x - y)); };
  const auto kl = KLExpansion::nystrom(kernel, grid, weights, 6, SeedFamily::Gaussian);

  // Independent oracle: dense eigensolve of W^(1/2) K W^(1/2).
  Eigen::MatrixXd b(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      b(i, j) = std::sqrt(weights[i]) * kernel(grid[i], grid[j]) * std::sqrt(weights[j]);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(b);
  for (int k = 0; k < 6; ++k) {
    CHECK(kl.lambda(k + 1) == doctest::Approx(eig.eigenvalues()[n - 1 - k]).epsilon(1e-8));
  }

  // Eigenvalues are non-increasing and non-negative.
  for (int k = 1; k < 6; ++k) CHECK(kl.lambda(k) >= kl.lambda(k + 1));
  CHECK(kl.lambda(6) >= 0.0);

  // Orthonormality under the grid quadrature weight.
  for (int a = 1; a <= 6; ++a)
    for (int b2 = 1; b2 <= 6; ++b2) {
      double inner = 0.0;
      for (int i = 0; i < n; ++i)
        inner += weights[i] * kl.mode(a).eigenfunction[i] * kl.mode(b2).eigenfunction[i];
      CHECK(std::abs(inner - (a == b2 ? 1.0 : 0.0)) < 1e-8);
    }

  // Energy consistency: retained eigenvalues never exceed the covariance trace.
  double total = 0.0;
  for (int k = 1; k <= 6; ++k) total += kl.lambda(k);
  CHECK(total <= kl.trace_covariance() + 1e-8);

  // Full-rank truncation recovers the whole trace.
  const auto full = KLExpansion::nystrom(kernel, grid, weights, n, SeedFamily::Gaussian);
  double all = 0.0;
  for (int k = 1; k <= n; ++k) all += full.lambda(k);
  CHECK(all == doctest::Approx(full.trace_covariance()).epsilon(1e-8));
}

TEST_CASE("asymmetric kernels are rejected") {
  std::vector<double> grid = {0.0, 1.0};
  std::vector<double> weights = {0.5, 0.5};
  CHECK_THROWS(KLExpansion::nystrom([](double x, double y) { return x - y; }, grid, weights, 1,
                                    SeedFamily::Gaussian));
  CHECK_THROWS(KLExpansion::nystrom([](double, double) { return 1.0; }, grid, {0.5, -0.5}, 1,
                                    SeedFamily::Gaussian));
}

#include <cmath>

#include "doctest.h"
#include "klexp.hpp"
#include "pcbasis.hpp"
#include "rng.hpp"

using namespace stochbif;

namespace {

double factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

// Exact moments of the basic variables: E[x^k].
double gaussian_moment(int k) {
  if (k % 2 == 1) return 0.0;
  double m = 1.0;
  for (int j = k - 1; j > 1; j -= 2) m *= j;
  return m;
}

double uniform_moment(int k) {
  if (k % 2 == 1) return 0.0;
  return std::pow(3.0, k / 2) / (k + 1.0);
}

double quad_integral(const GaussRule& rule, const std::vector<double>& mono) {
  double acc = 0.0;
  for (int q = 0; q < rule.nodes.size(); ++q) {
    double p = 0.0;
    for (size_t k = mono.size(); k-- > 0;) p = p * rule.nodes[q] + mono[k];
    acc += rule.weights[q] * p;
  }
  return acc;
}

}  // namespace

TEST_CASE("basis size follows the truncation formula") {
  struct Case {
    int m, n_rv, expected;
  };
  // (M + N_RV)! / (M! N_RV!)
  for (auto [m, n_rv, expected] : {Case{5, 1, 6}, Case{0, 1, 1}, Case{3, 2, 10}, Case{2, 3, 10}}) {
    PCBasis basis(PCFamily::HermiteGaussian, m, n_rv);
    CHECK(basis.size() == expected);
    CHECK(basis.n_pc() + 1 == expected);
  }
}

TEST_CASE("norms are positive with unit leading entry") {
  for (auto family : {PCFamily::HermiteGaussian, PCFamily::LegendreUniform}) {
    PCBasis basis(family, 6);
    CHECK(basis.norm_sq(0) == 1.0);
    for (int i = 0; i <= basis.n_pc(); ++i) CHECK(basis.norm_sq(i) > 0.0);
  }
  PCBasis legendre(PCFamily::LegendreUniform, 4);
  for (int n = 0; n <= 4; ++n) CHECK(legendre.norm_sq(n) == doctest::Approx(1.0 / (2 * n + 1)));
}

TEST_CASE("pointwise evaluations") {
  PCBasis hermite(PCFamily::HermiteGaussian, 5);
  CHECK(hermite.eval(0, 0.37) == 1.0);
  CHECK(hermite.eval(0, -2.0) == 1.0);
  // He_2(x) = x^2 - 1 normalized by 1/sqrt(2) vanishes at x = 1.
  CHECK(hermite.eval(2, 1.0) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(hermite.eval(2, 0.0) == doctest::Approx(-1.0 / std::sqrt(2.0)));

  PCBasis legendre(PCFamily::LegendreUniform, 5);
  CHECK(legendre.eval(1, kUniformHalfWidth) == doctest::Approx(1.0));
  CHECK(legendre.eval(3, kUniformHalfWidth) == doctest::Approx(1.0));

  CHECK_THROWS(hermite.eval(6, 0.0));
  CHECK_THROWS(hermite.eval(-1, 0.0));
  Eigen::VectorXd bad(2);
  bad << 0.0, 0.0;
  CHECK_THROWS(hermite.eval(1, bad));
}

TEST_CASE("monomial conversion matches recurrence evaluation") {
  for (auto family : {PCFamily::HermiteGaussian, PCFamily::LegendreUniform}) {
    PCBasis basis(family, 6);
    for (int deg = 0; deg <= 6; ++deg) {
      const auto mono = basis.monomial_coeffs_1d(deg);
      for (double x : {-1.7, -0.3, 0.0, 0.9, 2.4}) {
        double value = 0.0;
        for (size_t k = mono.size(); k-- > 0;) value = value * x + mono[k];
        CHECK(value == doctest::Approx(basis.eval_1d(deg, x)).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("single-point rule is the mean and weights always sum to one") {
  for (auto family : {PCFamily::HermiteGaussian, PCFamily::LegendreUniform}) {
    const auto rule1 = gauss_quadrature(family, 1);
    CHECK(rule1.nodes[0] == 0.0);
    CHECK(rule1.weights[0] == 1.0);
    for (int n : {2, 3, 5, 9, 16}) {
      const auto rule = gauss_quadrature(family, n);
      CHECK(rule.weights.sum() == doctest::Approx(1.0).epsilon(1e-13));
    }
  }
  CHECK_THROWS(gauss_quadrature(PCFamily::HermiteGaussian, 0));
}

TEST_CASE("both basic variables have unit variance under a 5-point rule") {
  for (auto family : {PCFamily::HermiteGaussian, PCFamily::LegendreUniform}) {
    const auto rule = gauss_quadrature(family, 5);
    double second = 0.0;
    for (int q = 0; q < 5; ++q) second += rule.weights[q] * rule.nodes[q] * rule.nodes[q];
    CHECK(second == doctest::Approx(1.0).epsilon(1e-13));
  }
}

TEST_CASE("quadrature is exact for random polynomials of degree 2n-1") {
  RandomStream rng(7);
  for (auto family : {PCFamily::HermiteGaussian, PCFamily::LegendreUniform}) {
    for (int n : {2, 4, 7}) {
      const auto rule = gauss_quadrature(family, n);
      for (int rep = 0; rep < 20; ++rep) {
        std::vector<double> mono(2 * n);  // degree 2n - 1
        for (double& c : mono) c = rng.uniform(-1.0, 1.0);
        double exact = 0.0;
        for (size_t k = 0; k < mono.size(); ++k) {
          exact += mono[k] * (family == PCFamily::HermiteGaussian
                                  ? gaussian_moment(static_cast<int>(k))
                                  : uniform_moment(static_cast<int>(k)));
        }
        CHECK(quad_integral(rule, mono) == doctest::Approx(exact).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("orthogonality, stored norms, and the mean identity") {
  for (auto family : {PCFamily::HermiteGaussian, PCFamily::LegendreUniform}) {
    PCBasis basis(family, 6);
    const auto rule = gauss_quadrature(family, 8);  // exact through degree 15
    for (int i = 0; i <= basis.n_pc(); ++i) {
      double mean = 0.0;
      for (int q = 0; q < rule.nodes.size(); ++q) mean += rule.weights[q] * basis.eval(i, rule.nodes[q]);
      CHECK(std::abs(mean - (i == 0 ? 1.0 : 0.0)) < 1e-12);
      for (int j = 0; j <= basis.n_pc(); ++j) {
        double inner = 0.0;
        for (int q = 0; q < rule.nodes.size(); ++q)
          inner += rule.weights[q] * basis.eval(i, rule.nodes[q]) * basis.eval(j, rule.nodes[q]);
        if (i == j) {
          CHECK(std::abs(inner - basis.norm_sq(i)) < 1e-12);
        } else {
          CHECK(std::abs(inner) < 1e-12);
        }
      }
    }
  }
}

TEST_CASE("moment tensors: structure and reference values") {
  const auto kl = KLExpansion::scalar(0.9, 1.0, SeedFamily::Gaussian);
  PCBasis basis(PCFamily::HermiteGaussian, 5);
  const auto tensors = build_moment_tensors(basis, kl);
  const int size = basis.size();

  // c2 is diagonal and carries the norms.
  for (int j = 0; j < size; ++j)
    for (int m = 0; m < size; ++m) {
      const double expected = j == m ? basis.norm_sq(j) : 0.0;
      CHECK(std::abs(tensors.c2(j, m) - expected) < 1e-12);
    }

  // Mean slot reproduces c2 exactly.
  CHECK((tensors.e3[0] - tensors.c2).cwiseAbs().maxCoeff() == 0.0);

  // f3[0] equals c2 since psi_0 = 1.
  CHECK((tensors.f3[0] - tensors.c2).cwiseAbs().maxCoeff() < 1e-12);

  // Normalized Hermite triple product: E[psi_1 psi_1 psi_2] = sqrt(2).
  CHECK(tensors.f3[2](1, 1) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-13));
  // E[xi psi_0 psi_1] = 1 with sigma = 1 (xi equals psi_1).
  CHECK(tensors.e3[1](0, 1) == doctest::Approx(1.0).epsilon(1e-13));

  // Symmetries.
  for (int i = 0; i < static_cast<int>(tensors.e3.size()); ++i)
    CHECK((tensors.e3[i] - tensors.e3[i].transpose()).cwiseAbs().maxCoeff() < 1e-12);
  for (int m = 0; m < size; ++m)
    for (int l = 0; l < size; ++l)
      for (int i = 0; i < size; ++i) {
        CHECK(tensors.f3[m](l, i) == doctest::Approx(tensors.f3[m](i, l)).epsilon(1e-12));
        CHECK(std::abs(tensors.f3[m](l, i) - tensors.f3[l](m, i)) < 1e-12);
        CHECK(std::abs(tensors.f3[m](l, i) - tensors.f3[i](l, m)) < 1e-12);
      }

  // Gaussian symmetry: products of odd total degree vanish.
  for (int m = 0; m < size; ++m)
    for (int l = 0; l < size; ++l)
      for (int i = 0; i < size; ++i)
        if ((m + l + i) % 2 == 1) CHECK(std::abs(tensors.f3[m](l, i)) < 1e-12);

  // Closed-form check across all Hermite triples:
  // E[psi_i psi_j psi_k] = sqrt(i! j! k!) / ((s-i)! (s-j)! (s-k)!) for even
  // total degree 2s with s >= max(i, j, k).
  for (int m = 0; m < size; ++m)
    for (int l = 0; l < size; ++l)
      for (int i = 0; i < size; ++i) {
        const int total = m + l + i;
        double expected = 0.0;
        if (total % 2 == 0) {
          const int s = total / 2;
          if (s >= m && s >= l && s >= i) {
            expected = std::sqrt(factorial(i) * factorial(l) * factorial(m)) /
                       (factorial(s - i) * factorial(s - l) * factorial(s - m));
          }
        }
        CHECK(tensors.f3[m](l, i) == doctest::Approx(expected).epsilon(1e-11));
      }

  // Seed-count mismatch is rejected.
  PCBasis twovar(PCFamily::HermiteGaussian, 2, 2);
  CHECK_THROWS(build_moment_tensors(twovar, kl));
}

TEST_CASE("legendre moment tensors satisfy the same structure") {
  const auto kl = KLExpansion::scalar(0.9, 0.0318, SeedFamily::Uniform);
  PCBasis basis(PCFamily::LegendreUniform, 6);
  const auto tensors = build_moment_tensors(basis, kl);
  for (int j = 0; j < basis.size(); ++j) {
    CHECK(tensors.c2(j, j) == doctest::Approx(basis.norm_sq(j)).epsilon(1e-13));
    for (int m = 0; m < j; ++m) CHECK(std::abs(tensors.c2(j, m)) < 1e-12);
  }
  CHECK((tensors.f3[0] - tensors.c2).cwiseAbs().maxCoeff() < 1e-12);
  // E[xi psi_j psi_m] couples adjacent degrees only.
  for (int j = 0; j < basis.size(); ++j)
    for (int m = 0; m < basis.size(); ++m)
      if (std::abs(j - m) != 1) CHECK(std::abs(tensors.e3[1](j, m)) < 1e-12);
}

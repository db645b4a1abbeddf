#include "pcbasis.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "klexp.hpp"

namespace stochbif {

std::string to_string(PCFamily family) {
  return family == PCFamily::HermiteGaussian ? "hermite-gaussian" : "legendre-uniform";
}

namespace {

// Golub-Welsch on the symmetric Jacobi matrix of the (probability-normalized)
// recurrence. Both families have zero recurrence diagonal.
GaussRule golub_welsch(PCFamily family, int n) {
  GaussRule rule;
  if (n == 1) {
    rule.nodes = Eigen::VectorXd::Zero(1);
    rule.weights = Eigen::VectorXd::Ones(1);
    return rule;
  }
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    double beta;
    if (family == PCFamily::HermiteGaussian) {
      beta = std::sqrt(static_cast<double>(k));
    } else {
      beta = k / std::sqrt(4.0 * k * k - 1.0);
    }
    jacobi(k, k - 1) = beta;
    jacobi(k - 1, k) = beta;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
  rule.nodes = eig.eigenvalues();
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    const double first = eig.eigenvectors()(0, i);
    rule.weights[i] = first * first;
  }
  if (family == PCFamily::LegendreUniform) rule.nodes *= kUniformHalfWidth;
  // Symmetrize against eigensolver roundoff: both measures are even.
  for (int i = 0; i < n / 2; ++i) {
    const int j = n - 1 - i;
    const double mag = 0.5 * (std::abs(rule.nodes[i]) + std::abs(rule.nodes[j]));
    rule.nodes[i] = -mag;
    rule.nodes[j] = mag;
    const double w = 0.5 * (rule.weights[i] + rule.weights[j]);
    rule.weights[i] = w;
    rule.weights[j] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

std::vector<std::vector<int>> graded_lex_indices(int max_degree, int n_rv) {
  std::vector<std::vector<int>> result;
  std::vector<int> current(n_rv, 0);
  for (int degree = 0; degree <= max_degree; ++degree) {
    // Enumerate all multi-indices of total degree `degree` lexicographically.
    std::fill(current.begin(), current.end(), 0);
    current[n_rv - 1] = degree;
    while (true) {
      std::vector<int> rev(current.rbegin(), current.rend());
      result.push_back(rev);
      // next composition of `degree` into n_rv parts
      int k = n_rv - 1;
      while (k > 0 && current[k] == 0) --k;
      if (k == 0) break;
      const int value = current[k];
      current[k] = 0;
      current[k - 1] += 1;
      current[n_rv - 1] = value - 1;
    }
  }
  return result;
}

}  // namespace

GaussRule gauss_quadrature(PCFamily family, int n_points) {
  if (n_points < 1) throw std::invalid_argument("gauss_quadrature: n_points must be >= 1");
  return golub_welsch(family, n_points);
}

PCBasis::PCBasis(PCFamily family, int max_degree, int n_rv)
    : family_(family), max_degree_(max_degree), n_rv_(n_rv) {
  if (max_degree < 0) throw std::invalid_argument("PCBasis: max_degree must be >= 0");
  if (n_rv < 1) throw std::invalid_argument("PCBasis: n_rv must be >= 1");
  index_set_ = graded_lex_indices(max_degree, n_rv);
  norms_.reserve(index_set_.size());
  for (const auto& alpha : index_set_) {
    double norm = 1.0;
    for (int d : alpha) {
      if (family_ == PCFamily::LegendreUniform) norm *= 1.0 / (2.0 * d + 1.0);
      // Hermite is normalized to unit norm per factor.
      (void)d;
    }
    norms_.push_back(norm);
  }
}

double PCBasis::eval_1d(int degree, double x) const {
  if (family_ == PCFamily::HermiteGaussian) {
    // He_n recurrence, then normalize by sqrt(n!).
    double prev = 1.0;
    if (degree == 0) return 1.0;
    double curr = x;
    double factorial = 1.0;
    for (int n = 1; n < degree; ++n) {
      const double next = x * curr - n * prev;
      prev = curr;
      curr = next;
      factorial *= (n + 1);
    }
    return curr / std::sqrt(factorial);
  }
  const double t = x / kUniformHalfWidth;
  double prev = 1.0;
  if (degree == 0) return 1.0;
  double curr = t;
  for (int n = 1; n < degree; ++n) {
    const double next = ((2.0 * n + 1.0) * t * curr - n * prev) / (n + 1.0);
    prev = curr;
    curr = next;
  }
  return curr;
}

double PCBasis::eval(int index, const Eigen::VectorXd& xi) const {
  if (index < 0 || index > n_pc()) throw std::out_of_range("PCBasis::eval: index out of range");
  if (xi.size() != n_rv_) throw std::invalid_argument("PCBasis::eval: seed dimension mismatch");
  const auto& alpha = index_set_[index];
  double value = 1.0;
  for (int d = 0; d < n_rv_; ++d) value *= eval_1d(alpha[d], xi[d]);
  return value;
}

double PCBasis::eval(int index, double xi) const {
  Eigen::VectorXd v(1);
  v[0] = xi;
  return eval(index, v);
}

std::vector<double> PCBasis::monomial_coeffs_1d(int degree) const {
  // Recurrence on coefficient arrays; degrees used here are small.
  std::vector<std::vector<double>> polys;
  polys.push_back({1.0});
  if (degree >= 1) {
    if (family_ == PCFamily::HermiteGaussian) {
      polys.push_back({0.0, 1.0});
    } else {
      polys.push_back({0.0, 1.0 / kUniformHalfWidth});
    }
  }
  for (int n = 1; n < degree; ++n) {
    const auto& pn = polys[n];
    const auto& pm = polys[n - 1];
    std::vector<double> next(n + 2, 0.0);
    if (family_ == PCFamily::HermiteGaussian) {
      // He_{n+1} = x He_n - n He_{n-1}
      for (size_t k = 0; k < pn.size(); ++k) next[k + 1] += pn[k];
      for (size_t k = 0; k < pm.size(); ++k) next[k] -= n * pm[k];
    } else {
      // P_{n+1}(t) with t = x/sqrt(3)
      const double a = (2.0 * n + 1.0) / ((n + 1.0) * kUniformHalfWidth);
      const double b = n / (n + 1.0);
      for (size_t k = 0; k < pn.size(); ++k) next[k + 1] += a * pn[k];
      for (size_t k = 0; k < pm.size(); ++k) next[k] -= b * pm[k];
    }
    polys.push_back(std::move(next));
  }
  auto coeffs = polys[degree];
  if (family_ == PCFamily::HermiteGaussian) {
    double factorial = 1.0;
    for (int n = 2; n <= degree; ++n) factorial *= n;
    const double scale = 1.0 / std::sqrt(factorial);
    for (double& c : coeffs) c *= scale;
  }
  return coeffs;
}

MomentTensors build_moment_tensors(const PCBasis& basis, const KLExpansion& kl) {
  if (kl.n_rv() != basis.n_rv()) {
    throw std::invalid_argument("build_moment_tensors: basis and KL expansion disagree on seed count");
  }
  const int size = basis.size();
  const int n_kl = kl.n_modes();
  const int m_deg = basis.max_degree();
  const int n_q = (3 * m_deg + 2 + 1) / 2 + 1;
  const GaussRule rule = gauss_quadrature(basis.family(), n_q);
  const int n_rv = basis.n_rv();

  // Tensor-product quadrature over the seed vector.
  std::vector<Eigen::VectorXd> points;
  std::vector<double> weights;
  {
    std::vector<int> idx(n_rv, 0);
    while (true) {
      Eigen::VectorXd pt(n_rv);
      double w = 1.0;
      for (int d = 0; d < n_rv; ++d) {
        pt[d] = rule.nodes[idx[d]];
        w *= rule.weights[idx[d]];
      }
      points.push_back(pt);
      weights.push_back(w);
      int d = 0;
      while (d < n_rv && ++idx[d] == n_q) idx[d++] = 0;
      if (d == n_rv) break;
    }
  }

  const int n_pts = static_cast<int>(points.size());
  Eigen::MatrixXd psi(n_pts, size);
  for (int q = 0; q < n_pts; ++q)
    for (int j = 0; j < size; ++j) psi(q, j) = basis.eval(j, points[q]);

  MomentTensors tensors;
  tensors.c2.setZero(size, size);
  for (int q = 0; q < n_pts; ++q)
    tensors.c2 += weights[q] * psi.row(q).transpose() * psi.row(q);

  tensors.e3.assign(n_kl + 1, Eigen::MatrixXd::Zero(size, size));
  tensors.e3[0] = tensors.c2;  // xibar_0 = 1, lambda_0 = 1
  for (int i = 1; i <= n_kl; ++i) {
    const double sqrt_lambda = std::sqrt(kl.lambda(i));
    for (int q = 0; q < n_pts; ++q) {
      const double factor = weights[q] * sqrt_lambda * points[q][i - 1];
      tensors.e3[i] += factor * psi.row(q).transpose() * psi.row(q);
    }
  }

  tensors.f3.assign(size, Eigen::MatrixXd::Zero(size, size));
  for (int q = 0; q < n_pts; ++q) {
    for (int m = 0; m < size; ++m) {
      const double wm = weights[q] * psi(q, m);
      tensors.f3[m] += wm * psi.row(q).transpose() * psi.row(q);
    }
  }
  return tensors;
}

}  // namespace stochbif

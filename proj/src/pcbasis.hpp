#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

namespace stochbif {

class KLExpansion;

// Polynomial family, keyed by the law of the basic random variable.
enum class PCFamily { HermiteGaussian, LegendreUniform };

// Half-width of the zero-mean, unit-variance uniform seed support.
inline constexpr double kUniformHalfWidth = 1.7320508075688772935;  // sqrt(3)

std::string to_string(PCFamily family);

// Nodes and weights of a Gauss rule rescaled to the probability measure of
// the basic variable: standard Gaussian for Hermite, U(-sqrt(3), sqrt(3))
// for Legendre. Weights sum to one; the rule is exact for polynomial
// integrands up to degree 2*n - 1.
struct GaussRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};

GaussRule gauss_quadrature(PCFamily family, int n_points);

// Orthogonal polynomial basis spanning all multivariate polynomials of total
// degree <= M in n_rv independent seeds.
//
// The Hermite family uses probabilists' polynomials He_n scaled by
// 1/sqrt(n!), so E[psi_n^2] = 1 under the standard Gaussian. The Legendre
// family uses P_n(x/sqrt(3)) on [-sqrt(3), sqrt(3)], so the seed has zero
// mean and unit variance and E[psi_n^2] = 1/(2n+1). Multivariate functions
// are seed-wise products, enumerated in graded lexicographic order.
class PCBasis {
public:
  PCBasis(PCFamily family, int max_degree, int n_rv = 1);

  PCFamily family() const { return family_; }
  int max_degree() const { return max_degree_; }
  int n_rv() const { return n_rv_; }
  int n_pc() const { return static_cast<int>(index_set_.size()) - 1; }
  int size() const { return static_cast<int>(index_set_.size()); }

  const std::vector<double>& norms() const { return norms_; }
  double norm_sq(int index) const { return norms_.at(index); }
  const std::vector<int>& multi_index(int index) const { return index_set_.at(index); }

  // psi_index evaluated at a seed vector of length n_rv.
  double eval(int index, const Eigen::VectorXd& xi) const;
  // Single-seed convenience overload.
  double eval(int index, double xi) const;

  // Family polynomial of one variable, degree-indexed.
  double eval_1d(int degree, double x) const;

  // Monomial coefficients (ascending powers) of the degree-d 1D basis
  // polynomial; used for root-finding on expansion polynomials.
  std::vector<double> monomial_coeffs_1d(int degree) const;

private:
  PCFamily family_;
  int max_degree_;
  int n_rv_;
  std::vector<std::vector<int>> index_set_;
  std::vector<double> norms_;
};

// Expectations of basis-polynomial products against the seed measure.
//   c2(j,m)    = E[psi_j psi_m]                      (diagonal, the norms)
//   e3[i](j,m) = E[xibar_i sqrt(lambda_i) psi_j psi_m]
//   f3[m](l,i) = E[psi_i psi_l psi_m]
// Slot 0 of e3 is the mean slot (xibar_0 = 1, lambda_0 = 1); spatial factors
// of the expansion (mean field and eigenfunctions) are applied by the
// consumer, not folded in here.
struct MomentTensors {
  Eigen::MatrixXd c2;
  std::vector<Eigen::MatrixXd> e3;
  std::vector<Eigen::MatrixXd> f3;
};

// All entries are computed with a Gauss rule of ceil((3M+2)/2) + 1 points,
// exact for every product degree that occurs.
MomentTensors build_moment_tensors(const PCBasis& basis, const KLExpansion& kl);

}  // namespace stochbif

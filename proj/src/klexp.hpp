#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "pcbasis.hpp"
#include "rng.hpp"

namespace stochbif {

// Law of the normalized seeds: standard Gaussian or U(-sqrt(3), sqrt(3)),
// both zero mean and unit variance so eigenvalue semantics do not depend on
// the family.
enum class SeedFamily { Gaussian, Uniform };

PCFamily pc_family_for(SeedFamily family);
std::string to_string(SeedFamily family);

// Truncated Karhunen-Loeve representation of a stochastic parameter,
//   alpha(x, w) = sum_i xibar_i(w) pi_i(x) sqrt(lambda_i),
// with the convention slot i = 0 carrying the mean: lambda_0 = 1,
// pi_0 = mean field, xibar_0 = 1. Stochastic modes are sorted by
// non-increasing eigenvalue and their discrete eigenfunctions are
// orthonormal under the grid quadrature weights.
class KLExpansion {
public:
  struct Mode {
    double lambda = 0.0;
    Eigen::VectorXd eigenfunction;  // values on the grid
  };

  // Scalar parameter mu = mu_bar + sigma * xibar: one mode with
  // lambda_1 = sigma^2 and a constant unit eigenfunction.
  static KLExpansion scalar(double mu_bar, double sigma, SeedFamily family);

  // Nystrom discretization of the covariance eigenproblem on a 1D grid with
  // positive quadrature weights; keeps the n_modes largest eigenpairs.
  static KLExpansion nystrom(const std::function<double(double, double)>& cov_kernel,
                             const std::vector<double>& grid,
                             const std::vector<double>& weights, int n_modes,
                             SeedFamily family);

  SeedFamily seed_family() const { return family_; }
  int n_modes() const { return static_cast<int>(modes_.size()); }
  int n_rv() const { return std::max(1, n_modes()); }
  bool clipped_negative_eigenvalue() const { return clipped_; }

  // lambda_i with the convention lambda_0 = 1.
  double lambda(int i) const;
  const Mode& mode(int i) const { return modes_.at(i - 1); }
  const Eigen::VectorXd& mean_field() const { return mean_field_; }
  const std::vector<double>& grid() const { return grid_; }

  // Scalar-parameter accessors (grid of one point).
  bool is_scalar() const { return mean_field_.size() == 1; }
  double mean_value() const { return mean_field_[0]; }
  double sigma() const;

  // Realization of the scalar parameter for a seed value.
  double realize_scalar(double xi) const;
  // Draw a seed from the family law.
  double draw_seed(RandomStream& rng) const;
  // Draw a realization of the scalar parameter.
  double draw_scalar(RandomStream& rng) const;

  // Quadrature version of the total variance int_D K(x,x) dx.
  double trace_covariance() const { return trace_cov_; }

private:
  SeedFamily family_ = SeedFamily::Gaussian;
  Eigen::VectorXd mean_field_;
  std::vector<double> grid_;
  std::vector<Mode> modes_;
  double trace_cov_ = 0.0;
  bool clipped_ = false;
};

}  // namespace stochbif

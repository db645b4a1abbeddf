#include "klexp.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace stochbif {

PCFamily pc_family_for(SeedFamily family) {
  return family == SeedFamily::Gaussian ? PCFamily::HermiteGaussian : PCFamily::LegendreUniform;
}

std::string to_string(SeedFamily family) {
  return family == SeedFamily::Gaussian ? "gaussian" : "uniform";
}

KLExpansion KLExpansion::scalar(double mu_bar, double sigma, SeedFamily family) {
  if (sigma < 0.0) throw std::invalid_argument("KLExpansion::scalar: sigma must be >= 0");
  KLExpansion kl;
  kl.family_ = family;
  kl.mean_field_ = Eigen::VectorXd::Constant(1, mu_bar);
  kl.grid_ = {0.0};
  Mode mode;
  mode.lambda = sigma * sigma;
  mode.eigenfunction = Eigen::VectorXd::Ones(1);
  kl.modes_.push_back(std::move(mode));
  kl.trace_cov_ = sigma * sigma;
  return kl;
}

KLExpansion KLExpansion::nystrom(const std::function<double(double, double)>& cov_kernel,
                                 const std::vector<double>& grid,
                                 const std::vector<double>& weights, int n_modes,
                                 SeedFamily family) {
  const int n = static_cast<int>(grid.size());
  if (n == 0 || weights.size() != grid.size())
    throw std::invalid_argument("KLExpansion::nystrom: grid/weight size mismatch");
  for (double w : weights)
    if (w <= 0.0) throw std::invalid_argument("KLExpansion::nystrom: weights must be positive");
  if (n_modes < 0 || n_modes > n)
    throw std::invalid_argument("KLExpansion::nystrom: invalid mode count");

  Eigen::MatrixXd kmat(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) kmat(i, j) = cov_kernel(grid[i], grid[j]);
  const double asym = (kmat - kmat.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10) throw std::invalid_argument("KLExpansion::nystrom: kernel matrix is not symmetric");
  kmat = 0.5 * (kmat + kmat.transpose());

  // Symmetrized weighted eigenproblem: B = W^{1/2} K W^{1/2}.
  Eigen::VectorXd sqrt_w(n);
  for (int i = 0; i < n; ++i) sqrt_w[i] = std::sqrt(weights[i]);
  const Eigen::MatrixXd b = sqrt_w.asDiagonal() * kmat * sqrt_w.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(b);

  KLExpansion kl;
  kl.family_ = family;
  kl.grid_ = grid;
  kl.mean_field_ = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) kl.trace_cov_ += weights[i] * kmat(i, i);

  // Eigen returns ascending order; keep the n_modes largest.
  for (int k = 0; k < n_modes; ++k) {
    const int col = n - 1 - k;
    double lambda = eig.eigenvalues()[col];
    if (lambda < -1e-10)
      throw std::invalid_argument("KLExpansion::nystrom: kernel matrix is not positive semi-definite");
    if (lambda < 0.0) {
      lambda = 0.0;
      kl.clipped_ = true;
    }
    Mode mode;
    mode.lambda = lambda;
    mode.eigenfunction = eig.eigenvectors().col(col).cwiseQuotient(sqrt_w);
    kl.modes_.push_back(std::move(mode));
  }
  return kl;
}

double KLExpansion::lambda(int i) const {
  if (i == 0) return 1.0;
  return modes_.at(i - 1).lambda;
}

double KLExpansion::sigma() const {
  if (!is_scalar()) throw std::logic_error("KLExpansion::sigma: not a scalar expansion");
  return modes_.empty() ? 0.0 : std::sqrt(modes_[0].lambda);
}

double KLExpansion::realize_scalar(double xi) const {
  return mean_value() + sigma() * xi;
}

double KLExpansion::draw_seed(RandomStream& rng) const {
  if (family_ == SeedFamily::Gaussian) return rng.normal();
  return rng.uniform(-kUniformHalfWidth, kUniformHalfWidth);
}

double KLExpansion::draw_scalar(RandomStream& rng) const {
  return realize_scalar(draw_seed(rng));
}

}  // namespace stochbif

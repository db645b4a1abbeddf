#include "pitchfork.hpp"

#include <cmath>
#include <stdexcept>

#include "rng.hpp"

namespace stochbif {

PitchforkGalerkin::PitchforkGalerkin(const PCBasis& basis, const KLExpansion& mu)
    : basis_(&basis) {
  if (basis.n_rv() != 1 || !mu.is_scalar())
    throw std::invalid_argument("PitchforkGalerkin: scalar parameter and one seed required");
  const int n_q = 2 * basis.max_degree() + 2;  // exact through degree 4M + 3
  const GaussRule rule = gauss_quadrature(basis.family(), n_q);
  weights_ = rule.weights;
  mu_.resize(n_q);
  psi_.resize(n_q, basis.size());
  for (int q = 0; q < n_q; ++q) {
    mu_[q] = mu.realize_scalar(rule.nodes[q]);
    for (int i = 0; i < basis.size(); ++i) psi_(q, i) = basis.eval(i, rule.nodes[q]);
  }
}

Eigen::VectorXd PitchforkGalerkin::residual(const Eigen::VectorXd& coeffs) const {
  if (coeffs.size() != psi_.cols())
    throw std::invalid_argument("PitchforkGalerkin::residual: coefficient size mismatch");
  const Eigen::VectorXd u = psi_ * coeffs;
  const Eigen::VectorXd f =
      weights_.array() * (u.array().cube() - mu_.array() * u.array());
  return psi_.transpose() * f;
}

Eigen::MatrixXd PitchforkGalerkin::jacobian(const Eigen::VectorXd& coeffs) const {
  const Eigen::VectorXd u = psi_ * coeffs;
  const Eigen::VectorXd g = weights_.array() * (3.0 * u.array().square() - mu_.array());
  return psi_.transpose() * g.asDiagonal() * psi_;
}

PitchforkPCSolution PitchforkGalerkin::newton(const Eigen::VectorXd& initial, double tol,
                                              int max_iter) const {
  if (tol <= 0.0) throw std::invalid_argument("PitchforkGalerkin::newton: tol must be positive");
  PitchforkPCSolution sol;
  sol.coeffs = initial;
  for (int it = 0; it <= max_iter; ++it) {
    const Eigen::VectorXd r = residual(sol.coeffs);
    sol.residual_norm = r.lpNorm<Eigen::Infinity>();
    sol.iterations = it;
    if (sol.residual_norm < tol) {
      sol.converged = true;
      return sol;
    }
    if (it == max_iter) break;
    const Eigen::MatrixXd jac = jacobian(sol.coeffs);
    // Natural scale of 3u^2 - mu; a jacobian far below it is singular to
    // working precision even when its pivot ratios look fine.
    const double u_norm = sol.coeffs.lpNorm<Eigen::Infinity>();
    const double scale = std::max({1.0, mu_.lpNorm<Eigen::Infinity>(), 3.0 * u_norm * u_norm});
    Eigen::FullPivLU<Eigen::MatrixXd> lu(jac);
    if (!lu.isInvertible() || jac.cwiseAbs().maxCoeff() < 1e-12 * scale) {
      sol.singular_jacobian = true;
      return sol;
    }
    sol.coeffs -= lu.solve(r);
  }
  return sol;
}

std::vector<Eigen::VectorXd> random_initializations(int count, double amplitude,
                                                    std::uint64_t rng_seed, int dim) {
  if (count < 1) throw std::invalid_argument("random_initializations: count must be >= 1");
  RandomStream rng(rng_seed);
  std::vector<Eigen::VectorXd> inits;
  inits.reserve(count);
  for (int c = 0; c < count; ++c) {
    Eigen::VectorXd v(dim);
    for (int i = 0; i < dim; ++i) v[i] = rng.uniform(-amplitude, amplitude);
    inits.push_back(v);
  }
  return inits;
}

PitchforkSweepResult sweep_diagram(const std::vector<double>& mu_means, double half_width,
                                   const PCBasis& basis, const PitchforkSweepOptions& options) {
  if (half_width <= 0.0) throw std::invalid_argument("sweep_diagram: half_width must be positive");
  PitchforkSweepResult result;
  result.diagram.observable = "pitchfork-equilibrium";
  const double sigma = half_width / kUniformHalfWidth;

  for (size_t k = 0; k < mu_means.size(); ++k) {
    const double mu_mean = mu_means[k];
    const auto mu = KLExpansion::scalar(mu_mean, sigma, SeedFamily::Uniform);
    const PitchforkGalerkin system(basis, mu);
    RandomStream rng = RandomStream::child(options.rng_seed, k);

    PitchforkSlice slice;
    slice.mu_mean = mu_mean;
    for (int attempt = 0; attempt < options.inits_per_mu; ++attempt) {
      Eigen::VectorXd init(basis.size());
      for (int i = 0; i < basis.size(); ++i)
        init[i] = rng.uniform(-options.init_amplitude, options.init_amplitude);
      slice.solution = system.newton(init, options.newton_tol, options.newton_max_iter);
      if (slice.solution.converged) break;
    }

    if (!slice.solution.converged) {
      DiagramRecord record;
      record.mu = mu_mean;
      record.weight = 0.0;
      record.converged = false;
      result.diagram.records.push_back(record);
      result.slices.push_back(std::move(slice));
      continue;
    }

    const auto samples = sample_expansion(slice.solution.coeffs, basis, options.pdf_samples,
                                          options.rng_seed ^ (0x5bf0'3635ULL + k));
    const auto pdf = kde(samples);
    slice.peaks = peaks(pdf, options.prominence_frac);
    double total = 0.0;
    for (const auto& p : slice.peaks) total += p.density;
    for (const auto& p : slice.peaks) {
      DiagramRecord record;
      record.mu = mu_mean;
      record.value = p.location;
      record.weight = total > 0.0 ? p.density / total : 0.0;
      result.diagram.records.push_back(record);
    }
    result.slices.push_back(std::move(slice));
  }
  return result;
}

}  // namespace stochbif

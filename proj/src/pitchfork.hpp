#pragma once

#include <Eigen/Dense>
#include <vector>

#include "diagram.hpp"
#include "klexp.hpp"
#include "pcbasis.hpp"
#include "uqstats.hpp"

namespace stochbif {

struct PitchforkPCSolution {
  Eigen::VectorXd coeffs;
  bool converged = false;
  bool singular_jacobian = false;
  double residual_norm = 0.0;
  int iterations = 0;
};

// Stochastic-Galerkin projection of the supercritical pitchfork equilibrium
// equation u^3 - mu u = 0 with a perturbed parameter mu = mu_bar + sigma xi.
// Component k of the residual is the expectation of
// (u(xi)^3 - mu(xi) u(xi)) psi_k(xi), evaluated with a Gauss rule that is
// exact for all integrand degrees that occur (including the quartic products
// in the Jacobian).
class PitchforkGalerkin {
public:
  PitchforkGalerkin(const PCBasis& basis, const KLExpansion& mu);

  const PCBasis& basis() const { return *basis_; }
  int size() const { return static_cast<int>(psi_.cols()); }

  Eigen::VectorXd residual(const Eigen::VectorXd& coeffs) const;
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& coeffs) const;

  // Plain (undamped) Newton iteration; a singular Jacobian aborts the
  // iteration and is reported on the returned solution.
  PitchforkPCSolution newton(const Eigen::VectorXd& initial, double tol = 1e-12,
                             int max_iter = 100) const;

private:
  const PCBasis* basis_;
  Eigen::MatrixXd psi_;      // quadrature node -> basis values
  Eigen::VectorXd weights_;  // quadrature weights
  Eigen::VectorXd mu_;       // parameter realization per node
};

// Independent uniform coefficients in [-amplitude, amplitude], reproducible
// under the seed.
std::vector<Eigen::VectorXd> random_initializations(int count, double amplitude,
                                                    std::uint64_t rng_seed, int dim);

struct PitchforkSweepOptions {
  int inits_per_mu = 1;
  double init_amplitude = 3.0;
  std::uint64_t rng_seed = 42;
  int pdf_samples = 20000;
  double prominence_frac = 0.05;
  double newton_tol = 1e-12;
  int newton_max_iter = 100;
};

struct PitchforkSlice {
  double mu_mean = 0.0;
  PitchforkPCSolution solution;
  std::vector<Peak> peaks;
};

struct PitchforkSweepResult {
  BifurcationDiagram diagram;
  std::vector<PitchforkSlice> slices;
};

// Uniform perturbation sweep: for each mu_mean solves with
// mu ~ U(mu_mean - half_width, mu_mean + half_width) from a seeded random
// initialization, and records the KDE peak locations of the sampled solution
// with normalized densities as weights.
PitchforkSweepResult sweep_diagram(const std::vector<double>& mu_means, double half_width,
                                   const PCBasis& basis, const PitchforkSweepOptions& options);

}  // namespace stochbif

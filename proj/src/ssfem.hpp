#pragma once

#include <Eigen/Sparse>

#include "fem.hpp"
#include "klexp.hpp"
#include "nssolve.hpp"
#include "pcbasis.hpp"

namespace stochbif {

// Expansion coefficients of a stochastic field: one column per PC mode.
// Column 0 is the mean field; Dirichlet rows carry the boundary data in
// column 0 and zeros in the fluctuation columns.
struct StochasticField {
  enum class Role { Velocity, Pressure };
  Eigen::MatrixXd coeffs;
  Role role = Role::Velocity;
};

struct SsfemOptions {
  double tol = 1e-8;
  int max_iter = 50;
  bool line_search = true;
  double init_noise = 1e-2;
  std::uint64_t rng_seed = 2718;
};

struct SsfemSolution {
  StochasticField velocity;  // (2 n_q2) x (N_PC + 1)
  StochasticField pressure;  // n_p x (N_PC + 1)
  bool converged = false;
  double residual_norm = 0.0;
  int iterations = 0;
  std::vector<double> residual_history;
};

// Intrusive stochastic-Galerkin projection of the steady Navier-Stokes
// system with a scalar random viscosity mu = mu_bar + sigma xi. Unknowns are
// stacked mode-major, [vx_0; vy_0; p_0; vx_1; ...]; equation blocks are
// scaled by 1/E[psi_m^2], which keeps the N_PC = 0 system identical to the
// deterministic one and decouples the continuity blocks mode-wise.
class SsfemSolver {
public:
  SsfemSolver(const TaylorHoodSpace& space, const FemTensors& tensors, const PCBasis& basis,
              const KLExpansion& mu);

  const TaylorHoodSpace& space() const { return *space_; }
  const PCBasis& basis() const { return *basis_; }
  int n_modes() const { return basis_->size(); }
  int n_unknowns() const { return n_modes() * space_->n_total(); }

  // Momentum blocks contract diffusion with the mean-plus-fluctuation
  // viscosity couplings and convection with the triple-product tensor;
  // continuity blocks are mode-diagonal. Constraint rows read x - g with
  // boundary data in mode 0 only.
  Eigen::VectorXd residual(const Eigen::VectorXd& x) const;
  Eigen::SparseMatrix<double> jacobian(const Eigen::VectorXd& x) const;

  // Mode 0 holds a deterministic solve at the mean viscosity; fluctuation
  // modes get seeded noise on the unconstrained dofs.
  Eigen::VectorXd initial_state(const FlowState& deterministic, double noise_amplitude,
                                std::uint64_t rng_seed) const;
  Eigen::VectorXd constrained_zero_state() const;
  void enforce_constraints(Eigen::VectorXd& x) const;

  SsfemSolution solve(const Eigen::VectorXd& initial, const SsfemOptions& options) const;

  // Column-wise views of a stacked state.
  Eigen::MatrixXd velocity_coeffs(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd pressure_coeffs(const Eigen::VectorXd& x) const;

private:
  const TaylorHoodSpace* space_;
  const FemTensors* tensors_;
  const PCBasis* basis_;
  double mu_bar_;
  Eigen::MatrixXd visc_coupling_;               // (mu_bar c2 + e3[1]) / norms[m]
  std::vector<Eigen::MatrixXd> conv_coupling_;  // f3[m] / norms[m]
  mutable Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
  mutable bool pattern_analyzed_ = false;
};

// mean = column 0 of the expansion.
Eigen::VectorXd mean_field(const StochasticField& field);
// variance at dof n = sum_{i>=1} coeffs(n,i)^2 E[psi_i^2].
Eigen::VectorXd variance_field(const StochasticField& field, const PCBasis& basis);

// PC coefficients of the scalar random variable obtained by evaluating one
// component of the solution at a point (0 = vx, 1 = vy, 2 = p).
Eigen::VectorXd point_polynomial(const SsfemSolution& solution, const TaylorHoodSpace& space,
                                 const Eigen::Vector2d& point, int component);

}  // namespace stochbif

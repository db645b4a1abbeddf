#pragma once

#include <Eigen/Sparse>
#include <memory>
#include <optional>

#include "diagram.hpp"
#include "fem.hpp"

namespace stochbif {

struct FlowState {
  Eigen::VectorXd x;  // [vx; vy; p]
  double mu = 0.0;
  double residual_norm = 0.0;
  bool converged = false;
  int iterations = 0;
};

struct NewtonOptions {
  double tol = 1e-9;
  int max_iter = 50;
  bool line_search = true;
};

// Steady incompressible Navier-Stokes on a Taylor-Hood space. Residual rows
// of Dirichlet dofs read x - g and the matching Jacobian rows are identity,
// so feasible iterates hold their boundary values exactly.
class NavierStokesSolver {
public:
  NavierStokesSolver(const TaylorHoodSpace& space, const FemTensors& tensors);

  const TaylorHoodSpace& space() const { return *space_; }

  // Momentum block mu A v + N(v, v) - C p over both components, continuity
  // block D v, constraint rows x - g.
  Eigen::VectorXd residual(const Eigen::VectorXd& x, double mu) const;
  // Adds both convection linearizations N(., v) and N(v, .).
  SparseMat jacobian(const Eigen::VectorXd& x, double mu) const;

  // Zero velocity/pressure with boundary values imposed.
  Eigen::VectorXd constrained_zero_state() const;
  void enforce_constraints(Eigen::VectorXd& x) const;

  FlowState solve(const Eigen::VectorXd& initial, double mu, const NewtonOptions& options) const;

  double vertical_velocity_at(const Eigen::VectorXd& x, const Eigen::Vector2d& point) const;
  double velocity_component_at(const Eigen::VectorXd& x, const Eigen::Vector2d& point,
                               int component) const;

private:
  const TaylorHoodSpace* space_;
  const FemTensors* tensors_;
  // Factorization machinery survives across calls so the pattern analysis
  // runs once per space.
  mutable Eigen::SparseLU<SparseMat> lu_;
  mutable bool pattern_analyzed_ = false;
};

struct ContinuationOptions {
  NewtonOptions newton;
  Eigen::Vector2d probe{15.0, 3.75};
  double asym_threshold = 0.05;  // |v_y(probe)| marking a post-critical state
  double kick_amplitude = 1.0;   // antisymmetric nudge used to leave the symmetric branch
  double cluster_gap = 0.05;     // observable gap separating distinct branches
  bool store_states = false;
};

struct ContinuationResult {
  BifurcationDiagram diagram;
  std::vector<double> mus;
  // Pass-indexed converged states (symmetric, upper, lower); empty unless
  // store_states was requested.
  std::array<std::vector<FlowState>, 3> states;
  double mu_star = std::numeric_limits<double>::quiet_NaN();
};

// Three continuation passes marching mu downward: a symmetric pass whose
// warm starts are symmetrized, a branch pass nudged off the symmetric state
// by the antisymmetric kick, and a mirror pass seeded with the reflection of
// the branch pass until it separates. The critical point estimate is the
// smallest mu at which the converged observables still form one cluster.
ContinuationResult continuation_sweep(const NavierStokesSolver& solver, double mu_from,
                                      double mu_to, double step,
                                      const ContinuationOptions& options);

}  // namespace stochbif

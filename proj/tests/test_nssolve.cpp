#include <cmath>

#include "doctest.h"
#include "nssolve.hpp"

using namespace stochbif;

namespace {

// Tiny channel for dense finite-difference checks.
TaylorHoodSpace tiny_space() {
  return TaylorHoodSpace(
      build_channel_mesh(ChannelGeometry{}, {2, 3, 2}, SymmetryMode::Unstructured, 0, 11));
}

}  // namespace

TEST_CASE("zero state of the homogeneous unconstrained system has zero residual") {
  ChannelMesh square;
  square.nodes = {{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}};
  square.quads = {{0, 1, 2, 3}};
  TaylorHoodSpace space(square);
  const auto tensors = assemble_fem_tensors(space);
  NavierStokesSolver solver(space, tensors);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(space.n_total());
  CHECK(solver.residual(zero, 1.0).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("jacobian matches central finite differences on a tiny mesh") {
  const auto space = tiny_space();
  const auto tensors = assemble_fem_tensors(space);
  NavierStokesSolver solver(space, tensors);

  Eigen::VectorXd x(space.n_total());
  for (int i = 0; i < x.size(); ++i) x[i] = 0.3 * std::sin(0.7 * i + 0.2);
  const double mu = 0.8;

  const Eigen::MatrixXd jac = Eigen::MatrixXd(solver.jacobian(x, mu));
  const double h = 1e-6;
  double worst = 0.0;
  for (int j = 0; j < x.size(); ++j) {
    Eigen::VectorXd up = x, dn = x;
    up[j] += h;
    dn[j] -= h;
    const Eigen::VectorXd fd = (solver.residual(up, mu) - solver.residual(dn, mu)) / (2.0 * h);
    for (int i = 0; i < x.size(); ++i) {
      const double scale = std::max(1.0, std::abs(jac(i, j)));
      worst = std::max(worst, std::abs(jac(i, j) - fd[i]) / scale);
    }
  }
  CHECK(worst < 1e-5);
}

TEST_CASE("stokes flow on the symmetric preset is symmetric") {
  TaylorHoodSpace space(build_channel_mesh("symmetric"));
  const auto tensors = assemble_fem_tensors(space);
  NavierStokesSolver solver(space, tensors);

  // One linear solve of the zero-velocity linearization is the Stokes
  // system with the boundary data moved to the right-hand side.
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(space.n_total());
  const SparseMat jac = solver.jacobian(zero, 2.0);
  Eigen::SparseLU<SparseMat> lu(jac);
  REQUIRE(lu.info() == Eigen::Success);
  const Eigen::VectorXd stokes = lu.solve(-solver.residual(zero, 2.0));
  CHECK(std::abs(solver.vertical_velocity_at(stokes, {15.0, 3.75})) < 1e-8);
}

TEST_CASE("newton converges in the uniqueness regime and respects its fixed point") {
  TaylorHoodSpace space(build_channel_mesh("symmetric"));
  const auto tensors = assemble_fem_tensors(space);
  NavierStokesSolver solver(space, tensors);

  NewtonOptions options;
  const auto state = solver.solve(solver.constrained_zero_state(), 2.0, options);
  REQUIRE(state.converged);
  CHECK(std::abs(solver.vertical_velocity_at(state.x, {15.0, 3.75})) < 1e-6);

  // Dirichlet dofs hold their prescribed values exactly.
  for (const auto& [dof, value] : space.constrained()) CHECK(state.x[dof] == value);

  // Discrete divergence of the converged state.
  const Eigen::VectorXd div = tensors.D * state.x.segment(0, space.n_velocity());
  CHECK(div.lpNorm<Eigen::Infinity>() < 1e-8);

  // Restarting from the converged state takes no further steps.
  const auto restart = solver.solve(state.x, 2.0, options);
  CHECK(restart.converged);
  CHECK(restart.iterations == 0);
  CHECK((restart.x - state.x).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("reflection equivariance on the symmetric preset") {
  TaylorHoodSpace space(build_channel_mesh("symmetric"));
  const auto tensors = assemble_fem_tensors(space);
  NavierStokesSolver solver(space, tensors);
  const auto state = solver.solve(solver.constrained_zero_state(), 1.5, {});
  REQUIRE(state.converged);
  const auto mirror = build_mirror_operator(space);
  Eigen::VectorXd reflected = mirror.apply(state.x);
  CHECK(solver.residual(reflected, 1.5).lpNorm<Eigen::Infinity>() < 1e-7);
}

TEST_CASE("continuation sweep bookkeeping on a coarse channel") {
  TaylorHoodSpace space(
      build_channel_mesh(ChannelGeometry{}, {6, 12, 2}, SymmetryMode::Unstructured, 0, 3));
  const auto tensors = assemble_fem_tensors(space);
  NavierStokesSolver solver(space, tensors);

  ContinuationOptions options;
  options.store_states = true;
  const auto result = continuation_sweep(solver, 2.0, 1.8, 0.05, options);
  REQUIRE(result.mus.size() == 5);
  CHECK(result.mus.front() == 2.0);
  CHECK(result.mus.back() == doctest::Approx(1.8));
  REQUIRE(result.diagram.records.size() == 15);  // three passes

  // Uniqueness regime: the three passes coincide at every step.
  for (size_t k = 0; k < result.mus.size(); ++k) {
    REQUIRE(result.states[0][k].converged);
    REQUIRE(result.states[1][k].converged);
    REQUIRE(result.states[2][k].converged);
    CHECK((result.states[0][k].x - result.states[1][k].x).lpNorm<Eigen::Infinity>() < 1e-6);
    CHECK((result.states[0][k].x - result.states[2][k].x).lpNorm<Eigen::Infinity>() < 1e-6);
  }
  CHECK(result.mu_star == doctest::Approx(1.8));

  CHECK_THROWS(continuation_sweep(solver, 1.0, 2.0, 0.05, options));
  CHECK_THROWS(continuation_sweep(solver, 2.0, 1.0, -0.1, options));
}

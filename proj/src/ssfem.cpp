#include "ssfem.hpp"

#include <cmath>
#include <stdexcept>

#include "rng.hpp"

namespace stochbif {

SsfemSolver::SsfemSolver(const TaylorHoodSpace& space, const FemTensors& tensors,
                         const PCBasis& basis, const KLExpansion& mu)
    : space_(&space), tensors_(&tensors), basis_(&basis) {
  if (!mu.is_scalar())
    throw std::invalid_argument("SsfemSolver: scalar viscosity expansions only");
  if (pc_family_for(mu.seed_family()) != basis.family())
    throw std::invalid_argument("SsfemSolver: basis family does not match the seed family");
  mu_bar_ = mu.mean_value();

  const auto moments = build_moment_tensors(basis, mu);
  const int modes = basis.size();
  visc_coupling_.resize(modes, modes);
  conv_coupling_.assign(modes, Eigen::MatrixXd(modes, modes));
  for (int m = 0; m < modes; ++m) {
    const double scale = 1.0 / basis.norm_sq(m);
    for (int j = 0; j < modes; ++j)
      visc_coupling_(j, m) = (mu_bar_ * moments.c2(j, m) + moments.e3[1](j, m)) * scale;
    conv_coupling_[m] = moments.f3[m] * scale;
  }
}

Eigen::VectorXd SsfemSolver::residual(const Eigen::VectorXd& x) const {
  const int modes = n_modes();
  const int n = space_->n_q2();
  const int nv = 2 * n;
  const int block = space_->n_total();
  if (x.size() != n_unknowns())
    throw std::invalid_argument("SsfemSolver::residual: state size mismatch");

  // Unknowns are dof-major: index = dof * modes + m. Sparse couplings are
  // applied per mode pair through mode-sliced strided views.
  Eigen::VectorXd r = Eigen::VectorXd::Zero(x.size());
  using Stride = Eigen::InnerStride<Eigen::Dynamic>;
  const auto mode_slice = [&](const Eigen::VectorXd& vec, int dof0, int count, int m) {
    return Eigen::Map<const Eigen::VectorXd, 0, Stride>(vec.data() + dof0 * modes + m, count,
                                                        Stride(modes));
  };
  const auto mode_slice_mut = [&](Eigen::VectorXd& vec, int dof0, int count, int m) {
    return Eigen::Map<Eigen::VectorXd, 0, Stride>(vec.data() + dof0 * modes + m, count,
                                                  Stride(modes));
  };

  for (int m = 0; m < modes; ++m) {
    for (int j = 0; j < modes; ++j) {
      const double w = visc_coupling_(j, m);
      if (w == 0.0) continue;
      mode_slice_mut(r, 0, n, m) += w * (tensors_->A * mode_slice(x, 0, n, j));
      mode_slice_mut(r, n, n, m) += w * (tensors_->A * mode_slice(x, n, n, j));
    }
    mode_slice_mut(r, 0, nv, m) -= tensors_->C * mode_slice(x, nv, space_->n_p(), m);
    mode_slice_mut(r, nv, space_->n_p(), m) = tensors_->D * mode_slice(x, 0, nv, m);
  }

  // Convection: evaluate all mode velocities per quadrature point, then
  // contract with the scaled triple products.
  std::vector<Eigen::Vector2d> u(modes);
  std::vector<Eigen::Matrix2d> grad(modes);
  for (const auto& elem : tensors_->elements) {
    for (int q = 0; q < q2::kQuadPoints; ++q) {
      for (int j = 0; j < modes; ++j) {
        u[j].setZero();
        grad[j].setZero();
        for (int a = 0; a < 9; ++a) {
          const double vxa = x[elem.dofs[a] * modes + j];
          const double vya = x[(n + elem.dofs[a]) * modes + j];
          u[j].x() += elem.value[q][a] * vxa;
          u[j].y() += elem.value[q][a] * vya;
          grad[j](0, 0) += elem.gradient[q][a].x() * vxa;
          grad[j](0, 1) += elem.gradient[q][a].y() * vxa;
          grad[j](1, 0) += elem.gradient[q][a].x() * vya;
          grad[j](1, 1) += elem.gradient[q][a].y() * vya;
        }
      }
      for (int m = 0; m < modes; ++m) {
        Eigen::Vector2d conv = Eigen::Vector2d::Zero();
        for (int j = 0; j < modes; ++j)
          for (int h = 0; h < modes; ++h) {
            const double w = conv_coupling_[m](j, h);
            if (w == 0.0) continue;
            conv += w * (grad[h] * u[j]);
          }
        conv *= elem.jxw[q];
        for (int a = 0; a < 9; ++a) {
          r[elem.dofs[a] * modes + m] += conv.x() * elem.value[q][a];
          r[(n + elem.dofs[a]) * modes + m] += conv.y() * elem.value[q][a];
        }
      }
    }
  }

  for (int m = 0; m < modes; ++m)
    for (const auto& [vdof, value] : space_->constrained())
      r[vdof * modes + m] = x[vdof * modes + m] - (m == 0 ? value : 0.0);
  return r;
}

Eigen::SparseMatrix<double> SsfemSolver::jacobian(const Eigen::VectorXd& x) const {
  const int modes = n_modes();
  const int n = space_->n_q2();
  const int nv = 2 * n;
  const int block = space_->n_total();

  std::vector<Eigen::Triplet<double>> triplets;
  const std::size_t conv_estimate =
      tensors_->elements.size() * 324u * static_cast<std::size_t>(modes) * modes;
  triplets.reserve(conv_estimate + static_cast<std::size_t>(modes) * modes * 2 * tensors_->A.nonZeros() +
                   static_cast<std::size_t>(modes) * 4 * tensors_->D.nonZeros());

  const auto add = [&](int m, int row, int i, int col, double value) {
    if (!space_->is_constrained(row))
      triplets.emplace_back(row * modes + m, col * modes + i, value);
  };

  for (int m = 0; m < modes; ++m) {
    for (int j = 0; j < modes; ++j) {
      const double w = visc_coupling_(j, m);
      if (w == 0.0) continue;
      for (int outer = 0; outer < tensors_->A.outerSize(); ++outer)
        for (SparseMat::InnerIterator it(tensors_->A, outer); it; ++it) {
          add(m, it.row(), j, it.col(), w * it.value());
          add(m, n + it.row(), j, n + it.col(), w * it.value());
        }
    }
    for (int outer = 0; outer < tensors_->C.outerSize(); ++outer)
      for (SparseMat::InnerIterator it(tensors_->C, outer); it; ++it)
        add(m, it.row(), m, nv + it.col(), -it.value());
    for (int outer = 0; outer < tensors_->D.outerSize(); ++outer)
      for (SparseMat::InnerIterator it(tensors_->D, outer); it; ++it)
        triplets.emplace_back((nv + it.row()) * modes + m, it.col() * modes + m, it.value());
    for (const auto& [vdof, value] : space_->constrained())
      triplets.emplace_back(vdof * modes + m, vdof * modes + m, 1.0);
  }

  // Convection linearization, element-local per mode pair.
  std::vector<Eigen::Vector2d> u(modes);
  std::vector<Eigen::Matrix2d> grad(modes);
  // local(h) holds the 18x18 matrices of N(delta, v_h) + N(v_h, delta).
  std::vector<Eigen::Matrix<double, 18, 18>> local(modes);
  for (const auto& elem : tensors_->elements) {
    for (int h = 0; h < modes; ++h) local[h].setZero();
    for (int q = 0; q < q2::kQuadPoints; ++q) {
      for (int j = 0; j < modes; ++j) {
        u[j].setZero();
        grad[j].setZero();
        for (int a = 0; a < 9; ++a) {
          const double vxa = x[elem.dofs[a] * modes + j];
          const double vya = x[(n + elem.dofs[a]) * modes + j];
          u[j].x() += elem.value[q][a] * vxa;
          u[j].y() += elem.value[q][a] * vya;
          grad[j](0, 0) += elem.gradient[q][a].x() * vxa;
          grad[j](0, 1) += elem.gradient[q][a].y() * vxa;
          grad[j](1, 0) += elem.gradient[q][a].x() * vya;
          grad[j](1, 1) += elem.gradient[q][a].y() * vya;
        }
      }
      for (int h = 0; h < modes; ++h) {
        auto& loc = local[h];
        for (int a = 0; a < 9; ++a) {
          const double wa = elem.jxw[q] * elem.value[q][a];
          for (int b = 0; b < 9; ++b) {
            const double phib = elem.value[q][b];
            const double advect =
                u[h].x() * elem.gradient[q][b].x() + u[h].y() * elem.gradient[q][b].y();
            loc(a, b) += wa * (advect + phib * grad[h](0, 0));
            loc(a, 9 + b) += wa * phib * grad[h](0, 1);
            loc(9 + a, b) += wa * phib * grad[h](1, 0);
            loc(9 + a, 9 + b) += wa * (advect + phib * grad[h](1, 1));
          }
        }
      }
    }
    for (int m = 0; m < modes; ++m)
      for (int i = 0; i < modes; ++i) {
        Eigen::Matrix<double, 18, 18> combined = Eigen::Matrix<double, 18, 18>::Zero();
        bool any = false;
        for (int h = 0; h < modes; ++h) {
          const double w = conv_coupling_[m](i, h);
          if (w == 0.0) continue;
          combined += w * local[h];
          any = true;
        }
        if (!any) continue;
        for (int a = 0; a < 9; ++a)
          for (int b = 0; b < 9; ++b) {
            add(m, elem.dofs[a], i, elem.dofs[b], combined(a, b));
            add(m, elem.dofs[a], i, n + elem.dofs[b], combined(a, 9 + b));
            add(m, n + elem.dofs[a], i, elem.dofs[b], combined(9 + a, b));
            add(m, n + elem.dofs[a], i, n + elem.dofs[b], combined(9 + a, 9 + b));
          }
      }
  }

  Eigen::SparseMatrix<double> jac(n_unknowns(), n_unknowns());
  jac.setFromTriplets(triplets.begin(), triplets.end());
  return jac;
}

Eigen::VectorXd SsfemSolver::constrained_zero_state() const {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n_unknowns());
  enforce_constraints(x);
  return x;
}

void SsfemSolver::enforce_constraints(Eigen::VectorXd& x) const {
  const int modes = n_modes();
  for (const auto& [vdof, value] : space_->constrained()) {
    x[vdof * modes] = value;
    for (int m = 1; m < modes; ++m) x[vdof * modes + m] = 0.0;
  }
}

Eigen::VectorXd SsfemSolver::initial_state(const FlowState& deterministic, double noise_amplitude,
                                           std::uint64_t rng_seed) const {
  const int block = space_->n_total();
  const int modes = n_modes();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n_unknowns());
  for (int i = 0; i < block; ++i) x[i * modes] = deterministic.x[i];
  RandomStream rng(rng_seed);
  for (int m = 1; m < modes; ++m)
    for (int i = 0; i < block; ++i)
      x[i * modes + m] = rng.uniform(-noise_amplitude, noise_amplitude);
  enforce_constraints(x);
  return x;
}

SsfemSolution SsfemSolver::solve(const Eigen::VectorXd& initial, const SsfemOptions& options) const {
  if (options.tol <= 0.0) throw std::invalid_argument("SsfemSolver::solve: tol must be positive");
  Eigen::VectorXd x = initial;
  SsfemSolution solution;

  Eigen::VectorXd r = residual(x);
  double norm = r.lpNorm<Eigen::Infinity>();
  double norm2 = r.norm();
  solution.residual_history.push_back(norm);

  for (int it = 0; it <= options.max_iter; ++it) {
    solution.residual_norm = norm;
    solution.iterations = it;
    if (norm < options.tol) {
      solution.converged = true;
      break;
    }
    if (it == options.max_iter) break;

    const Eigen::SparseMatrix<double> jac = jacobian(x);
    if (!pattern_analyzed_) {
      lu_.analyzePattern(jac);
      pattern_analyzed_ = true;
    }
    lu_.factorize(jac);
    if (lu_.info() != Eigen::Success) break;
    const Eigen::VectorXd step = lu_.solve(-r);
    if (!step.allFinite()) break;

    bool accepted = false;
    double alpha = 1.0;
    for (int halving = 0; halving <= 8; ++halving) {
      Eigen::VectorXd candidate = x + alpha * step;
      enforce_constraints(candidate);
      const Eigen::VectorXd cand_r = residual(candidate);
      const double cand_norm2 = cand_r.norm();
      if (cand_norm2 < norm2 || !options.line_search) {
        x = candidate;
        r = cand_r;
        norm = r.lpNorm<Eigen::Infinity>();
        norm2 = cand_norm2;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    solution.residual_history.push_back(norm);
    if (!accepted) break;
  }

  solution.velocity.coeffs = velocity_coeffs(x);
  solution.velocity.role = StochasticField::Role::Velocity;
  solution.pressure.coeffs = pressure_coeffs(x);
  solution.pressure.role = StochasticField::Role::Pressure;
  return solution;
}

Eigen::MatrixXd SsfemSolver::velocity_coeffs(const Eigen::VectorXd& x) const {
  const int modes = n_modes();
  Eigen::MatrixXd coeffs(space_->n_velocity(), modes);
  for (int i = 0; i < space_->n_velocity(); ++i)
    for (int m = 0; m < modes; ++m) coeffs(i, m) = x[i * modes + m];
  return coeffs;
}

Eigen::MatrixXd SsfemSolver::pressure_coeffs(const Eigen::VectorXd& x) const {
  const int modes = n_modes();
  const int nv = space_->n_velocity();
  Eigen::MatrixXd coeffs(space_->n_p(), modes);
  for (int i = 0; i < space_->n_p(); ++i)
    for (int m = 0; m < modes; ++m) coeffs(i, m) = x[(nv + i) * modes + m];
  return coeffs;
}

Eigen::VectorXd mean_field(const StochasticField& field) { return field.coeffs.col(0); }

Eigen::VectorXd variance_field(const StochasticField& field, const PCBasis& basis) {
  Eigen::VectorXd variance = Eigen::VectorXd::Zero(field.coeffs.rows());
  for (int i = 1; i < field.coeffs.cols(); ++i)
    variance += basis.norm_sq(i) * field.coeffs.col(i).cwiseAbs2();
  return variance;
}

Eigen::VectorXd point_polynomial(const SsfemSolution& solution, const TaylorHoodSpace& space,
                                 const Eigen::Vector2d& point, int component) {
  const auto loc = space.locate(point);
  if (!loc) throw std::invalid_argument("point_polynomial: point outside the mesh");
  const int modes = static_cast<int>(solution.velocity.coeffs.cols());
  Eigen::VectorXd coeffs(modes);
  for (int m = 0; m < modes; ++m) {
    if (component == 2) {
      coeffs[m] = space.eval_q1(solution.pressure.coeffs.col(m), *loc);
    } else {
      coeffs[m] = space.eval_q2(
          solution.velocity.coeffs.col(m).segment(component * space.n_q2(), space.n_q2()), *loc);
    }
  }
  return coeffs;
}

}  // namespace stochbif

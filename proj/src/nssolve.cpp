#include "nssolve.hpp"

#include <cmath>
#include <stdexcept>

namespace stochbif {

NavierStokesSolver::NavierStokesSolver(const TaylorHoodSpace& space, const FemTensors& tensors)
    : space_(&space), tensors_(&tensors) {}

Eigen::VectorXd NavierStokesSolver::residual(const Eigen::VectorXd& x, double mu) const {
  const int n = space_->n_q2();
  const int nv = 2 * n;
  if (x.size() != space_->n_total())
    throw std::invalid_argument("NavierStokesSolver::residual: state size mismatch");

  const auto vx = x.segment(0, n);
  const auto vy = x.segment(n, n);
  const auto p = x.segment(nv, space_->n_p());

  Eigen::VectorXd r = Eigen::VectorXd::Zero(space_->n_total());
  r.segment(0, n) = mu * (tensors_->A * vx);
  r.segment(n, n) = mu * (tensors_->A * vy);
  r.segment(0, nv) -= tensors_->C * p;
  r.segment(nv, space_->n_p()) = tensors_->D * x.segment(0, nv);

  // Convection (v . grad v, test), contracted element-wise.
  for (const auto& elem : tensors_->elements) {
    for (int q = 0; q < q2::kQuadPoints; ++q) {
      double ux = 0.0, uy = 0.0;
      Eigen::Matrix2d grad = Eigen::Matrix2d::Zero();  // grad(c, d) = d_d v_c
      for (int a = 0; a < 9; ++a) {
        const double vxa = vx[elem.dofs[a]];
        const double vya = vy[elem.dofs[a]];
        ux += elem.value[q][a] * vxa;
        uy += elem.value[q][a] * vya;
        grad(0, 0) += elem.gradient[q][a].x() * vxa;
        grad(0, 1) += elem.gradient[q][a].y() * vxa;
        grad(1, 0) += elem.gradient[q][a].x() * vya;
        grad(1, 1) += elem.gradient[q][a].y() * vya;
      }
      const double conv_x = elem.jxw[q] * (ux * grad(0, 0) + uy * grad(0, 1));
      const double conv_y = elem.jxw[q] * (ux * grad(1, 0) + uy * grad(1, 1));
      for (int a = 0; a < 9; ++a) {
        r[elem.dofs[a]] += conv_x * elem.value[q][a];
        r[n + elem.dofs[a]] += conv_y * elem.value[q][a];
      }
    }
  }

  for (const auto& [vdof, value] : space_->constrained()) r[vdof] = x[vdof] - value;
  return r;
}

SparseMat NavierStokesSolver::jacobian(const Eigen::VectorXd& x, double mu) const {
  const int n = space_->n_q2();
  const int nv = 2 * n;
  const auto vx = x.segment(0, n);
  const auto vy = x.segment(n, n);

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(tensors_->elements.size() * 400 + 8 * tensors_->D.nonZeros());

  const auto add = [&](int row, int col, double value) {
    if (!space_->is_constrained(row)) triplets.emplace_back(row, col, value);
  };

  // Diffusion.
  for (int outer = 0; outer < tensors_->A.outerSize(); ++outer)
    for (SparseMat::InnerIterator it(tensors_->A, outer); it; ++it) {
      add(it.row(), it.col(), mu * it.value());
      add(n + it.row(), n + it.col(), mu * it.value());
    }
  // Pressure gradient and continuity couplings.
  for (int outer = 0; outer < tensors_->C.outerSize(); ++outer)
    for (SparseMat::InnerIterator it(tensors_->C, outer); it; ++it)
      add(it.row(), nv + it.col(), -it.value());
  for (int outer = 0; outer < tensors_->D.outerSize(); ++outer)
    for (SparseMat::InnerIterator it(tensors_->D, outer); it; ++it)
      triplets.emplace_back(nv + it.row(), it.col(), it.value());

  // Convection linearizations N(delta, v) + N(v, delta).
  for (const auto& elem : tensors_->elements) {
    Eigen::Matrix<double, 18, 18> local = Eigen::Matrix<double, 18, 18>::Zero();
    for (int q = 0; q < q2::kQuadPoints; ++q) {
      double ux = 0.0, uy = 0.0;
      Eigen::Matrix2d grad = Eigen::Matrix2d::Zero();
      for (int a = 0; a < 9; ++a) {
        const double vxa = vx[elem.dofs[a]];
        const double vya = vy[elem.dofs[a]];
        ux += elem.value[q][a] * vxa;
        uy += elem.value[q][a] * vya;
        grad(0, 0) += elem.gradient[q][a].x() * vxa;
        grad(0, 1) += elem.gradient[q][a].y() * vxa;
        grad(1, 0) += elem.gradient[q][a].x() * vya;
        grad(1, 1) += elem.gradient[q][a].y() * vya;
      }
      for (int a = 0; a < 9; ++a) {
        const double wa = elem.jxw[q] * elem.value[q][a];
        for (int b = 0; b < 9; ++b) {
          const double phib = elem.value[q][b];
          const double advect = ux * elem.gradient[q][b].x() + uy * elem.gradient[q][b].y();
          // N(v, delta): same-component advection of the trial function.
          local(a, b) += wa * advect;
          local(9 + a, 9 + b) += wa * advect;
          // N(delta, v): trial component multiplies the velocity gradient.
          local(a, b) += wa * phib * grad(0, 0);
          local(a, 9 + b) += wa * phib * grad(0, 1);
          local(9 + a, b) += wa * phib * grad(1, 0);
          local(9 + a, 9 + b) += wa * phib * grad(1, 1);
        }
      }
    }
    for (int a = 0; a < 9; ++a)
      for (int b = 0; b < 9; ++b) {
        add(elem.dofs[a], elem.dofs[b], local(a, b));
        add(elem.dofs[a], n + elem.dofs[b], local(a, 9 + b));
        add(n + elem.dofs[a], elem.dofs[b], local(9 + a, b));
        add(n + elem.dofs[a], n + elem.dofs[b], local(9 + a, 9 + b));
      }
  }

  for (const auto& [vdof, value] : space_->constrained()) triplets.emplace_back(vdof, vdof, 1.0);

  SparseMat jac(space_->n_total(), space_->n_total());
  jac.setFromTriplets(triplets.begin(), triplets.end());
  return jac;
}

Eigen::VectorXd NavierStokesSolver::constrained_zero_state() const {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(space_->n_total());
  enforce_constraints(x);
  return x;
}

void NavierStokesSolver::enforce_constraints(Eigen::VectorXd& x) const {
  for (const auto& [vdof, value] : space_->constrained()) x[vdof] = value;
}

FlowState NavierStokesSolver::solve(const Eigen::VectorXd& initial, double mu,
                                    const NewtonOptions& options) const {
  if (options.tol <= 0.0) throw std::invalid_argument("NavierStokesSolver::solve: tol must be positive");
  FlowState state;
  state.mu = mu;
  state.x = initial;
  double norm = residual(state.x, mu).lpNorm<Eigen::Infinity>();
  double norm2 = residual(state.x, mu).norm();

  for (int it = 0; it <= options.max_iter; ++it) {
    state.residual_norm = norm;
    state.iterations = it;
    if (norm < options.tol) {
      state.converged = true;
      return state;
    }
    if (it == options.max_iter) break;

    const SparseMat jac = jacobian(state.x, mu);
    if (!pattern_analyzed_) {
      lu_.analyzePattern(jac);
      pattern_analyzed_ = true;
    }
    lu_.factorize(jac);
    if (lu_.info() != Eigen::Success) return state;  // breakdown, flagged non-converged
    const Eigen::VectorXd r = residual(state.x, mu);
    const Eigen::VectorXd step = lu_.solve(-r);
    if (!step.allFinite()) return state;

    if (!options.line_search) {
      state.x += step;
      enforce_constraints(state.x);
      norm = residual(state.x, mu).lpNorm<Eigen::Infinity>();
      continue;
    }
    double alpha = 1.0;
    bool accepted = false;
    for (int halving = 0; halving <= 8; ++halving) {
      Eigen::VectorXd candidate = state.x + alpha * step;
      enforce_constraints(candidate);
      const Eigen::VectorXd cand_residual = residual(candidate, mu);
      // Decrease is measured in the 2-norm; convergence stays on the
      // infinity norm.
      const double cand_norm2 = cand_residual.norm();
      if (cand_norm2 < norm2) {
        state.x = candidate;
        norm = cand_residual.lpNorm<Eigen::Infinity>();
        norm2 = cand_norm2;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      state.residual_norm = norm;
      return state;  // stalled line search
    }
  }
  return state;
}

double NavierStokesSolver::velocity_component_at(const Eigen::VectorXd& x,
                                                 const Eigen::Vector2d& point,
                                                 int component) const {
  const auto loc = space_->locate(point);
  if (!loc) throw std::invalid_argument("velocity_component_at: point outside the mesh");
  return space_->eval_q2(x.segment(component * space_->n_q2(), space_->n_q2()), *loc);
}

double NavierStokesSolver::vertical_velocity_at(const Eigen::VectorXd& x,
                                                const Eigen::Vector2d& point) const {
  return velocity_component_at(x, point, 1);
}

namespace {

// Antisymmetric vertical-velocity nudge, localized past the expansion.
Eigen::VectorXd kick_field(const TaylorHoodSpace& space, double amplitude) {
  const auto& geom = space.mesh().geometry;
  Eigen::VectorXd kick = Eigen::VectorXd::Zero(space.n_total());
  const double x0 = geom.x_step + 0.125 * (geom.x_out - geom.x_step);
  const double width = 0.125 * (geom.x_out - geom.x_step);
  for (int d = 0; d < space.n_q2(); ++d) {
    const int vdof = space.n_q2() + d;
    if (space.is_constrained(vdof)) continue;
    const auto& c = space.q2_coord(d);
    const double sx = (c.x() - x0) / width;
    const double t = c.y() / geom.y_max;
    kick[vdof] = amplitude * std::exp(-sx * sx) * 4.0 * t * (1.0 - t);
  }
  return kick;
}

}  // namespace

ContinuationResult continuation_sweep(const NavierStokesSolver& solver, double mu_from,
                                      double mu_to, double step,
                                      const ContinuationOptions& options) {
  if (step <= 0.0) throw std::invalid_argument("continuation_sweep: step must be positive");
  if (mu_from < mu_to) throw std::invalid_argument("continuation_sweep: sweep marches downward");
  const auto& space = solver.space();

  ContinuationResult result;
  result.diagram.observable = "v_y at probe";
  for (double mu = mu_from; mu >= mu_to - 1e-12; mu -= step) result.mus.push_back(mu);
  const int n_steps = static_cast<int>(result.mus.size());

  const MirrorOperator mirror = build_mirror_operator(space);
  const Eigen::VectorXd kick = kick_field(space, options.kick_amplitude);
  const char* pass_names[3] = {"symmetric", "branch", "mirror"};

  std::array<std::vector<FlowState>, 3> states;
  for (auto& pass : states) pass.reserve(n_steps);

  const auto observable = [&](const FlowState& state) {
    return solver.vertical_velocity_at(state.x, options.probe);
  };

  // Pass 0: symmetrized warm starts track the symmetric family.
  for (int k = 0; k < n_steps; ++k) {
    Eigen::VectorXd init;
    if (k == 0) {
      init = solver.constrained_zero_state();
    } else {
      init = 0.5 * (states[0][k - 1].x + mirror.apply(states[0][k - 1].x));
      solver.enforce_constraints(init);
    }
    states[0].push_back(solver.solve(init, result.mus[k], options.newton));
  }

  // Pass 1: plain continuation, nudged while the previous state still looks
  // symmetric. Below the critical point the nudge lets the solver leave the
  // symmetric family.
  for (int k = 0; k < n_steps; ++k) {
    Eigen::VectorXd init = k == 0 ? solver.constrained_zero_state() : states[1][k - 1].x;
    const double prev_asym =
        k == 0 ? 0.0 : std::abs(solver.vertical_velocity_at(init, options.probe));
    if (prev_asym < options.asym_threshold) {
      init += kick;
      solver.enforce_constraints(init);
    }
    states[1].push_back(solver.solve(init, result.mus[k], options.newton));
  }

  // Pass 2: seeded with the reflection of pass 1 until the two separate.
  bool separated = false;
  for (int k = 0; k < n_steps; ++k) {
    Eigen::VectorXd init;
    if (!separated || !states[2][k - 1].converged) {
      init = mirror.apply(states[1][k].converged || k == 0 ? states[1][k].x : states[1][k - 1].x);
      solver.enforce_constraints(init);
    } else {
      init = states[2][k - 1].x;
    }
    states[2].push_back(solver.solve(init, result.mus[k], options.newton));
    if (!separated && states[2][k].converged && states[1][k].converged) {
      if (std::abs(observable(states[2][k]) - observable(states[1][k])) > options.cluster_gap)
        separated = true;
    }
  }

  // Records and the critical-point estimate.
  std::vector<std::vector<double>> observables(n_steps);
  for (int pass = 0; pass < 3; ++pass) {
    for (int k = 0; k < n_steps; ++k) {
      const auto& state = states[pass][k];
      DiagramRecord record;
      record.mu = result.mus[k];
      record.branch = pass_names[pass];
      record.converged = state.converged;
      record.value = state.converged ? observable(state) : 0.0;
      record.weight = state.converged ? 1.0 : 0.0;
      if (state.converged) observables[k].push_back(record.value);
      result.diagram.records.push_back(record);
    }
  }

  for (int k = 0; k < n_steps; ++k) {
    std::vector<double> values = observables[k];
    if (values.empty()) continue;
    std::sort(values.begin(), values.end());
    if (values.back() - values.front() > options.cluster_gap) break;
    result.mu_star = result.mus[k];
  }

  if (options.store_states) result.states = std::move(states);
  return result;
}

}  // namespace stochbif

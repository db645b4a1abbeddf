#include "mc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "rng.hpp"

namespace stochbif {

std::string to_string(McInitPolicy policy) {
  switch (policy) {
    case McInitPolicy::ZeroGuess: return "zero";
    case McInitPolicy::ContinuationGuess: return "continuation";
    case McInitPolicy::BranchCycling: return "branch-cycling";
  }
  return "zero";
}

int McEnsemble::n_converged() const {
  int count = 0;
  for (const auto& sample : samples)
    if (sample.state.converged) ++count;
  return count;
}

namespace {

// Nearest-parameter converged state of a given pass; falls back to other
// passes when that pass lost the branch at the nearest parameter.
const FlowState* nearest_state(const ContinuationResult& diagram, double mu, int pass) {
  const FlowState* best = nullptr;
  double best_distance = 1e300;
  for (int shift = 0; shift < 3; ++shift) {
    const auto& states = diagram.states[(pass + shift) % 3];
    for (const auto& state : states) {
      if (!state.converged) continue;
      const double distance = std::abs(state.mu - mu);
      if (distance < best_distance) {
        best_distance = distance;
        best = &state;
      }
    }
    if (best) return best;
  }
  return best;
}

}  // namespace

McEnsemble run_mc(const NavierStokesSolver& solver, const KLExpansion& dist, int n_samples,
                  McInitPolicy policy, const ContinuationResult* diagram,
                  const McOptions& options) {
  if (n_samples < 1) throw std::invalid_argument("run_mc: n_samples must be >= 1");
  if (!dist.is_scalar()) throw std::invalid_argument("run_mc: scalar parameter distributions only");
  if (policy != McInitPolicy::ZeroGuess && diagram == nullptr)
    throw std::invalid_argument("run_mc: warm-start policies need a deterministic diagram");

  McEnsemble ensemble;
  ensemble.policy = policy;
  ensemble.rng_seed = options.rng_seed;
  ensemble.samples.resize(n_samples);

  // Draws are taken once, sequentially, so they do not depend on the
  // worker count.
  RandomStream rng(options.rng_seed);
  for (int i = 0; i < n_samples; ++i) {
    double mu = dist.draw_scalar(rng);
    while (mu < options.mu_min || mu > options.mu_max) {
      ++ensemble.rejected_draws;
      mu = dist.draw_scalar(rng);
    }
    ensemble.samples[i].mu_draw = mu;
    ensemble.samples[i].policy = policy;
  }

  const auto solve_sample = [&](int i) {
    auto& sample = ensemble.samples[i];
    Eigen::VectorXd init;
    switch (policy) {
      case McInitPolicy::ZeroGuess:
        init = solver.constrained_zero_state();
        break;
      case McInitPolicy::ContinuationGuess:
      case McInitPolicy::BranchCycling: {
        sample.seed_pass = i % 3;
        const FlowState* seed = nearest_state(*diagram, sample.mu_draw, sample.seed_pass);
        if (seed == nullptr) {
          init = solver.constrained_zero_state();
        } else {
          init = seed->x;
        }
        break;
      }
    }
    sample.state = solver.solve(init, sample.mu_draw, options.newton);
  };

  // Factorizations share the solver's symbolic analysis but not numeric
  // state, so parallel workers need their own solver; fall back to serial
  // execution unless the caller provides per-thread solvers upstream.
  for (int i = 0; i < n_samples; ++i) solve_sample(i);
  return ensemble;
}

McStats ensemble_stats(const NavierStokesSolver& solver, const McEnsemble& ensemble,
                       const Eigen::Vector2d& probe) {
  const int nv = solver.space().n_velocity();
  McStats stats;
  stats.mean_velocity = Eigen::VectorXd::Zero(nv);
  stats.variance_velocity = Eigen::VectorXd::Zero(nv);

  for (const auto& sample : ensemble.samples) {
    if (!sample.state.converged) continue;
    ++stats.n_converged;
    stats.mean_velocity += sample.state.x.segment(0, nv);
    stats.scatter.emplace_back(sample.mu_draw,
                               solver.vertical_velocity_at(sample.state.x, probe));
  }
  if (stats.n_converged < 2)
    throw std::runtime_error("ensemble_stats: need at least two converged samples");
  stats.mean_velocity /= stats.n_converged;

  for (const auto& sample : ensemble.samples) {
    if (!sample.state.converged) continue;
    stats.variance_velocity +=
        (sample.state.x.segment(0, nv) - stats.mean_velocity).cwiseAbs2();
  }
  stats.variance_velocity /= (stats.n_converged - 1);
  return stats;
}

}  // namespace stochbif

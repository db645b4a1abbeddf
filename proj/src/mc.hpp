#pragma once

#include <optional>

#include "klexp.hpp"
#include "nssolve.hpp"

namespace stochbif {

enum class McInitPolicy { ZeroGuess, ContinuationGuess, BranchCycling };

std::string to_string(McInitPolicy policy);

struct McSample {
  double mu_draw = 0.0;
  FlowState state;
  McInitPolicy policy = McInitPolicy::ZeroGuess;
  int seed_pass = -1;  // continuation pass used for the initial guess
};

struct McEnsemble {
  std::vector<McSample> samples;
  McInitPolicy policy = McInitPolicy::ZeroGuess;
  std::uint64_t rng_seed = 0;
  int rejected_draws = 0;  // truncated-Gaussian rejections

  int n_converged() const;
};

struct McOptions {
  NewtonOptions newton;
  std::uint64_t rng_seed = 77;
  int jobs = 1;
  // Truncation keeping the viscosity solves well posed.
  double mu_min = 0.4;
  double mu_max = 2.5;
};

// Ensemble of deterministic solves at seeded parameter draws. ZeroGuess
// starts every solve from rest; ContinuationGuess warm-starts from the
// nearest-parameter state of a previously computed deterministic diagram
// (rotating over its passes); BranchCycling cycles the three branch states
// explicitly.
McEnsemble run_mc(const NavierStokesSolver& solver, const KLExpansion& dist, int n_samples,
                  McInitPolicy policy, const ContinuationResult* diagram, const McOptions& options);

struct McStats {
  Eigen::VectorXd mean_velocity;      // length 2 n_q2
  Eigen::VectorXd variance_velocity;  // unbiased, per velocity dof
  std::vector<std::pair<double, double>> scatter;  // (mu_draw, v_y at probe)
  int n_converged = 0;
};

McStats ensemble_stats(const NavierStokesSolver& solver, const McEnsemble& ensemble,
                       const Eigen::Vector2d& probe);

}  // namespace stochbif

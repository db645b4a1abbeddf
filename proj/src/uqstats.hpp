#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "diagram.hpp"
#include "klexp.hpp"
#include "pcbasis.hpp"

namespace stochbif {

// Seed interval carrying ~99% of the probability mass; polynomial extrema
// are only meaningful inside it.
struct SamplingZone {
  SeedFamily family;
  double lo;
  double hi;

  static SamplingZone for_family(SeedFamily family) {
    if (family == SeedFamily::Gaussian) return {family, -3.0, 3.0};
    return {family, -kUniformHalfWidth, kUniformHalfWidth};
  }
};

struct PdfEstimate {
  Eigen::VectorXd grid;
  Eigen::VectorXd density;
  double bandwidth = 0.0;
  int n_samples = 0;
  bool degenerate = false;  // zero-variance input, delta-like result
};

struct Peak {
  double location;
  double density;
};

struct Extremum {
  double xi;
  double value;
  enum class Kind { Minimum, Maximum } kind;
};

// Evaluate the 1D expansion polynomial at seeds drawn from the basis
// measure; deterministic under the seed.
std::vector<double> sample_expansion(const Eigen::VectorXd& coeffs, const PCBasis& basis,
                                     int n_samples, std::uint64_t rng_seed);

// Gaussian-kernel density estimate on 512 uniform grid points spanning the
// sample range +- 3 bandwidths. Default bandwidth is Silverman's rule,
// 0.9 * min(std, IQR/1.34) * n^(-1/5).
PdfEstimate kde(const std::vector<double>& samples,
                std::optional<double> bandwidth = std::nullopt);

// Local extrema of the expansion polynomial inside the sampling zone, found
// as companion-matrix roots of the derivative of the monomial form and
// classified by the second-derivative sign.
std::vector<Extremum> local_extrema(const Eigen::VectorXd& coeffs, const PCBasis& basis,
                                    const SamplingZone& zone);

// Local maxima of a density with prominence at least prominence_frac times
// the maximum density, sorted by location.
std::vector<Peak> peaks(const PdfEstimate& pdf, double prominence_frac);

struct ProbabilisticDiagramConfig {
  int n_samples = 20000;
  double prominence_frac = 0.05;
  std::uint64_t rng_seed = 1;
  std::optional<double> bandwidth;
};

struct ProbeRun {
  double mu_mean = 0.0;
  Eigen::VectorXd coeffs;
  bool converged = true;
};

// Sample/KDE/peak-detect each run and emit (mu, peak location, normalized
// peak density) records; non-converged runs are recorded with a flag.
BifurcationDiagram probabilistic_diagram(const std::vector<ProbeRun>& runs, const PCBasis& basis,
                                         const ProbabilisticDiagramConfig& config);

// Single-linkage clustering of scalar values with a fixed gap threshold;
// returns cluster count.
int count_clusters(std::vector<double> values, double gap);

}  // namespace stochbif

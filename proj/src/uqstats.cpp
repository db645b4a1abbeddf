#include "uqstats.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rng.hpp"

namespace stochbif {

std::vector<double> sample_expansion(const Eigen::VectorXd& coeffs, const PCBasis& basis,
                                     int n_samples, std::uint64_t rng_seed) {
  if (n_samples < 1) throw std::invalid_argument("sample_expansion: n_samples must be >= 1");
  if (basis.n_rv() != 1) throw std::invalid_argument("sample_expansion: single-seed bases only");
  const bool gaussian = basis.family() == PCFamily::HermiteGaussian;
  RandomStream rng(rng_seed);
  std::vector<double> samples(n_samples);
  const int size = std::min<int>(basis.size(), static_cast<int>(coeffs.size()));
  for (int s = 0; s < n_samples; ++s) {
    const double xi =
        gaussian ? rng.normal() : rng.uniform(-kUniformHalfWidth, kUniformHalfWidth);
    double value = 0.0;
    for (int i = 0; i < size; ++i) value += coeffs[i] * basis.eval_1d(basis.multi_index(i)[0], xi);
    samples[s] = value;
  }
  return samples;
}

namespace {

double sample_std(const std::vector<double>& samples) {
  const double n = static_cast<double>(samples.size());
  double mean = 0.0;
  for (double s : samples) mean += s;
  mean /= n;
  double ss = 0.0;
  for (double s : samples) ss += (s - mean) * (s - mean);
  return std::sqrt(ss / (n - 1.0));
}

double interquartile_range(std::vector<double> sorted) {
  const auto quantile = [&](double q) {
    const double pos = q * (sorted.size() - 1);
    const auto lo = static_cast<size_t>(pos);
    const double frac = pos - lo;
    if (lo + 1 >= sorted.size()) return sorted.back();
    return sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac;
  };
  return quantile(0.75) - quantile(0.25);
}

}  // namespace

PdfEstimate kde(const std::vector<double>& samples, std::optional<double> bandwidth) {
  if (samples.size() < 10) throw std::invalid_argument("kde: need at least 10 samples");
  PdfEstimate pdf;
  pdf.n_samples = static_cast<int>(samples.size());

  std::vector<double> sorted(samples);
  std::sort(sorted.begin(), sorted.end());
  const double stddev = sample_std(samples);
  const double iqr = interquartile_range(sorted);

  // Samples that agree to machine precision are a delta, not a density.
  const double scale = std::max(1.0, std::abs(sorted.front() + sorted.back()) / 2.0);
  const bool zero_variance = stddev <= 1e-9 * scale;

  double h;
  if (bandwidth) {
    h = *bandwidth;
    if (h <= 0.0) throw std::invalid_argument("kde: bandwidth must be positive");
  } else if (zero_variance) {
    pdf.degenerate = true;
    h = scale * 1e-9;
  } else {
    double spread = std::min(stddev, iqr / 1.34);
    if (spread <= 0.0) spread = stddev;
    h = 0.9 * spread * std::pow(static_cast<double>(samples.size()), -0.2);
  }
  pdf.bandwidth = h;

  constexpr int kGridSize = 512;
  const double lo = sorted.front() - 3.0 * h;
  const double hi = sorted.back() + 3.0 * h;
  pdf.grid.resize(kGridSize);
  pdf.density.setZero(kGridSize);
  const double dx = (hi - lo) / (kGridSize - 1);
  for (int g = 0; g < kGridSize; ++g) pdf.grid[g] = lo + g * dx;

  const double inv_h = 1.0 / h;
  const double norm = 1.0 / (std::sqrt(2.0 * M_PI) * h * samples.size());
  for (int g = 0; g < kGridSize; ++g) {
    const double x = pdf.grid[g];
    double acc = 0.0;
    for (double s : samples) {
      const double t = (x - s) * inv_h;
      if (std::abs(t) < 8.0) acc += std::exp(-0.5 * t * t);
    }
    pdf.density[g] = acc * norm;
  }
  return pdf;
}

std::vector<Extremum> local_extrema(const Eigen::VectorXd& coeffs, const PCBasis& basis,
                                    const SamplingZone& zone) {
  if (basis.n_rv() != 1) throw std::invalid_argument("local_extrema: single-seed bases only");
  // Monomial form of the expansion polynomial.
  const int size = std::min<int>(basis.size(), static_cast<int>(coeffs.size()));
  std::vector<double> mono(1, 0.0);
  for (int i = 0; i < size; ++i) {
    const auto ci = basis.monomial_coeffs_1d(basis.multi_index(i)[0]);
    if (ci.size() > mono.size()) mono.resize(ci.size(), 0.0);
    for (size_t k = 0; k < ci.size(); ++k) mono[k] += coeffs[i] * ci[k];
  }
  // Derivative, trimmed of trailing zeros.
  std::vector<double> deriv;
  for (size_t k = 1; k < mono.size(); ++k) deriv.push_back(static_cast<double>(k) * mono[k]);
  while (!deriv.empty() && deriv.back() == 0.0) deriv.pop_back();
  std::vector<Extremum> result;
  if (deriv.size() < 2) return result;  // affine or constant polynomial

  const int deg = static_cast<int>(deriv.size()) - 1;
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(deg, deg);
  for (int k = 0; k < deg; ++k) companion(k, deg - 1) = -deriv[k] / deriv[deg];
  for (int k = 1; k < deg; ++k) companion(k, k - 1) = 1.0;
  Eigen::EigenSolver<Eigen::MatrixXd> eig(companion);

  const auto eval_mono = [](const std::vector<double>& poly, double x) {
    double value = 0.0;
    for (size_t k = poly.size(); k-- > 0;) value = value * x + poly[k];
    return value;
  };
  std::vector<double> second;
  for (size_t k = 1; k < deriv.size(); ++k) second.push_back(static_cast<double>(k) * deriv[k]);

  for (int k = 0; k < deg; ++k) {
    const std::complex<double> root = eig.eigenvalues()[k];
    if (std::abs(root.imag()) > 1e-9) continue;
    const double xi = root.real();
    if (xi < zone.lo || xi > zone.hi) continue;
    Extremum ext;
    ext.xi = xi;
    ext.value = eval_mono(mono, xi);
    ext.kind = eval_mono(second, xi) < 0.0 ? Extremum::Kind::Maximum : Extremum::Kind::Minimum;
    result.push_back(ext);
  }
  std::sort(result.begin(), result.end(),
            [](const Extremum& a, const Extremum& b) { return a.xi < b.xi; });
  // Drop duplicated roots (multiple eigenvalues within tolerance).
  std::vector<Extremum> unique;
  for (const auto& e : result) {
    if (!unique.empty() && std::abs(e.xi - unique.back().xi) < 1e-9) continue;
    unique.push_back(e);
  }
  return unique;
}

std::vector<Peak> peaks(const PdfEstimate& pdf, double prominence_frac) {
  if (prominence_frac <= 0.0 || prominence_frac >= 1.0)
    throw std::invalid_argument("peaks: prominence_frac must lie in (0, 1)");
  const auto& d = pdf.density;
  const int n = static_cast<int>(d.size());
  std::vector<Peak> result;
  if (n < 3) return result;
  const double threshold = prominence_frac * d.maxCoeff();

  for (int i = 1; i + 1 < n; ++i) {
    // Plateau-tolerant local maximum: ties broken toward the leftmost point.
    if (!(d[i] > d[i - 1])) continue;
    int j = i;
    while (j + 1 < n && d[j + 1] == d[i]) ++j;
    if (j + 1 < n && d[j + 1] > d[i]) continue;

    // Prominence: drop to the highest saddle separating this peak from
    // higher terrain on either side.
    double left_min = d[i];
    for (int k = i - 1; k >= 0; --k) {
      if (d[k] > d[i]) break;
      left_min = std::min(left_min, d[k]);
    }
    double right_min = d[i];
    for (int k = j + 1; k < n; ++k) {
      if (d[k] > d[i]) break;
      right_min = std::min(right_min, d[k]);
    }
    const double prominence = d[i] - std::max(left_min, right_min);
    if (prominence >= threshold) result.push_back({pdf.grid[i], d[i]});
  }
  std::sort(result.begin(), result.end(),
            [](const Peak& a, const Peak& b) { return a.location < b.location; });
  return result;
}

BifurcationDiagram probabilistic_diagram(const std::vector<ProbeRun>& runs, const PCBasis& basis,
                                         const ProbabilisticDiagramConfig& config) {
  BifurcationDiagram diagram;
  diagram.observable = "pc-expansion-peaks";
  for (size_t r = 0; r < runs.size(); ++r) {
    const auto& run = runs[r];
    if (!run.converged) {
      DiagramRecord record;
      record.mu = run.mu_mean;
      record.value = 0.0;
      record.weight = 0.0;
      record.converged = false;
      diagram.records.push_back(record);
      continue;
    }
    const auto samples = sample_expansion(run.coeffs, basis, config.n_samples,
                                          config.rng_seed + static_cast<std::uint64_t>(r));
    const auto pdf = kde(samples, config.bandwidth);
    const auto found = peaks(pdf, config.prominence_frac);
    double total = 0.0;
    for (const auto& p : found) total += p.density;
    for (const auto& p : found) {
      DiagramRecord record;
      record.mu = run.mu_mean;
      record.value = p.location;
      record.weight = total > 0.0 ? p.density / total : 0.0;
      diagram.records.push_back(record);
    }
  }
  return diagram;
}

int count_clusters(std::vector<double> values, double gap) {
  if (values.empty()) return 0;
  std::sort(values.begin(), values.end());
  int clusters = 1;
  for (size_t i = 1; i < values.size(); ++i)
    if (values[i] - values[i - 1] > gap) ++clusters;
  return clusters;
}

}  // namespace stochbif

#include <cmath>

#include "doctest.h"
#include "rng.hpp"
#include "uqstats.hpp"

using namespace stochbif;

TEST_CASE("sampling zones per family") {
  const auto gauss = SamplingZone::for_family(SeedFamily::Gaussian);
  CHECK(gauss.lo == -3.0);
  CHECK(gauss.hi == 3.0);
  const auto unif = SamplingZone::for_family(SeedFamily::Uniform);
  CHECK(unif.lo == doctest::Approx(-std::sqrt(3.0)));
  CHECK(unif.hi == doctest::Approx(std::sqrt(3.0)));
}

TEST_CASE("constant expansions sample to the constant") {
  PCBasis basis(PCFamily::HermiteGaussian, 3);
  Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(4);
  coeffs[0] = 2.5;
  const auto samples = sample_expansion(coeffs, basis, 100, 7);
  for (double s : samples) CHECK(s == 2.5);
}

TEST_CASE("the first hermite mode is the seed itself") {
  PCBasis basis(PCFamily::HermiteGaussian, 3);
  Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(4);
  coeffs[1] = 1.0;
  const int n = 100000;
  const auto samples = sample_expansion(coeffs, basis, n, 11);
  double mean = 0.0, second = 0.0;
  for (double s : samples) {
    mean += s;
    second += s * s;
  }
  mean /= n;
  const double var = second / n - mean * mean;
  CHECK(std::abs(mean) < 3.0 / std::sqrt(static_cast<double>(n)));
  CHECK(std::abs(var - 1.0) < 3.0 * std::sqrt(2.0 / n));
}

TEST_CASE("sampling is deterministic under a fixed seed") {
  PCBasis basis(PCFamily::LegendreUniform, 4);
  Eigen::VectorXd coeffs(5);
  coeffs << 0.3, -1.0, 0.2, 0.05, -0.4;
  const auto a = sample_expansion(coeffs, basis, 1000, 42);
  const auto b = sample_expansion(coeffs, basis, 1000, 42);
  CHECK(a == b);
}

TEST_CASE("kde of standard normal samples is unimodal around zero") {
  RandomStream rng(5);
  std::vector<double> samples(100000);
  for (double& s : samples) s = rng.normal();
  const auto pdf = kde(samples);
  int argmax = 0;
  for (int i = 0; i < pdf.density.size(); ++i)
    if (pdf.density[i] > pdf.density[argmax]) argmax = i;
  CHECK(std::abs(pdf.grid[argmax]) < 0.05);
  const auto found = peaks(pdf, 0.05);
  CHECK(found.size() == 1);
}

TEST_CASE("kde mass is within one percent of unity") {
  RandomStream rng(17);
  for (int rep = 0; rep < 4; ++rep) {
    std::vector<double> samples(5000);
    for (double& s : samples) {
      // mixture with well-separated humps
      const double c = rng.uniform01() < 0.5 ? -2.0 : 1.5;
      s = c + 0.3 * rng.normal();
    }
    const auto pdf = kde(samples);
    double mass = 0.0;
    for (int i = 1; i < pdf.grid.size(); ++i)
      mass += 0.5 * (pdf.density[i] + pdf.density[i - 1]) * (pdf.grid[i] - pdf.grid[i - 1]);
    CHECK(mass > 0.99);
    CHECK(mass < 1.01);
  }
}

TEST_CASE("kde flags zero-variance input") {
  std::vector<double> samples(50, 1.25);
  const auto pdf = kde(samples);
  CHECK(pdf.degenerate);
  CHECK_THROWS(kde({1.0, 2.0}));  // fewer than 10 samples
}

TEST_CASE("affine polynomials have no extrema and cubics match closed form") {
  PCBasis basis(PCFamily::HermiteGaussian, 3);
  const auto zone = SamplingZone::for_family(SeedFamily::Gaussian);

  Eigen::VectorXd affine = Eigen::VectorXd::Zero(4);
  affine[0] = 1.0;
  affine[1] = -2.0;
  CHECK(local_extrema(affine, basis, zone).empty());

  // He_3(x) = x^3 - 3x: extrema at -1 (max, value 2) and +1 (min, value -2).
  Eigen::VectorXd cubic = Eigen::VectorXd::Zero(4);
  cubic[3] = std::sqrt(6.0);  // undo the 1/sqrt(3!) normalization
  const auto extrema = local_extrema(cubic, basis, zone);
  REQUIRE(extrema.size() == 2);
  CHECK(extrema[0].xi == doctest::Approx(-1.0).epsilon(1e-10));
  CHECK(extrema[0].value == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(extrema[0].kind == Extremum::Kind::Maximum);
  CHECK(extrema[1].xi == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(extrema[1].value == doctest::Approx(-2.0).epsilon(1e-10));
  CHECK(extrema[1].kind == Extremum::Kind::Minimum);
}

TEST_CASE("companion-matrix extrema agree with a dense grid scan") {
  PCBasis basis(PCFamily::LegendreUniform, 6);
  const auto zone = SamplingZone::for_family(SeedFamily::Uniform);
  RandomStream rng(23);
  int checked = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    Eigen::VectorXd coeffs(basis.size());
    for (int i = 0; i < coeffs.size(); ++i) coeffs[i] = rng.uniform(-1.0, 1.0);
    const auto extrema = local_extrema(coeffs, basis, zone);

    // Oracle: sign changes of a finite-difference derivative on a fine grid.
    const int n = 10000;
    std::vector<double> xs(n), vals(n);
    for (int i = 0; i < n; ++i) {
      xs[i] = zone.lo + (zone.hi - zone.lo) * i / (n - 1.0);
      double v = 0.0;
      for (int j = 0; j < basis.size(); ++j) v += coeffs[j] * basis.eval(j, xs[i]);
      vals[i] = v;
    }
    std::vector<double> grid_extrema;
    for (int i = 1; i + 1 < n; ++i) {
      const double dl = vals[i] - vals[i - 1];
      const double dr = vals[i + 1] - vals[i];
      if ((dl > 0 && dr < 0) || (dl < 0 && dr > 0)) grid_extrema.push_back(xs[i]);
    }
    if (grid_extrema.size() != extrema.size()) continue;  // grid-edge ties
    for (size_t k = 0; k < extrema.size(); ++k) {
      CHECK(std::abs(extrema[k].xi - grid_extrema[k]) < 1e-3);
      ++checked;
    }
  }
  CHECK(checked > 500);
}

TEST_CASE("peak detection basics") {
  PdfEstimate pdf;
  pdf.grid.resize(101);
  pdf.density.resize(101);
  for (int i = 0; i <= 100; ++i) {
    const double x = -3.0 + 6.0 * i / 100.0;
    pdf.grid[i] = x;
    pdf.density[i] = std::exp(-0.5 * (x + 1.5) * (x + 1.5) / 0.04) +
                     0.8 * std::exp(-0.5 * (x - 1.5) * (x - 1.5) / 0.04);
  }
  const auto two = peaks(pdf, 0.05);
  REQUIRE(two.size() == 2);
  CHECK(two[0].location == doctest::Approx(-1.5).epsilon(0.05));
  CHECK(two[1].location == doctest::Approx(1.5).epsilon(0.05));

  // prominence_frac -> 1 keeps at most the global maximum
  const auto only = peaks(pdf, 0.999);
  CHECK(only.size() <= 1);

  // monotonicity in the threshold
  size_t last = 1000;
  for (double frac : {0.01, 0.1, 0.3, 0.6, 0.9}) {
    const auto found = peaks(pdf, frac);
    CHECK(found.size() <= last);
    last = found.size();
  }
  CHECK_THROWS(peaks(pdf, 0.0));
  CHECK_THROWS(peaks(pdf, 1.0));
}

TEST_CASE("probabilistic diagram handles empty input and flags failures") {
  PCBasis basis(PCFamily::LegendreUniform, 5);
  CHECK(probabilistic_diagram({}, basis, {}).records.empty());

  ProbeRun bad;
  bad.mu_mean = 1.0;
  bad.converged = false;
  bad.coeffs = Eigen::VectorXd::Zero(basis.size());
  const auto diagram = probabilistic_diagram({bad}, basis, {});
  REQUIRE(diagram.records.size() == 1);
  CHECK_FALSE(diagram.records[0].converged);
  CHECK(diagram.records[0].weight == 0.0);
}

TEST_CASE("cluster counting with a gap threshold") {
  CHECK(count_clusters({}, 0.1) == 0);
  CHECK(count_clusters({1.0, 1.02, 1.05}, 0.1) == 1);
  CHECK(count_clusters({-2.0, 0.0, 2.0, 2.05}, 0.1) == 3);
}

#pragma once

#include <string>
#include <vector>

namespace stochbif {

// One point of a bifurcation diagram: a branch value of the observable at a
// parameter value. Deterministic records carry weight 1; probabilistic
// records carry the normalized KDE peak density (weights per parameter sum
// to at most 1).
struct DiagramRecord {
  double mu = 0.0;
  double value = 0.0;
  double weight = 1.0;
  std::string branch;  // optional label ("symmetric", "upper", "lower", ...)
  bool converged = true;
};

struct BifurcationDiagram {
  std::vector<DiagramRecord> records;
  // Observable description, e.g. probe point and component for flow problems.
  std::string observable;
};

}  // namespace stochbif

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace ldm {

/// Predicted label (+1 when score >= 0) with its raw decision value.
struct Prediction {
  int label = 1;
  double score = 0.0;
};

/// Outcome of a training run, shared by both solvers.
struct SolverReport {
  /// Dual objective after every epoch (kernel solver) or primal objective
  /// of the averaged iterate at every epoch boundary (linear solver).
  std::vector<double> objective_trace;
  bool converged = false;
  int epochs = 0;
  std::int64_t iterations = 0;
  /// Largest projected-gradient violation at the final epoch boundary
  /// (kernel solver only).
  double final_violation = 0.0;
  /// Leave-one-out error bound of the final dual solution (kernel solver).
  std::optional<double> loo_bound;
  /// Step size actually used (linear solver).
  std::optional<double> eta0;
};

}  // namespace ldm

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ldm/data.hpp"
#include "ldm/kernel.hpp"
#include "ldm/kernel_ldm.hpp"
#include "ldm/linear_ldm.hpp"

namespace ldm {

enum class SolverKind { kernel, linear };

std::string to_string(SolverKind kind);
SolverKind parse_solver_kind(const std::string& name);

/// Candidate values. RBF widths are multiples of the average pairwise
/// distance of the (normalized) fold-training instances.
struct SearchGrid {
  std::vector<double> c_values{10.0, 50.0, 100.0};
  std::vector<double> lambda_values{0.00390625, 0.0078125, 0.015625, 0.03125,
                                    0.0625,     0.125,     0.25};  // 2^-8 .. 2^-2
  std::vector<double> width_multipliers{0.25, 0.5, 1.0, 2.0, 4.0};

  void validate(KernelKind kernel) const;
};

/// One hyperparameter configuration; `width` is the multiplier of the width
/// base for RBF kernels and 0 for the linear kernel.
struct GridPoint {
  double c = 0.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double width = 0.0;

  friend bool operator==(const GridPoint&, const GridPoint&) = default;
};

/// Tie-break order: smaller C, then lambda1, then lambda2, then width.
bool tie_break_less(const GridPoint& a, const GridPoint& b);

struct FoldRecord {
  GridPoint point;
  std::size_t fold = 0;
  double accuracy = 0.0;
};

struct ConfigScore {
  GridPoint point;
  double mean_accuracy = 0.0;
  std::vector<double> fold_accuracies;
};

struct SearchResult {
  GridPoint best;
  double best_accuracy = 0.0;
  std::vector<ConfigScore> scores;  // in tie-break order
  std::vector<FoldRecord> log;
  std::vector<GridPoint> tied;      // every configuration sharing the best mean
  FoldPlan folds;
};

/// Receives the original row indices each fitted preprocessing step saw
/// ("normalizer" or "width").
using FitObserver = std::function<void(std::string_view step, std::span<const std::size_t> rows)>;

struct CvOptions {
  SolverKind solver = SolverKind::kernel;
  KernelKind kernel = KernelKind::linear;
  std::size_t folds = 5;
  std::uint64_t seed = 0;
  bool normalize = true;
  std::size_t width_cap = 1000;
  KernelLdmParams kernel_params;  // tolerance, epochs, ridge, shuffle, seed
  LinearLdmParams linear_params;  // epochs, schedule, step-size grid, seed
  FitObserver on_fit;
};

/// k-fold grid search. Preprocessing is refit on every training fold. When
/// a training fold lacks a class the folds are redrawn once with a derived
/// seed before giving up with DataError.
SearchResult cross_validate(const LabeledDataset& d, const SearchGrid& grid,
                            const CvOptions& options);

/// `c,lambda1,lambda2,width,fold,accuracy` rows.
void write_cv_log(std::ostream& out, const SearchResult& result);

}  // namespace ldm

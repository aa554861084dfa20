#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "ldm/data.hpp"
#include "ldm/kernel.hpp"
#include "ldm/kernel_ldm.hpp"

namespace ldm {

struct CurvePoint {
  double margin = 0.0;
  double fraction = 0.0;
};

/// Margin distribution of a scored training set. `variance` is the
/// normalized form (2/m^2)(m sum g^2 - (sum g)^2), i.e. the pairwise sum of
/// squared differences divided by m^2. `cumulative` is the empirical CDF
/// with one point per instance, sorted by margin.
struct MarginStats {
  std::vector<double> margins;
  double mean = 0.0;
  double variance = 0.0;
  double minimum = 0.0;
  std::vector<CurvePoint> cumulative;
};

/// margin_i = y_i * score_i.
MarginStats compute_margins(std::span<const double> scores, std::span<const int> y);

/// CDF rows with duplicate margins collapsed onto their largest fraction.
std::vector<CurvePoint> cumulative_curve_export(const MarginStats& stats);

/// `margin,fraction` CSV with 17 significant digits.
void write_curve_csv(std::ostream& out, std::span<const CurvePoint> rows);

struct LooBoundReport {
  double bound = 0.0;
  double h = 0.0;
  std::vector<std::size_t> interior;  // boundary_tol < a_i < C - boundary_tol
  std::vector<std::size_t> at_bound;  // a_i >= C - boundary_tol
};

/// (h * sum_{interior} a_i + |at_bound|) / m clipped to [0, 1], with
/// h = max h_diag. boundary_tol defaults to 1e-6 * c.
LooBoundReport loo_bound(std::span<const double> alpha, std::span<const double> h_diag, double c,
                         std::optional<double> boundary_tol = std::nullopt);

/// Fraction of instances misclassified by the model retrained without them.
/// The full Gram matrix is computed once and reduced per held-out instance.
double leave_one_out_error(const LabeledDataset& d, const KernelSpec& spec,
                           const KernelLdmParams& params, std::size_t cap = 200);

double accuracy(std::span<const int> predictions, std::span<const int> truth);

}  // namespace ldm

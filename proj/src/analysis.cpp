#include "ldm/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "ldm/error.hpp"

namespace ldm {

MarginStats compute_margins(std::span<const double> scores, std::span<const int> y) {
  if (scores.size() != y.size() || scores.empty()) {
    throw UsageError("margins need equally many scores and labels (at least one)");
  }
  const auto m = scores.size();
  const auto md = static_cast<double>(m);
  MarginStats s;
  s.margins.resize(m);
  for (std::size_t i = 0; i < m; ++i) s.margins[i] = y[i] * scores[i];

  double sum = 0.0;
  for (double g : s.margins) sum += g;
  s.mean = sum / md;
  // m sum g^2 - (sum g)^2 = m sum (g - mean)^2; the centered form avoids
  // cancellation when margins share a large offset.
  double centered = 0.0;
  for (double g : s.margins) centered += (g - s.mean) * (g - s.mean);
  s.variance = 2.0 * centered / md;
  s.minimum = *std::min_element(s.margins.begin(), s.margins.end());

  std::vector<double> sorted = s.margins;
  std::sort(sorted.begin(), sorted.end());
  s.cumulative.reserve(m);
  for (std::size_t k = 0; k < m; ++k) {
    s.cumulative.push_back({sorted[k], static_cast<double>(k + 1) / md});
  }
  return s;
}

std::vector<CurvePoint> cumulative_curve_export(const MarginStats& stats) {
  std::vector<CurvePoint> rows;
  for (const auto& p : stats.cumulative) {
    if (!rows.empty() && rows.back().margin == p.margin) {
      rows.back().fraction = p.fraction;
    } else {
      rows.push_back(p);
    }
  }
  return rows;
}

void write_curve_csv(std::ostream& out, std::span<const CurvePoint> rows) {
  out << "margin,fraction\n";
  for (const auto& r : rows) out << format_real(r.margin) << ',' << format_real(r.fraction) << '\n';
}

LooBoundReport loo_bound(std::span<const double> alpha, std::span<const double> h_diag, double c,
                         std::optional<double> boundary_tol) {
  if (alpha.size() != h_diag.size() || alpha.empty()) {
    throw UsageError("loo_bound needs equally many dual values and curvatures");
  }
  const double tol = boundary_tol.value_or(1e-6 * c);
  LooBoundReport r;
  r.h = *std::max_element(h_diag.begin(), h_diag.end());
  double interior_sum = 0.0;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    if (alpha[i] >= c - tol) {
      r.at_bound.push_back(i);
    } else if (alpha[i] > tol) {
      r.interior.push_back(i);
      interior_sum += alpha[i];
    }
  }
  const double raw = (r.h * interior_sum + static_cast<double>(r.at_bound.size())) /
                     static_cast<double>(alpha.size());
  r.bound = std::clamp(raw, 0.0, 1.0);
  return r;
}

double leave_one_out_error(const LabeledDataset& d, const KernelSpec& spec,
                           const KernelLdmParams& params, std::size_t cap) {
  d.validate();
  params.validate();
  spec.validate();
  if (d.size() > cap) {
    throw UsageError("leave-one-out retraining is limited to " + std::to_string(cap) +
                     " instances");
  }
  if (d.size() < 2) throw DataError("leave-one-out needs at least two instances");
  const Eigen::MatrixXd g = gram_matrix(spec, d);
  const auto m = d.size();
  std::size_t errors = 0;
  for (std::size_t out = 0; out < m; ++out) {
    std::vector<std::size_t> keep;
    keep.reserve(m - 1);
    for (std::size_t i = 0; i < m; ++i) {
      if (i != out) keep.push_back(i);
    }
    std::vector<Eigen::Index> rows(keep.begin(), keep.end());
    const Eigen::MatrixXd g_sub = g(rows, rows);
    const LabeledDataset sub = d.subset(keep);

    const QOperator q = assemble_q(g_sub, sub.labels, params.lambda1, params.ridge_scale);
    DualState state = init_state(q, g_sub, sub.labels, params);
    std::optional<LinearKernelView> view;
    if (spec.kind == KernelKind::linear) view = make_linear_view(sub.instances, sub.dimension, state);
    run_coordinate_descent(state, g_sub, sub.labels, params, view ? &*view : nullptr);

    double score = 0.0;
    for (std::size_t k = 0; k < keep.size(); ++k) {
      score += state.alpha(static_cast<Eigen::Index>(k)) *
               g(static_cast<Eigen::Index>(keep[k]), static_cast<Eigen::Index>(out));
    }
    const int predicted = score >= 0.0 ? 1 : -1;
    if (predicted != d.labels[out]) ++errors;
  }
  return static_cast<double>(errors) / static_cast<double>(m);
}

double accuracy(std::span<const int> predictions, std::span<const int> truth) {
  if (predictions.size() != truth.size()) {
    throw DataError("prediction count " + std::to_string(predictions.size()) +
                    " does not match label count " + std::to_string(truth.size()));
  }
  if (truth.empty()) throw DataError("accuracy of an empty prediction set");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += predictions[i] == truth[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

}  // namespace ldm

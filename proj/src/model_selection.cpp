#include "ldm/model_selection.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <ostream>
#include <tuple>

#include "ldm/analysis.hpp"
#include "ldm/error.hpp"

namespace ldm {

std::string to_string(SolverKind kind) { return kind == SolverKind::linear ? "linear" : "kernel"; }

SolverKind parse_solver_kind(const std::string& name) {
  if (name == "kernel") return SolverKind::kernel;
  if (name == "linear") return SolverKind::linear;
  throw UsageError("unknown solver '" + name + "' (expected kernel or linear)");
}

void SearchGrid::validate(KernelKind kernel) const {
  auto check = [](const std::vector<double>& v, const char* name, bool allow_zero) {
    if (v.empty()) throw UsageError(std::string(name) + " grid is empty");
    for (double x : v) {
      if (!std::isfinite(x) || x < 0.0 || (!allow_zero && x == 0.0)) {
        throw UsageError(std::string(name) + " grid values must be " +
                         (allow_zero ? "non-negative" : "positive"));
      }
    }
  };
  check(c_values, "C", false);
  check(lambda_values, "lambda", true);
  if (kernel == KernelKind::rbf) check(width_multipliers, "width", false);
}

bool tie_break_less(const GridPoint& a, const GridPoint& b) {
  return std::tie(a.c, a.lambda1, a.lambda2, a.width) <
         std::tie(b.c, b.lambda1, b.lambda2, b.width);
}

namespace {

bool folds_usable(const LabeledDataset& d, const FoldPlan& plan) {
  for (std::size_t f = 0; f < plan.k; ++f) {
    if (!d.subset(plan.complement(f)).has_both_classes()) return false;
  }
  return true;
}

std::vector<int> signs(const Eigen::VectorXd& scores) {
  std::vector<int> out(static_cast<std::size_t>(scores.size()));
  for (Eigen::Index i = 0; i < scores.size(); ++i) out[static_cast<std::size_t>(i)] = scores(i) >= 0.0 ? 1 : -1;
  return out;
}

}  // namespace

SearchResult cross_validate(const LabeledDataset& d, const SearchGrid& grid,
                            const CvOptions& options) {
  d.validate();
  grid.validate(options.kernel);
  if (options.solver == SolverKind::linear && options.kernel != KernelKind::linear) {
    throw UsageError("the linear solver supports only the linear kernel");
  }

  FoldPlan plan = make_folds(d.size(), options.folds, options.seed);
  if (!folds_usable(d, plan)) {
    plan = make_folds(d.size(), options.folds, options.seed ^ 0xD1B54A32D192ED03ULL);
    if (!folds_usable(d, plan)) {
      throw DataError("a cross-validation training fold contains a single class");
    }
  }

  const std::vector<double> widths = options.kernel == KernelKind::rbf
                                         ? grid.width_multipliers
                                         : std::vector<double>{0.0};
  std::map<std::tuple<double, double, double, double>, std::size_t> slot;
  std::vector<ConfigScore> scores;
  for (double c : grid.c_values) {
    for (double l1 : grid.lambda_values) {
      for (double l2 : grid.lambda_values) {
        for (double w : widths) {
          auto key = std::make_tuple(c, l1, l2, w);
          if (slot.count(key)) continue;
          slot.emplace(key, scores.size());
          scores.push_back({GridPoint{c, l1, l2, w}, 0.0, std::vector<double>(plan.k, 0.0)});
        }
      }
    }
  }

  SearchResult result;
  for (std::size_t f = 0; f < plan.k; ++f) {
    const auto train_rows = plan.complement(f);
    const auto val_rows = plan.members(f);
    LabeledDataset train_set = d.subset(train_rows);
    LabeledDataset val_set = d.subset(val_rows);
    if (options.normalize) {
      const auto map = fit_normalizer(train_set);
      if (options.on_fit) options.on_fit("normalizer", train_rows);
      train_set = apply_normalizer(map, train_set);
      val_set = apply_normalizer(map, val_set);
    }
    auto record = [&](const GridPoint& p, std::span<const int> predicted) {
      const double acc = accuracy(predicted, val_set.labels);
      scores[slot.at(std::make_tuple(p.c, p.lambda1, p.lambda2, p.width))].fold_accuracies[f] = acc;
      result.log.push_back({p, f, acc});
    };

    if (options.solver == SolverKind::linear) {
      for (const auto& cs : scores) {
        LinearLdmParams params = options.linear_params;
        params.c = cs.point.c;
        params.lambda1 = cs.point.lambda1;
        params.lambda2 = cs.point.lambda2;
        const auto fit = train(train_set, params);
        std::vector<int> predicted;
        predicted.reserve(val_set.size());
        for (const auto& x : val_set.instances) predicted.push_back(predict_linear(fit.model, x).label);
        record(cs.point, predicted);
      }
      continue;
    }

    double width_base = 0.0;
    if (options.kernel == KernelKind::rbf) {
      width_base = rbf_width_base(train_set, options.width_cap, options.seed);
      if (options.on_fit) options.on_fit("width", train_rows);
    }
    for (double mult : widths) {
      const KernelSpec spec = options.kernel == KernelKind::rbf ? KernelSpec::rbf(mult * width_base)
                                                                : KernelSpec::linear();
      const Eigen::MatrixXd g = gram_matrix(spec, train_set);
      const Eigen::MatrixXd k_val = cross_kernel(spec, val_set.instances, train_set.instances);
      for (double l1 : grid.lambda_values) {
        KernelLdmParams params = options.kernel_params;
        params.lambda1 = l1;
        const QOperator q = assemble_q(g, train_set.labels, l1, params.ridge_scale);
        DualState state = init_state(q, g, train_set.labels, params);
        std::optional<LinearKernelView> view;
        if (spec.kind == KernelKind::linear) {
          view = make_linear_view(train_set.instances, train_set.dimension, state);
        }
        for (double l2 : grid.lambda_values) {
          for (double c : grid.c_values) {
            params.lambda2 = l2;
            params.c = c;
            reset_dual(state, l2);
            run_coordinate_descent(state, g, train_set.labels, params, view ? &*view : nullptr);
            record(GridPoint{c, l1, l2, mult}, signs(k_val * state.alpha));
          }
        }
      }
    }
  }

  for (auto& cs : scores) {
    double sum = 0.0;
    for (double a : cs.fold_accuracies) sum += a;
    cs.mean_accuracy = sum / static_cast<double>(plan.k);
  }
  std::sort(scores.begin(), scores.end(),
            [](const ConfigScore& a, const ConfigScore& b) { return tie_break_less(a.point, b.point); });
  double best = -1.0;
  for (const auto& cs : scores) best = std::max(best, cs.mean_accuracy);
  for (const auto& cs : scores) {
    if (cs.mean_accuracy == best) result.tied.push_back(cs.point);
  }
  result.best = result.tied.front();
  result.best_accuracy = best;
  result.scores = std::move(scores);
  result.folds = std::move(plan);
  return result;
}

void write_cv_log(std::ostream& out, const SearchResult& result) {
  out << "c,lambda1,lambda2,width,fold,accuracy\n";
  for (const auto& r : result.log) {
    out << format_real(r.point.c) << ',' << format_real(r.point.lambda1) << ','
        << format_real(r.point.lambda2) << ',' << format_real(r.point.width) << ',' << r.fold << ','
        << format_real(r.accuracy) << '\n';
  }
}

}  // namespace ldm

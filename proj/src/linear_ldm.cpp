#include "ldm/linear_ldm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ldm/error.hpp"
#include "ldm/random.hpp"

namespace ldm {

namespace {

std::span<const double> view_of(const Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

void add_scaled(Eigen::VectorXd& dense, const SparseVector& x, double coef) {
  for (const auto& e : x.entries()) dense(e.index - 1) += coef * e.value;
}

void check_dimension(const Eigen::VectorXd& w, const LabeledDataset& d) {
  if (w.size() != d.dimension) {
    throw UsageError("weight vector has " + std::to_string(w.size()) +
                     " entries but the data has dimension " + std::to_string(d.dimension));
  }
}

// Coefficient of x_i in the stochastic gradient (everything except the w term).
double sample_coefficient(double s_i, double s_j, int y_i, int y_j, std::size_t m,
                          const LinearLdmParams& p) {
  double coef = 4.0 * p.lambda1 * s_i - 4.0 * p.lambda1 * y_i * y_j * s_j - p.lambda2 * y_i;
  if (y_i * s_i < 1.0) coef -= static_cast<double>(m) * p.c * y_i;
  return coef;
}

}  // namespace

void LinearLdmParams::validate() const {
  if (!(lambda1 >= 0.0) || !std::isfinite(lambda1)) throw UsageError("lambda1 must be >= 0");
  if (!(lambda2 >= 0.0) || !std::isfinite(lambda2)) throw UsageError("lambda2 must be >= 0");
  if (!(c > 0.0) || !std::isfinite(c)) throw UsageError("C must be > 0");
  if (epochs < 1) throw UsageError("epochs must be >= 1");
  if (eta0 && !(*eta0 > 0.0 && std::isfinite(*eta0))) throw UsageError("eta0 must be > 0");
  if (!eta0 && eta_grid.empty()) throw UsageError("eta grid must not be empty");
  for (double e : eta_grid) {
    if (!(e > 0.0)) throw UsageError("eta grid values must be > 0");
  }
}

double exact_objective(const Eigen::VectorXd& w, const LabeledDataset& d,
                       const LinearLdmParams& params) {
  check_dimension(w, d);
  const auto m = static_cast<double>(d.size());
  double sum_sq = 0.0, sum_ys = 0.0, hinge = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double s = dot(d.instances[i], view_of(w));
    const double ys = d.labels[i] * s;
    sum_sq += s * s;
    sum_ys += ys;
    hinge += std::max(0.0, 1.0 - ys);
  }
  return 0.5 * w.squaredNorm() + 2.0 * params.lambda1 / (m * m) * (m * sum_sq - sum_ys * sum_ys) -
         params.lambda2 / m * sum_ys + params.c * hinge;
}

Eigen::VectorXd exact_gradient(const Eigen::VectorXd& w, const LabeledDataset& d,
                               const LinearLdmParams& params) {
  check_dimension(w, d);
  const auto m = static_cast<double>(d.size());
  Eigen::VectorXd xs = Eigen::VectorXd::Zero(w.size());  // sum_i s_i x_i
  Eigen::VectorXd xy = Eigen::VectorXd::Zero(w.size());  // X y
  Eigen::VectorXd active = Eigen::VectorXd::Zero(w.size());
  double sum_ys = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double s = dot(d.instances[i], view_of(w));
    const int y = d.labels[i];
    add_scaled(xs, d.instances[i], s);
    add_scaled(xy, d.instances[i], y);
    if (y * s < 1.0) add_scaled(active, d.instances[i], y);
    sum_ys += y * s;
  }
  Eigen::VectorXd grad = w;
  grad += (4.0 * params.lambda1 / (m * m)) * (m * xs - sum_ys * xy);
  grad -= (params.lambda2 / m) * xy;
  grad -= params.c * active;
  return grad;
}

Eigen::VectorXd stochastic_gradient(const Eigen::VectorXd& w, std::size_t i, std::size_t j,
                                    const LabeledDataset& d, const LinearLdmParams& params) {
  check_dimension(w, d);
  if (i >= d.size() || j >= d.size()) throw UsageError("sample index out of range");
  const double s_i = dot(d.instances[i], view_of(w));
  const double s_j = dot(d.instances[j], view_of(w));
  Eigen::VectorXd grad = w;
  add_scaled(grad, d.instances[i],
             sample_coefficient(s_i, s_j, d.labels[i], d.labels[j], d.size(), params));
  return grad;
}

double step_size(StepSchedule schedule, double eta0, std::int64_t t, std::size_t t0) {
  if (schedule == StepSchedule::constant) return eta0;
  return eta0 / std::pow(1.0 + static_cast<double>(t) / static_cast<double>(t0), 0.75);
}

namespace {

LinearLdmFit run_asgd(const LabeledDataset& d, const LinearLdmParams& params, double eta0,
                      bool record_trace, const IterateObserver& observer) {
  const std::size_t m = d.size();
  const std::size_t t0 = params.t0 ? params.t0 : m;
  const auto steps = static_cast<std::int64_t>(params.epochs) * static_cast<std::int64_t>(m);

  LinearLdmFit fit;
  auto& model = fit.model;
  model.params = params;
  model.params.eta0 = eta0;
  model.w = Eigen::VectorXd::Zero(d.dimension);
  model.w_bar = Eigen::VectorXd::Zero(d.dimension);
  fit.report.eta0 = eta0;

  Rng rng(params.seed);
  for (std::int64_t t = 1; t <= steps; ++t) {
    const std::size_t i = rng.below(m);
    const std::size_t j = rng.below(m);
    const auto& xi = d.instances[i];
    const double s_i = dot(xi, view_of(model.w));
    const double s_j = dot(d.instances[j], view_of(model.w));
    const double coef = sample_coefficient(s_i, s_j, d.labels[i], d.labels[j], m, params);
    const double eta = step_size(params.schedule, eta0, t, t0);

    // w <- w - eta * (w + coef x_i), evaluated per coordinate exactly as the
    // dense stochastic gradient would be.
    auto entries = xi.entries();
    std::size_t next = 0;
    for (Eigen::Index k = 0; k < model.w.size(); ++k) {
      double g = model.w(k);
      if (next < entries.size() && entries[next].index - 1 == k) {
        g += coef * entries[next].value;
        ++next;
      }
      model.w(k) -= eta * g;
    }

    const double mu = 1.0 / static_cast<double>(std::max<std::int64_t>(1, t - static_cast<std::int64_t>(t0)));
    model.w_bar += mu * (model.w - model.w_bar);
    model.t = t;
    if (observer) observer(t, model.w, model.w_bar);

    if (record_trace && t % static_cast<std::int64_t>(m) == 0) {
      const double obj = exact_objective(model.w_bar, d, params);
      if (!std::isfinite(obj)) throw SolverError("averaged SGD diverged (non-finite objective)");
      fit.report.objective_trace.push_back(obj);
      fit.report.epochs = static_cast<int>(t / static_cast<std::int64_t>(m));
    }
  }
  if (!model.w_bar.allFinite()) throw SolverError("averaged SGD produced non-finite weights");
  fit.report.iterations = steps;
  fit.report.converged = true;
  return fit;
}

}  // namespace

double calibrate_eta0(const LabeledDataset& d, const LinearLdmParams& params) {
  params.validate();
  LabeledDataset sample;
  if (d.size() > params.calibration_size && params.calibration_size >= 2) {
    Rng rng(params.seed ^ 0x9E3779B97F4A7C15ULL);
    auto perm = random_permutation(d.size(), rng);
    perm.resize(params.calibration_size);
    std::sort(perm.begin(), perm.end());
    sample = d.subset(perm);
    if (!sample.has_both_classes()) sample = d;
  } else {
    sample = d;
  }
  LinearLdmParams trial = params;
  trial.epochs = 1;
  trial.t0 = 0;

  double best_eta = 0.0;
  double best_obj = std::numeric_limits<double>::infinity();
  for (double eta : params.eta_grid) {
    double obj = std::numeric_limits<double>::infinity();
    try {
      auto fit = run_asgd(sample, trial, eta, false, {});
      obj = exact_objective(fit.model.w_bar, sample, trial);
    } catch (const SolverError&) {
      continue;
    }
    if (std::isfinite(obj) && obj < best_obj) {
      best_obj = obj;
      best_eta = eta;
    }
  }
  if (!(best_eta > 0.0)) throw SolverError("step-size calibration diverged for every grid value");
  return best_eta;
}

LinearLdmFit train(const LabeledDataset& d, const LinearLdmParams& params,
                   const IterateObserver& observer) {
  d.validate();
  params.validate();
  if (!d.has_both_classes()) throw DataError("training data must contain both classes");
  const double eta0 = params.eta0 ? *params.eta0 : calibrate_eta0(d, params);
  return run_asgd(d, params, eta0, true, observer);
}

Prediction predict_linear(const LinearModel& model, const SparseVector& z) {
  const SparseVector x = model.normalizer ? apply_normalizer(*model.normalizer, z) : z;
  const double score = dot(x, view_of(model.w_bar));
  return {score >= 0.0 ? 1 : -1, score};
}

}  // namespace ldm

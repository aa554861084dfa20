#include "ldm/kernel_ldm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "ldm/analysis.hpp"
#include "ldm/error.hpp"
#include "ldm/random.hpp"

namespace ldm {

namespace {

Eigen::VectorXd label_vector(std::span<const int> y) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(y.size()));
  for (std::size_t i = 0; i < y.size(); ++i) v(static_cast<Eigen::Index>(i)) = y[i];
  return v;
}

void check_shapes(const Eigen::MatrixXd& g, std::span<const int> y) {
  if (g.rows() != g.cols() || g.rows() != static_cast<Eigen::Index>(y.size()) || y.empty()) {
    throw UsageError("Gram matrix and label vector sizes disagree");
  }
}

bool all_finite(const Eigen::MatrixXd& m) { return m.allFinite(); }

}  // namespace

void KernelLdmParams::validate() const {
  if (!(lambda1 >= 0.0) || !std::isfinite(lambda1)) throw UsageError("lambda1 must be >= 0");
  if (!(lambda2 >= 0.0) || !std::isfinite(lambda2)) throw UsageError("lambda2 must be >= 0");
  if (!(c > 0.0) || !std::isfinite(c)) throw UsageError("C must be > 0");
  if (!(tolerance > 0.0)) throw UsageError("tolerance must be > 0");
  if (max_epochs < 1) throw UsageError("max_epochs must be >= 1");
  if (!(ridge_scale >= 0.0)) throw UsageError("ridge_scale must be >= 0");
}

QOperator::QOperator(Eigen::MatrixXd q, double ridge) : q_(std::move(q)), ridge_(ridge) {
  llt_.compute(q_);
  if (llt_.info() != Eigen::Success || !all_finite(llt_.matrixLLT())) {
    throw SolverError("Q is not positive definite (ridge " + format_real(ridge_) +
                      "); increase ridge_scale");
  }
}

QOperator assemble_q(const Eigen::MatrixXd& g, std::span<const int> y, double lambda1,
                     double ridge_scale) {
  check_shapes(g, y);
  const auto m = static_cast<double>(g.rows());
  Eigen::MatrixXd q = g;
  if (lambda1 != 0.0) {
    const Eigen::VectorXd gy = g * label_vector(y);
    Eigen::MatrixXd pair = m * (g * g);
    pair.noalias() -= gy * gy.transpose();
    q += (4.0 * lambda1 / (m * m)) * pair;
  }
  q = 0.5 * (q + q.transpose()).eval();
  const double ridge = ridge_scale * q.trace() / m;
  q.diagonal().array() += ridge;
  return QOperator(std::move(q), ridge);
}

DualState init_state(const QOperator& q, const Eigen::MatrixXd& g, std::span<const int> y,
                     const KernelLdmParams& params) {
  check_shapes(g, y);
  if (q.size() != g.rows()) throw UsageError("Q and Gram matrix sizes disagree");
  const Eigen::Index m = g.rows();
  Eigen::MatrixXd gy = g;
  for (Eigen::Index j = 0; j < m; ++j) gy.col(j) *= y[static_cast<std::size_t>(j)];

  DualState s;
  s.a_matrix = q.solve(gy);
  s.h_diag.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) s.h_diag(i) = gy.col(i).dot(s.a_matrix.col(i));
  if (!all_finite(s.a_matrix) || !s.h_diag.allFinite()) {
    throw SolverError("non-finite values while forming Q^-1 G Y; increase ridge_scale");
  }
  reset_dual(s, params.lambda2);
  return s;
}

void reset_dual(DualState& state, double lambda2) {
  const Eigen::Index m = state.a_matrix.cols();
  state.beta = Eigen::VectorXd::Zero(m);
  state.alpha = recover_alpha(state, lambda2);
}

Eigen::VectorXd recover_alpha(const DualState& state, double lambda2) {
  const Eigen::Index m = state.a_matrix.cols();
  Eigen::VectorXd coef = Eigen::VectorXd::Constant(m, lambda2 / static_cast<double>(m));
  if (state.beta.size() == m) coef += state.beta;
  return state.a_matrix * coef;
}

double clipped_newton_update(double beta, double gradient, double h, double c) {
  return std::min(std::max(beta - gradient / h, 0.0), c);
}

double projected_gradient(double beta, double gradient, double c) {
  if (beta <= 0.0) return std::min(gradient, 0.0);
  if (beta >= c) return std::max(gradient, 0.0);
  return gradient;
}

double coordinate_gradient(const DualState& state, Eigen::Index i, const Eigen::MatrixXd& g,
                           std::span<const int> y) {
  return y[static_cast<std::size_t>(i)] * g.col(i).dot(state.alpha) - 1.0;
}

double coordinate_step(DualState& state, Eigen::Index i, const Eigen::MatrixXd& g,
                       std::span<const int> y, double c) {
  const double h = state.h_diag(i);
  if (h <= kMinCurvature) return 0.0;
  const double grad = coordinate_gradient(state, i, g, y);
  const double old = state.beta(i);
  const double updated = clipped_newton_update(old, grad, h, c);
  const double delta = updated - old;
  if (delta != 0.0) {
    state.beta(i) = updated;
    state.alpha.noalias() += delta * state.a_matrix.col(i);
  }
  return std::abs(delta);
}

Eigen::MatrixXd dual_hessian(const Eigen::MatrixXd& g, std::span<const int> y, const QOperator& q,
                             std::size_t cap) {
  check_shapes(g, y);
  if (static_cast<std::size_t>(g.rows()) > cap) {
    throw UsageError("dense dual objective needs m <= " + std::to_string(cap) +
                     "; disable objective diagnostics for larger problems");
  }
  Eigen::MatrixXd gy = g;
  for (Eigen::Index j = 0; j < g.rows(); ++j) gy.col(j) *= y[static_cast<std::size_t>(j)];
  Eigen::MatrixXd h = gy.transpose() * q.solve(gy);
  return 0.5 * (h + h.transpose());
}

double dual_objective(const Eigen::VectorXd& beta, const Eigen::MatrixXd& h, double lambda2) {
  const auto m = static_cast<double>(beta.size());
  const Eigen::VectorXd he = h.rowwise().sum();
  return 0.5 * beta.dot(h * beta) + ((lambda2 / m) * he).dot(beta) - beta.sum();
}

double dual_objective(const DualState& state, const Eigen::MatrixXd& g, std::span<const int> y,
                      const QOperator& q, double lambda2, std::size_t cap) {
  return dual_objective(state.beta, dual_hessian(g, y, q, cap), lambda2);
}

LinearKernelView make_linear_view(std::span<const SparseVector> instances, int dimension,
                                  const DualState& state) {
  const Eigen::Index m = state.a_matrix.rows();
  if (static_cast<Eigen::Index>(instances.size()) != m) {
    throw UsageError("linear view: instance count does not match the dual state");
  }
  LinearKernelView view;
  view.instances = instances;
  view.dimension = dimension;
  // X A = sum_k x_k (row k of A)
  view.feature_a = Eigen::MatrixXd::Zero(dimension, state.a_matrix.cols());
  for (Eigen::Index k = 0; k < m; ++k) {
    for (const auto& e : instances[static_cast<std::size_t>(k)].entries()) {
      view.feature_a.row(e.index - 1) += e.value * state.a_matrix.row(k);
    }
  }
  return view;
}

namespace {

// Evaluates u = Y G alpha either through the Gram matrix or through w = X alpha.
class MarginOracle {
 public:
  MarginOracle(const Eigen::MatrixXd& g, std::span<const int> y, const LinearKernelView* view)
      : g_(g), y_(y), view_(view) {}

  void sync(const DualState& s) {
    if (!view_) return;
    w_ = Eigen::VectorXd::Zero(view_->dimension);
    for (Eigen::Index k = 0; k < s.alpha.size(); ++k) {
      for (const auto& e : view_->instances[static_cast<std::size_t>(k)].entries()) {
        w_(e.index - 1) += s.alpha(k) * e.value;
      }
    }
  }

  double margin(const DualState& s, Eigen::Index i) const {
    const double yi = y_[static_cast<std::size_t>(i)];
    if (!view_) return yi * g_.col(i).dot(s.alpha);
    return yi * dot(view_->instances[static_cast<std::size_t>(i)],
                    std::span<const double>(w_.data(), static_cast<std::size_t>(w_.size())));
  }

  // With a view only w is kept current; alpha is recovered after the sweeps.
  void move(DualState& s, Eigen::Index i, double delta) {
    if (view_) {
      w_.noalias() += delta * view_->feature_a.col(i);
    } else {
      s.alpha.noalias() += delta * s.a_matrix.col(i);
    }
  }

  Eigen::VectorXd margins(const DualState& s) const {
    Eigen::VectorXd u(s.alpha.size());
    if (!view_) {
      u.noalias() = g_ * s.alpha;
      for (Eigen::Index i = 0; i < u.size(); ++i) u(i) *= y_[static_cast<std::size_t>(i)];
    } else {
      for (Eigen::Index i = 0; i < u.size(); ++i) u(i) = margin(s, i);
    }
    return u;
  }

  // H e = Y G A e
  Eigen::VectorXd h_times_ones(const DualState& s) const {
    const Eigen::VectorXd ae = s.a_matrix.rowwise().sum();
    Eigen::VectorXd he(ae.size());
    if (!view_) {
      he.noalias() = g_ * ae;
    } else {
      const Eigen::VectorXd xae = view_->feature_a.rowwise().sum();
      for (Eigen::Index i = 0; i < he.size(); ++i) {
        he(i) = dot(view_->instances[static_cast<std::size_t>(i)],
                    std::span<const double>(xae.data(), static_cast<std::size_t>(xae.size())));
      }
    }
    for (Eigen::Index i = 0; i < he.size(); ++i) he(i) *= y_[static_cast<std::size_t>(i)];
    return he;
  }

 private:
  const Eigen::MatrixXd& g_;
  std::span<const int> y_;
  const LinearKernelView* view_;
  Eigen::VectorXd w_;
};

double epoch_violation(const DualState& s, const Eigen::VectorXd& u, double c) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    if (s.h_diag(i) <= kMinCurvature) continue;
    worst = std::max(worst, std::abs(projected_gradient(s.beta(i), u(i) - 1.0, c)));
  }
  return worst;
}

}  // namespace

double max_kkt_violation(const DualState& state, const Eigen::MatrixXd& g, std::span<const int> y,
                         double c) {
  MarginOracle oracle(g, y, nullptr);
  return epoch_violation(state, oracle.margins(state), c);
}

SolverReport run_coordinate_descent(DualState& state, const Eigen::MatrixXd& g,
                                    std::span<const int> y, const KernelLdmParams& params,
                                    const LinearKernelView* view) {
  params.validate();
  check_shapes(g, y);
  const Eigen::Index m = g.rows();
  const double c = params.c;
  const double mean_weight = params.lambda2 / static_cast<double>(m);

  MarginOracle oracle(g, y, view);
  oracle.sync(state);
  const Eigen::VectorXd he = oracle.h_times_ones(state);

  Rng rng(params.seed);
  std::vector<std::size_t> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), std::size_t{0});

  SolverReport report;
  for (int epoch = 1; epoch <= params.max_epochs; ++epoch) {
    if (params.shuffle) order = random_permutation(order.size(), rng);
    for (std::size_t idx : order) {
      const auto i = static_cast<Eigen::Index>(idx);
      ++report.iterations;
      const double h = state.h_diag(i);
      if (h <= kMinCurvature) continue;
      const double grad = oracle.margin(state, i) - 1.0;
      const double old = state.beta(i);
      const double updated = clipped_newton_update(old, grad, h, c);
      if (updated != old) {
        state.beta(i) = updated;
        oracle.move(state, i, updated - old);
      }
    }

    // f(beta) = 1/2 beta'(u + lambda2/m H e) - e'beta with u = Y G alpha.
    const Eigen::VectorXd u = oracle.margins(state);
    const double objective = 0.5 * state.beta.dot(u + mean_weight * he) - state.beta.sum();
    if (!std::isfinite(objective)) {
      throw SolverError("dual coordinate descent diverged (non-finite objective)");
    }
    report.objective_trace.push_back(objective);
    report.epochs = epoch;
    report.final_violation = epoch_violation(state, u, c);
    if (report.final_violation < params.tolerance) {
      report.converged = true;
      break;
    }
  }
  state.alpha = recover_alpha(state, params.lambda2);
  return report;
}

KernelLdmFit solve(const LabeledDataset& d, const KernelSpec& spec, const KernelLdmParams& params) {
  d.validate();
  params.validate();
  spec.validate();
  if (!d.has_both_classes()) throw DataError("training data must contain both classes");
  if (d.size() > params.max_instances) {
    throw UsageError("kernel solver is limited to " + std::to_string(params.max_instances) +
                     " instances; use the linear solver for larger data");
  }
  const Eigen::MatrixXd g = gram_matrix(spec, d);
  const QOperator q = assemble_q(g, d.labels, params.lambda1, params.ridge_scale);

  KernelLdmFit fit;
  fit.state = init_state(q, g, d.labels, params);
  std::optional<LinearKernelView> view;
  if (spec.kind == KernelKind::linear) {
    view = make_linear_view(d.instances, d.dimension, fit.state);
  }
  fit.report = run_coordinate_descent(fit.state, g, d.labels, params, view ? &*view : nullptr);

  const auto& beta = fit.state.beta;
  const auto& h = fit.state.h_diag;
  fit.report.loo_bound =
      loo_bound(std::span<const double>(beta.data(), static_cast<std::size_t>(beta.size())),
                std::span<const double>(h.data(), static_cast<std::size_t>(h.size())), params.c)
          .bound;

  fit.model.alpha = fit.state.alpha;
  fit.model.support = d.instances;
  fit.model.kernel = spec;
  fit.model.params = params;
  return fit;
}

Prediction predict(const KernelLdmModel& model, const SparseVector& z) {
  const SparseVector x = model.normalizer ? apply_normalizer(*model.normalizer, z) : z;
  double score = 0.0;
  for (std::size_t i = 0; i < model.support.size(); ++i) {
    score += model.alpha(static_cast<Eigen::Index>(i)) * kernel_eval(model.kernel, model.support[i], x);
  }
  return {score >= 0.0 ? 1 : -1, score};
}

}  // namespace ldm

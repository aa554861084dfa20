#pragma once

// Kernel LDM trained by dual coordinate descent.
//
// Primal (representer form, w = X alpha):
//   min 1/2 a'Qa + p'a + C sum xi   s.t. y_i (G a)_i >= 1 - xi_i, xi >= 0
//   Q = 4 lambda1 (m G'G - (Gy)(Gy)') / m^2 + G,   p = -lambda2 G y / m
// Dual over beta in [0, C]^m:
//   f(beta) = 1/2 beta'H beta + (lambda2/m H e - e)'beta,   H = Y G Q^-1 G Y
// and alpha = Q^-1 G Y (lambda2/m e + beta).

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "ldm/data.hpp"
#include "ldm/kernel.hpp"
#include "ldm/report.hpp"

namespace ldm {

struct KernelLdmParams {
  double lambda1 = 0.0;  // margin-variance weight
  double lambda2 = 0.0;  // margin-mean weight
  double c = 1.0;
  double tolerance = 1e-3;
  int max_epochs = 1000;
  double ridge_scale = 1e-10;
  bool shuffle = true;
  std::uint64_t seed = 0;
  std::size_t max_instances = 10000;

  void validate() const;
};

/// Coordinates whose curvature h_ii does not exceed this are never updated.
inline constexpr double kMinCurvature = 1e-12;

/// Dense-H diagnostics are refused above this many instances by default.
inline constexpr std::size_t kDiagnosticCap = 2000;

/// Cholesky-factorized Q + ridge I.
class QOperator {
 public:
  /// Factorizes `q` (which already includes the ridge). Throws SolverError
  /// when `q` is not numerically positive definite.
  QOperator(Eigen::MatrixXd q, double ridge);

  const Eigen::MatrixXd& matrix() const { return q_; }
  double ridge() const { return ridge_; }
  Eigen::Index size() const { return q_.rows(); }

  Eigen::VectorXd solve(const Eigen::VectorXd& v) const { return llt_.solve(v); }
  Eigen::MatrixXd solve(const Eigen::MatrixXd& v) const { return llt_.solve(v); }

 private:
  Eigen::MatrixXd q_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  double ridge_;
};

/// Q = 4 lambda1 (m G'G - (Gy)(Gy)') / m^2 + G + ridge I with
/// ridge = ridge_scale * trace(Q) / m.
QOperator assemble_q(const Eigen::MatrixXd& g, std::span<const int> y, double lambda1,
                     double ridge_scale);

struct DualState {
  Eigen::VectorXd beta;
  Eigen::VectorXd alpha;
  Eigen::MatrixXd a_matrix;  // A = Q^-1 G Y
  Eigen::VectorXd h_diag;    // h_ii = (G Y e_i)'(A e_i)
};

/// beta = 0, alpha = lambda2/m Q^-1 G y, A and h as above.
DualState init_state(const QOperator& q, const Eigen::MatrixXd& g, std::span<const int> y,
                     const KernelLdmParams& params);

/// Restarts the dual variables for a new lambda2 while keeping A and h.
void reset_dual(DualState& state, double lambda2);

/// alpha = A (lambda2/m e + beta).
Eigen::VectorXd recover_alpha(const DualState& state, double lambda2);

/// min(max(beta - gradient / h, 0), c).
double clipped_newton_update(double beta, double gradient, double h, double c);

/// Gradient component zero at a box-constrained optimum.
double projected_gradient(double beta, double gradient, double c);

/// [grad f(beta)]_i = y_i (G alpha)_i - 1 from the maintained alpha.
double coordinate_gradient(const DualState& state, Eigen::Index i, const Eigen::MatrixXd& g,
                           std::span<const int> y);

/// One exact coordinate minimization on beta_i; alpha follows the change.
/// Returns |delta beta_i| (0 for coordinates with h_ii <= kMinCurvature).
double coordinate_step(DualState& state, Eigen::Index i, const Eigen::MatrixXd& g,
                       std::span<const int> y, double c);

/// Dense H = (G Y)' Q^-1 (G Y). Throws UsageError above `cap` instances.
Eigen::MatrixXd dual_hessian(const Eigen::MatrixXd& g, std::span<const int> y,
                             const QOperator& q, std::size_t cap = kDiagnosticCap);

double dual_objective(const Eigen::VectorXd& beta, const Eigen::MatrixXd& h, double lambda2);

double dual_objective(const DualState& state, const Eigen::MatrixXd& g, std::span<const int> y,
                      const QOperator& q, double lambda2, std::size_t cap = kDiagnosticCap);

/// Linear-kernel shortcut: with G = X'X the products G alpha can be carried
/// as w = X alpha, so a coordinate gradient costs O(nnz(x_i)) instead of O(m).
struct LinearKernelView {
  std::span<const SparseVector> instances;
  int dimension = 0;
  Eigen::MatrixXd feature_a;  // X A, dimension x m
};

LinearKernelView make_linear_view(std::span<const SparseVector> instances, int dimension,
                                  const DualState& state);

/// Sweeps coordinates until the projected-gradient violation at an epoch
/// boundary drops below params.tolerance or params.max_epochs is reached.
/// On return alpha equals the closed form recovered from beta.
SolverReport run_coordinate_descent(DualState& state, const Eigen::MatrixXd& g,
                                    std::span<const int> y, const KernelLdmParams& params,
                                    const LinearKernelView* view = nullptr);

/// Largest projected-gradient violation of the current state (O(m^2)).
double max_kkt_violation(const DualState& state, const Eigen::MatrixXd& g,
                         std::span<const int> y, double c);

struct KernelLdmModel {
  Eigen::VectorXd alpha;
  std::vector<SparseVector> support;
  KernelSpec kernel;
  std::optional<NormalizationMap> normalizer;
  KernelLdmParams params;
};

struct KernelLdmFit {
  KernelLdmModel model;
  SolverReport report;
  DualState state;
};

/// Trains on `d` as given (no normalization is applied here).
KernelLdmFit solve(const LabeledDataset& d, const KernelSpec& spec,
                   const KernelLdmParams& params);

/// score = sum_i alpha_i k(x_i, z) on the normalized z; score >= 0 -> +1.
Prediction predict(const KernelLdmModel& model, const SparseVector& z);

}  // namespace ldm

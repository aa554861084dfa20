#pragma once

// Linear LDM trained by averaged stochastic gradient descent.
//
//   g(w) = 1/2 w'w + 2 lambda1/m^2 w'(m X X' - X y y'X')w - lambda2/m (Xy)'w
//          + C sum_i max(0, 1 - y_i w'x_i)
//
// Each step samples two instances (i, j) independently and uniformly; the
// resulting stochastic gradient is an unbiased estimate of grad g(w).

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "ldm/data.hpp"
#include "ldm/report.hpp"

namespace ldm {

enum class StepSchedule {
  decaying,  // eta_t = eta0 / (1 + t / t0)^0.75
  constant,  // eta_t = eta0
};

struct LinearLdmParams {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double c = 1.0;
  int epochs = 5;                // T: the run makes T * m steps
  std::optional<double> eta0;    // calibrated on a subsample when absent
  std::size_t t0 = 0;            // averaging start and decay scale; 0 means m
  StepSchedule schedule = StepSchedule::decaying;
  std::uint64_t seed = 0;
  std::vector<double> eta_grid = {1e-3, 1e-2, 1e-1, 1.0, 10.0};
  std::size_t calibration_size = 1000;

  void validate() const;
};

struct LinearModel {
  Eigen::VectorXd w;      // last iterate
  Eigen::VectorXd w_bar;  // running average, the reported predictor
  std::int64_t t = 0;
  std::optional<NormalizationMap> normalizer;
  LinearLdmParams params;
};

double exact_objective(const Eigen::VectorXd& w, const LabeledDataset& d,
                       const LinearLdmParams& params);

/// Q w + p - C sum_{i in I} y_i x_i with I = {i : y_i w'x_i < 1}.
Eigen::VectorXd exact_gradient(const Eigen::VectorXd& w, const LabeledDataset& d,
                               const LinearLdmParams& params);

/// 4 l1 x_i x_i'w - 4 l1 y_i x_i y_j x_j'w + w - l2 y_i x_i - m C [i in I] y_i x_i
Eigen::VectorXd stochastic_gradient(const Eigen::VectorXd& w, std::size_t i, std::size_t j,
                                    const LabeledDataset& d, const LinearLdmParams& params);

/// Step size at iteration t (1-based).
double step_size(StepSchedule schedule, double eta0, std::int64_t t, std::size_t t0);

/// Called after every step with the step index and the updated iterates.
using IterateObserver =
    std::function<void(std::int64_t t, const Eigen::VectorXd& w, const Eigen::VectorXd& w_bar)>;

struct LinearLdmFit {
  LinearModel model;
  SolverReport report;
};

/// Trains on `d` as given (no normalization is applied here). The report's
/// trace holds g(w_bar) at the end of each epoch.
LinearLdmFit train(const LabeledDataset& d, const LinearLdmParams& params,
                   const IterateObserver& observer = {});

/// Runs one epoch per grid value on a seeded subsample and returns the value
/// whose averaged iterate attains the smallest objective there.
double calibrate_eta0(const LabeledDataset& d, const LinearLdmParams& params);

/// score = w_bar'z on the normalized z; score >= 0 -> +1.
Prediction predict_linear(const LinearModel& model, const SparseVector& z);

}  // namespace ldm

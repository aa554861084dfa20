#include <doctest.h>

#include <cmath>
#include <random>

#include "ldm/error.hpp"
#include "ldm/kernel_ldm.hpp"
#include "ldm/linear_ldm.hpp"
#include "oracles.hpp"

using namespace ldm;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

VectorXd random_w(std::mt19937_64& gen, int d, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  VectorXd w(d);
  for (int k = 0; k < d; ++k) w(k) = normal(gen);
  return w;
}

LinearLdmParams params_of(double l1, double l2, double c) {
  LinearLdmParams p;
  p.lambda1 = l1;
  p.lambda2 = l2;
  p.c = c;
  return p;
}

}  // namespace

TEST_CASE("exact objective hand cases") {
  std::mt19937_64 gen(1);
  auto d = oracle::random_dataset(gen, 12, 3);
  auto p = params_of(0.3, 0.2, 1.5);
  CHECK(exact_objective(VectorXd::Zero(3), d, p) == doctest::Approx(1.5 * 12));

  auto sep = make_dataset({SparseVector({{1, 2.0}}), SparseVector({{1, -3.0}})}, {1, -1});
  VectorXd w(1);
  w << 1.0;
  CHECK(exact_objective(w, sep, params_of(0, 0, 1)) == doctest::Approx(0.5));
}

TEST_CASE("exact objective matches a dense evaluation") {
  std::mt19937_64 gen(2);
  for (int t = 0; t < 10; ++t) {
    auto d = oracle::random_dataset(gen, 15, 4, 1.0, 0.1);
    auto p = params_of(0.1 * t, 0.05 * t, 0.5 + t);
    VectorXd w = random_w(gen, 4);
    const double ref = oracle::linear_primal(w, oracle::dense(d), oracle::labels(d), p.lambda1,
                                             p.lambda2, p.c);
    CHECK(exact_objective(w, d, p) == doctest::Approx(ref).epsilon(1e-12));
  }
}

TEST_CASE("exact gradient hand cases") {
  auto sep = make_dataset({SparseVector({{1, 2.0}}), SparseVector({{1, -3.0}, {2, 1.0}})}, {1, -1});
  VectorXd w(2);
  w << 1.0, 0.5;
  CHECK(exact_gradient(w, sep, params_of(0, 0, 1)).isApprox(w));

  std::mt19937_64 gen(3);
  auto d = oracle::random_dataset(gen, 10, 3);
  auto p = params_of(0.4, 0.3, 2.0);
  const MatrixXd x = oracle::dense(d);
  const VectorXd y = oracle::labels(d);
  const VectorXd expected = -(p.lambda2 / 10.0) * x * y - p.c * x * y;
  CHECK((exact_gradient(VectorXd::Zero(3), d, p) - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("exact gradient matches central finite differences") {
  std::mt19937_64 gen(4);
  int checked = 0;
  while (checked < 20) {
    auto d = oracle::random_dataset(gen, 12, 3, 1.0, 0.2);
    auto p = params_of(0.25, 0.5, 1.0);
    VectorXd w = random_w(gen, 3, 0.7);
    const double h = 1e-6;
    // Skip points within a step of a hinge kink.
    bool near_kink = false;
    const VectorXd s = oracle::dense(d).transpose() * w;
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (std::abs(1.0 - d.labels[i] * s(static_cast<Eigen::Index>(i))) < 1e-3) near_kink = true;
    }
    if (near_kink) continue;
    auto f = [&](const VectorXd& v) { return exact_objective(v, d, p); };
    const VectorXd g = exact_gradient(w, d, p);
    for (Eigen::Index k = 0; k < 3; ++k) {
      const double fd = oracle::central_difference(f, w, k, h);
      CHECK(std::abs(fd - g(k)) <= 1e-5 * std::max(1.0, std::abs(g(k))));
    }
    ++checked;
  }
}

TEST_CASE("stochastic gradient hand cases") {
  auto d = make_dataset({SparseVector({{1, 2.0}}), SparseVector({{1, -3.0}, {2, 1.0}})}, {1, -1});
  VectorXd w(2);
  w << 1.0, 0.5;
  CHECK(stochastic_gradient(w, 0, 1, d, params_of(0, 0, 1)).isApprox(w));

  auto p = params_of(0.3, 0.7, 2.0);
  VectorXd g = stochastic_gradient(VectorXd::Zero(2), 1, 0, d, p);
  // -lambda2 y_i x_i - m C y_i x_i with y_i = -1, x_i = (-3, 1)
  VectorXd expected(2);
  expected << -(0.7 + 2 * 2.0) * 3.0, (0.7 + 2 * 2.0) * 1.0;
  CHECK((g - expected).cwiseAbs().maxCoeff() < 1e-12);
  CHECK_THROWS_AS(stochastic_gradient(w, 2, 0, d, p), UsageError);
}

TEST_CASE("stochastic gradient is unbiased over all ordered pairs") {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int t = 0; t < 10; ++t) {
    const std::size_t m = 5 + 2 * static_cast<std::size_t>(t);
    auto d = oracle::random_dataset(gen, m, 3, 1.0, 0.2);
    auto p = params_of(unit(gen), unit(gen), 0.1 + 2 * unit(gen));
    VectorXd w = random_w(gen, 3);
    VectorXd mean = VectorXd::Zero(3);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < m; ++j) mean += stochastic_gradient(w, i, j, d, p);
    }
    mean /= static_cast<double>(m * m);
    CHECK((mean - exact_gradient(w, d, p)).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("step size schedules") {
  CHECK(step_size(StepSchedule::constant, 0.5, 100, 10) == 0.5);
  CHECK(step_size(StepSchedule::decaying, 0.5, 10, 10) == doctest::Approx(0.5 / std::pow(2.0, 0.75)));
  CHECK(step_size(StepSchedule::decaying, 2.0, 0, 7) == 2.0);
}

TEST_CASE("first training step equals the closed-form subgradient step") {
  SparseVector x({{1, 0.5}, {2, -1.0}});
  SparseVector neg({{1, -0.5}, {2, 1.0}});
  auto d = make_dataset({x, neg}, {1, -1});
  auto p = params_of(0, 0, 1.5);
  p.schedule = StepSchedule::constant;
  p.eta0 = 0.01;
  p.epochs = 1;
  VectorXd first;
  train(d, p, [&](std::int64_t t, const VectorXd& w, const VectorXd&) {
    if (t == 1) first = w;
  });
  // Both instances give y_i x_i = (0.5, -1), so any draw yields eta m C y x.
  VectorXd expected(2);
  expected << 0.01 * 2 * 1.5 * 0.5, 0.01 * 2 * 1.5 * -1.0;
  CHECK((first - expected).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("averaged iterate is the running mean after t0") {
  std::mt19937_64 gen(6);
  auto d = oracle::random_dataset(gen, 20, 3, 1.0, 0.1);
  auto p = params_of(0.1, 0.1, 1.0);
  p.eta0 = 1e-3;
  p.t0 = 5;
  p.epochs = 2;
  VectorXd sum = VectorXd::Zero(3);
  std::int64_t count = 0;
  bool ok = true;
  train(d, p, [&](std::int64_t t, const VectorXd& w, const VectorXd& w_bar) {
    if (t <= 6) {
      // mu_t = 1 until t exceeds t0 + 1: the average restarts at w_t.
      sum = w;
      count = 1;
      ok = ok && (w_bar - w).cwiseAbs().maxCoeff() == 0.0;
    } else {
      sum += w;
      ++count;
      ok = ok && (w_bar - sum / static_cast<double>(count)).cwiseAbs().maxCoeff() < 1e-12;
    }
  });
  CHECK(ok);
  CHECK(count == 40 - 5);
}

TEST_CASE("training is bit-reproducible for a fixed seed") {
  std::mt19937_64 gen(7);
  auto d = oracle::random_dataset(gen, 80, 4, 1.0, 0.1);
  auto p = params_of(0.125, 0.125, 1.0);
  p.seed = 3;
  auto a = train(d, p);
  auto b = train(d, p);
  CHECK(a.model.w_bar == b.model.w_bar);
  CHECK(a.report.eta0 == b.report.eta0);
  p.seed = 4;
  auto c = train(d, p);
  CHECK(c.model.w_bar != a.model.w_bar);
}

TEST_CASE("calibrated step size comes from the grid") {
  std::mt19937_64 gen(8);
  auto d = oracle::random_dataset(gen, 60, 3, 1.0, 0.1);
  auto p = params_of(0.1, 0.1, 1.0);
  const double eta = calibrate_eta0(d, p);
  CHECK(std::find(p.eta_grid.begin(), p.eta_grid.end(), eta) != p.eta_grid.end());
}

TEST_CASE("averaged SGD approaches the kernel-path optimum") {
  std::mt19937_64 gen(9);
  auto d = oracle::random_dataset(gen, 200, 5, 2.5);
  LinearLdmParams p = params_of(0.0625, 0.0625, 1.0);
  p.epochs = 50;
  auto lin = train(d, p);
  KernelLdmParams kp;
  kp.lambda1 = p.lambda1;
  kp.lambda2 = p.lambda2;
  kp.c = p.c;
  kp.tolerance = 1e-6;
  auto ker = solve(d, KernelSpec::linear(), kp);
  const VectorXd w_kernel = oracle::dense(d) * ker.model.alpha;
  const double g_kernel = exact_objective(w_kernel, d, p);
  CHECK(exact_objective(lin.model.w_bar, d, p) <= 1.10 * g_kernel);
  int agree = 0;
  for (const auto& x : d.instances) {
    agree += predict_linear(lin.model, x).label == predict(ker.model, x).label;
  }
  CHECK(agree >= 196);
}

TEST_CASE("predict_linear hand cases") {
  LinearModel m;
  m.w_bar = VectorXd(2);
  m.w_bar << 1.0, -1.0;
  auto p = predict_linear(m, SparseVector({{1, 1.0}}));
  CHECK(p.score == 1.0);
  CHECK(p.label == 1);
  m.w_bar.setZero();
  CHECK(predict_linear(m, SparseVector({{2, 5.0}})).label == 1);
  // Unseen indices contribute nothing.
  m.w_bar << 1.0, 2.0;
  CHECK(predict_linear(m, SparseVector({{3, 9.0}})).score == 0.0);
}

TEST_CASE("parameter validation") {
  auto p = params_of(-1, 0, 1);
  CHECK_THROWS_AS(p.validate(), UsageError);
  p = params_of(0, 0, 0);
  CHECK_THROWS_AS(p.validate(), UsageError);
  p = params_of(0, 0, 1);
  p.epochs = 0;
  CHECK_THROWS_AS(p.validate(), UsageError);
  p = params_of(0, 0, 1);
  p.eta0 = -1.0;
  CHECK_THROWS_AS(p.validate(), UsageError);
}

#include "ldm/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "ldm/analysis.hpp"
#include "ldm/data.hpp"
#include "ldm/error.hpp"
#include "ldm/kernel.hpp"
#include "ldm/kernel_ldm.hpp"
#include "ldm/linear_ldm.hpp"
#include "ldm/model_io.hpp"
#include "ldm/model_selection.hpp"

namespace ldm {

namespace {

struct TrainArgs {
  std::string data;
  std::string model_out;
  std::string solver = "kernel";
  std::string kernel = "linear";
  std::optional<double> width;
  std::optional<double> width_scale;
  double c = 1.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  std::optional<int> epochs;
  double tol = 1e-3;
  std::uint64_t seed = 0;
  std::optional<double> eta0;
  bool sequential = false;
  bool no_normalize = false;
  double ridge_scale = 1e-10;
};

struct PredictArgs {
  std::string model;
  std::string data;
  std::string out;
  bool scores = false;
};

struct CvArgs {
  std::string data;
  std::string solver = "kernel";
  std::string kernel = "linear";
  std::size_t folds = 5;
  std::uint64_t seed = 0;
  std::vector<double> c_values;
  std::vector<double> lambda_values;
  std::vector<double> width_multipliers;
  std::string log;
  std::optional<int> epochs;
  double tol = 1e-3;
  bool no_normalize = false;
};

struct MarginArgs {
  std::string model;
  std::string data;
  std::string out;
};

struct EvalArgs {
  std::string predictions;
  std::string data;
};

std::ofstream open_output(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write '" + path + "'");
  return f;
}

int cmd_train(const TrainArgs& a, std::ostream& out) {
  const SolverKind solver = parse_solver_kind(a.solver);
  const KernelKind kernel = parse_kernel_kind(a.kernel);
  if (solver == SolverKind::linear && kernel != KernelKind::linear) {
    throw UsageError("the linear solver supports only the linear kernel");
  }
  if (a.width && a.width_scale) throw UsageError("--width and --width-scale are exclusive");
  if (kernel == KernelKind::linear && (a.width || a.width_scale)) {
    throw UsageError("--width applies only to the rbf kernel");
  }
  if (a.width && !(*a.width > 0.0)) throw UsageError("--width must be > 0");
  if (a.width_scale && !(*a.width_scale > 0.0)) throw UsageError("--width-scale must be > 0");

  KernelLdmParams kp;
  LinearLdmParams lp;
  if (solver == SolverKind::kernel) {
    kp.lambda1 = a.lambda1;
    kp.lambda2 = a.lambda2;
    kp.c = a.c;
    kp.tolerance = a.tol;
    if (a.epochs) kp.max_epochs = *a.epochs;
    kp.ridge_scale = a.ridge_scale;
    kp.shuffle = !a.sequential;
    kp.seed = a.seed;
    kp.validate();
  } else {
    lp.lambda1 = a.lambda1;
    lp.lambda2 = a.lambda2;
    lp.c = a.c;
    if (a.epochs) lp.epochs = *a.epochs;
    lp.eta0 = a.eta0;
    lp.seed = a.seed;
    lp.validate();
  }

  LabeledDataset d = load_sparse_file(a.data);
  std::optional<NormalizationMap> map;
  if (!a.no_normalize) {
    map = fit_normalizer(d);
    d = apply_normalizer(*map, d);
  }

  Model model;
  SolverReport report;
  if (solver == SolverKind::kernel) {
    KernelSpec spec = KernelSpec::linear();
    if (kernel == KernelKind::rbf) {
      const double w = a.width ? *a.width : a.width_scale.value_or(1.0) * rbf_width_base(d);
      spec = KernelSpec::rbf(w);
    }
    auto fit = solve(d, spec, kp);
    fit.model.normalizer = map;
    report = fit.report;
    model = std::move(fit.model);
  } else {
    auto fit = train(d, lp);
    fit.model.normalizer = map;
    report = fit.report;
    model = std::move(fit.model);
  }
  save_model(a.model_out, model);

  out << "solver=" << a.solver << " kernel=" << a.kernel << " m=" << d.size()
      << " epochs=" << report.epochs << " iterations=" << report.iterations
      << " converged=" << (report.converged ? "yes" : "no");
  if (!report.objective_trace.empty()) out << " objective=" << format_real(report.objective_trace.back());
  if (solver == SolverKind::kernel) out << " violation=" << format_real(report.final_violation);
  if (report.loo_bound) out << " loo_bound=" << format_real(*report.loo_bound);
  if (report.eta0) out << " eta0=" << format_real(*report.eta0);
  out << '\n';
  return kExitOk;
}

int cmd_predict(const PredictArgs& a, std::ostream& out) {
  const Model model = load_model(std::filesystem::path(a.model));
  const LabeledDataset d = load_sparse_file(a.data);
  std::ostringstream buf;
  for (const auto& x : d.instances) {
    const Prediction p = predict_model(model, x);
    buf << (p.label > 0 ? "+1" : "-1");
    if (a.scores) buf << '\t' << format_real(p.score);
    buf << '\n';
  }
  if (a.out.empty()) {
    out << buf.str();
  } else {
    auto f = open_output(a.out);
    f << buf.str();
  }
  return kExitOk;
}

std::string config_label(const GridPoint& p) {
  return "c=" + format_real(p.c) + " lambda1=" + format_real(p.lambda1) +
         " lambda2=" + format_real(p.lambda2) + " width=" + format_real(p.width);
}

int cmd_cv(const CvArgs& a, std::ostream& out) {
  CvOptions options;
  options.solver = parse_solver_kind(a.solver);
  options.kernel = parse_kernel_kind(a.kernel);
  options.folds = a.folds;
  options.seed = a.seed;
  options.normalize = !a.no_normalize;
  options.kernel_params.tolerance = a.tol;
  options.kernel_params.seed = a.seed;
  options.linear_params.seed = a.seed;
  if (a.epochs) {
    options.kernel_params.max_epochs = *a.epochs;
    options.linear_params.epochs = *a.epochs;
  }
  options.kernel_params.validate();
  SearchGrid grid;
  if (!a.c_values.empty()) grid.c_values = a.c_values;
  if (!a.lambda_values.empty()) grid.lambda_values = a.lambda_values;
  if (!a.width_multipliers.empty()) grid.width_multipliers = a.width_multipliers;
  grid.validate(options.kernel);

  const LabeledDataset d = load_sparse_file(a.data);
  const SearchResult result = cross_validate(d, grid, options);

  if (!a.log.empty()) {
    auto f = open_output(a.log);
    write_cv_log(f, result);
  }
  out << "configurations=" << result.scores.size() << " folds=" << result.folds.k << '\n';
  for (const auto& cs : result.scores) {
    out << config_label(cs.point) << " accuracy=" << format_real(cs.mean_accuracy) << '\n';
  }
  out << "BEST " << config_label(result.best) << '\n';
  return kExitOk;
}

int cmd_margins(const MarginArgs& a, std::ostream& out) {
  const Model model = load_model(std::filesystem::path(a.model));
  const LabeledDataset d = load_sparse_file(a.data);
  std::vector<double> scores;
  scores.reserve(d.size());
  for (const auto& x : d.instances) scores.push_back(predict_model(model, x).score);
  const MarginStats stats = compute_margins(scores, d.labels);
  if (!a.out.empty()) {
    auto f = open_output(a.out);
    write_curve_csv(f, cumulative_curve_export(stats));
  }
  out << "mean=" << format_real(stats.mean) << " variance=" << format_real(stats.variance)
      << " min=" << format_real(stats.minimum) << '\n';
  return kExitOk;
}

std::vector<int> read_predictions(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open predictions file '" + path + "'");
  std::vector<int> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ss(line);
    std::string token;
    if (!(ss >> token)) continue;
    const double v = parse_real(token, "prediction");
    if (v != 1.0 && v != -1.0) {
      throw DataError("line " + std::to_string(line_no) + ": prediction must be +1 or -1");
    }
    out.push_back(v > 0 ? 1 : -1);
  }
  return out;
}

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  const auto predicted = read_predictions(a.predictions);
  const LabeledDataset d = load_sparse_file(a.data);
  const double acc = accuracy(predicted, d.labels);
  char buf[64];
  std::snprintf(buf, sizeof buf, "accuracy=%.6f", acc);
  out << buf << '\n';
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Large margin Distribution Machine", "ldm"};
  app.require_subcommand(1);

  TrainArgs ta;
  auto* train_cmd = app.add_subcommand("train", "fit a model and save it");
  train_cmd->add_option("--data", ta.data, "training data (sparse text)")->required();
  train_cmd->add_option("--model-out", ta.model_out, "model file to write")->required();
  train_cmd->add_option("--solver", ta.solver, "kernel|linear");
  train_cmd->add_option("--kernel", ta.kernel, "linear|rbf");
  train_cmd->add_option("--width", ta.width, "rbf width");
  train_cmd->add_option("--width-scale", ta.width_scale, "rbf width as a multiple of the mean pair distance");
  train_cmd->add_option("--c", ta.c);
  train_cmd->add_option("--lambda1", ta.lambda1);
  train_cmd->add_option("--lambda2", ta.lambda2);
  train_cmd->add_option("--epochs", ta.epochs, "kernel: max epochs; linear: passes T");
  train_cmd->add_option("--tol", ta.tol);
  train_cmd->add_option("--seed", ta.seed);
  train_cmd->add_option("--eta0", ta.eta0, "linear solver initial step size");
  train_cmd->add_option("--ridge-scale", ta.ridge_scale);
  train_cmd->add_flag("--sequential", ta.sequential, "visit coordinates in order");
  train_cmd->add_flag("--no-normalize", ta.no_normalize);

  PredictArgs pa;
  auto* predict_cmd = app.add_subcommand("predict", "predict labels with a saved model");
  predict_cmd->add_option("--model", pa.model)->required();
  predict_cmd->add_option("--data", pa.data)->required();
  predict_cmd->add_option("--out", pa.out, "output file (default stdout)");
  predict_cmd->add_flag("--scores", pa.scores, "append the raw score");

  CvArgs ca;
  auto* cv_cmd = app.add_subcommand("cv", "k-fold grid search");
  cv_cmd->add_option("--data", ca.data)->required();
  cv_cmd->add_option("--solver", ca.solver);
  cv_cmd->add_option("--kernel", ca.kernel);
  cv_cmd->add_option("--folds", ca.folds);
  cv_cmd->add_option("--seed", ca.seed);
  cv_cmd->add_option("--c-values", ca.c_values)->delimiter(',');
  cv_cmd->add_option("--lambda-values", ca.lambda_values)->delimiter(',');
  cv_cmd->add_option("--width-multipliers", ca.width_multipliers)->delimiter(',');
  cv_cmd->add_option("--log", ca.log, "per-fold CSV log");
  cv_cmd->add_option("--epochs", ca.epochs);
  cv_cmd->add_option("--tol", ca.tol);
  cv_cmd->add_flag("--no-normalize", ca.no_normalize);

  MarginArgs ma;
  auto* margins_cmd = app.add_subcommand("margins", "margin distribution of a model");
  margins_cmd->add_option("--model", ma.model)->required();
  margins_cmd->add_option("--data", ma.data)->required();
  margins_cmd->add_option("--out", ma.out, "cumulative margin CSV");

  EvalArgs ea;
  auto* eval_cmd = app.add_subcommand("eval", "accuracy of a predictions file");
  eval_cmd->add_option("--predictions", ea.predictions)->required();
  eval_cmd->add_option("--data", ea.data)->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*train_cmd) return cmd_train(ta, out);
    if (*predict_cmd) return cmd_predict(pa, out);
    if (*cv_cmd) return cmd_cv(ca, out);
    if (*margins_cmd) return cmd_margins(ma, out);
    if (*eval_cmd) return cmd_eval(ea, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const SolverError& e) {
    err << "solver error: " << e.what() << '\n';
    return kExitSolver;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace ldm

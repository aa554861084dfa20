#include "ldm/model_io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "ldm/error.hpp"

namespace ldm {

namespace {

constexpr const char* kMagic = "#LDM v1";

void write_normalizer(std::ostream& out, const std::optional<NormalizationMap>& map) {
  if (!map) {
    out << "normalizer none\n";
    return;
  }
  out << "normalizer " << map->dimension() << '\n';
  for (int f = 1; f <= map->dimension(); ++f) {
    out << f << ' ' << format_real(map->min(f)) << ' ' << format_real(map->max(f)) << '\n';
  }
}

void write_sparse_entries(std::ostream& out, const SparseVector& x) {
  for (const auto& e : x.entries()) out << ' ' << e.index << ':' << format_real(e.value);
}

// Reads the model one line at a time and reports the line number on failure.
class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::vector<std::string> next_tokens() {
    std::string line;
    if (!std::getline(in_, line)) fail("unexpected end of model file");
    ++line_no_;
    std::istringstream ss(line);
    std::vector<std::string> tokens;
    for (std::string t; ss >> t;) tokens.push_back(t);
    current_ = line;
    return tokens;
  }

  std::vector<std::string> expect(const std::string& key, std::size_t n_values) {
    auto t = next_tokens();
    if (t.empty() || t[0] != key || t.size() != n_values + 1) {
      fail("expected '" + key + "' with " + std::to_string(n_values) + " value(s)");
    }
    return t;
  }

  double real(const std::string& key) { return to_real(expect(key, 1)[1]); }

  long long integer(const std::string& token) {
    long long v = 0;
    auto res = std::from_chars(token.data(), token.data() + token.size(), v);
    if (token.empty() || res.ec != std::errc() || res.ptr != token.data() + token.size()) {
      fail("invalid integer '" + token + "'");
    }
    return v;
  }

  double to_real(const std::string& token) {
    try {
      return parse_real(token, "number");
    } catch (const DataError& e) {
      fail(e.what());
    }
  }

  SparseVector sparse(const std::vector<std::string>& tokens, std::size_t first) {
    std::vector<FeatureEntry> entries;
    for (std::size_t i = first; i < tokens.size(); ++i) {
      const auto colon = tokens[i].find(':');
      if (colon == std::string::npos) fail("expected <index>:<value>");
      entries.push_back({static_cast<int>(integer(tokens[i].substr(0, colon))),
                         to_real(tokens[i].substr(colon + 1))});
    }
    try {
      return SparseVector(std::move(entries));
    } catch (const DataError& e) {
      fail(e.what());
    }
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw DataError("corrupt model file, line " + std::to_string(line_no_) + ": " + what);
  }

 private:
  std::istream& in_;
  std::size_t line_no_ = 0;
  std::string current_;
};

std::optional<NormalizationMap> read_normalizer(Reader& r) {
  auto t = r.next_tokens();
  if (t.size() != 2 || t[0] != "normalizer") r.fail("expected 'normalizer'");
  if (t[1] == "none") return std::nullopt;
  const long long dim = r.integer(t[1]);
  if (dim < 0) r.fail("negative normalizer dimension");
  std::vector<double> lo(static_cast<std::size_t>(dim)), hi(static_cast<std::size_t>(dim));
  for (long long f = 1; f <= dim; ++f) {
    auto row = r.next_tokens();
    if (row.size() != 3 || r.integer(row[0]) != f) r.fail("bad normalizer row");
    lo[static_cast<std::size_t>(f - 1)] = r.to_real(row[1]);
    hi[static_cast<std::size_t>(f - 1)] = r.to_real(row[2]);
  }
  try {
    return NormalizationMap(std::move(lo), std::move(hi));
  } catch (const DataError& e) {
    r.fail(e.what());
  }
}

}  // namespace

Prediction predict_model(const Model& model, const SparseVector& z) {
  return std::visit(
      [&](const auto& m) -> Prediction {
        if constexpr (std::is_same_v<std::decay_t<decltype(m)>, KernelLdmModel>) {
          return predict(m, z);
        } else {
          return predict_linear(m, z);
        }
      },
      model);
}

void save_model(std::ostream& out, const Model& model) {
  out << kMagic << '\n';
  if (const auto* k = std::get_if<KernelLdmModel>(&model)) {
    const auto& p = k->params;
    out << "solver kernel\n";
    if (k->kernel.kind == KernelKind::rbf) {
      out << "kernel rbf " << format_real(k->kernel.width) << '\n';
    } else {
      out << "kernel linear\n";
    }
    out << "lambda1 " << format_real(p.lambda1) << '\n'
        << "lambda2 " << format_real(p.lambda2) << '\n'
        << "c " << format_real(p.c) << '\n'
        << "tolerance " << format_real(p.tolerance) << '\n'
        << "max_epochs " << p.max_epochs << '\n'
        << "ridge_scale " << format_real(p.ridge_scale) << '\n'
        << "shuffle " << (p.shuffle ? 1 : 0) << '\n'
        << "seed " << p.seed << '\n';
    write_normalizer(out, k->normalizer);
    out << "support " << k->support.size() << '\n';
    for (std::size_t i = 0; i < k->support.size(); ++i) {
      out << format_real(k->alpha(static_cast<Eigen::Index>(i)));
      write_sparse_entries(out, k->support[i]);
      out << '\n';
    }
  } else {
    const auto& l = std::get<LinearModel>(model);
    const auto& p = l.params;
    out << "solver linear\n"
        << "kernel linear\n"
        << "lambda1 " << format_real(p.lambda1) << '\n'
        << "lambda2 " << format_real(p.lambda2) << '\n'
        << "c " << format_real(p.c) << '\n'
        << "epochs " << p.epochs << '\n'
        << "eta0 " << format_real(p.eta0.value_or(0.0)) << '\n'
        << "t0 " << p.t0 << '\n'
        << "schedule " << (p.schedule == StepSchedule::constant ? "constant" : "decaying") << '\n'
        << "seed " << p.seed << '\n'
        << "steps " << l.t << '\n';
    write_normalizer(out, l.normalizer);
    out << "weights " << l.w_bar.size() << '\n';
    for (Eigen::Index k = 0; k < l.w_bar.size(); ++k) {
      out << (k + 1) << ':' << format_real(l.w_bar(k)) << '\n';
    }
  }
  out << "end\n";
}

void save_model(const std::filesystem::path& path, const Model& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write model file '" + path.string() + "'");
  save_model(out, model);
  if (!out) throw DataError("failed writing model file '" + path.string() + "'");
}

Model load_model(std::istream& in) {
  Reader r(in);
  std::string magic;
  if (!std::getline(in, magic) || magic != kMagic) {
    throw DataError("corrupt model file: missing '#LDM v1' header");
  }
  const auto solver = r.expect("solver", 1)[1];
  auto kernel_tokens = r.next_tokens();
  if (kernel_tokens.size() < 2 || kernel_tokens[0] != "kernel") r.fail("expected 'kernel'");

  if (solver == "kernel") {
    KernelLdmModel model;
    if (kernel_tokens[1] == "rbf" && kernel_tokens.size() == 3) {
      model.kernel = {KernelKind::rbf, r.to_real(kernel_tokens[2])};
    } else if (kernel_tokens[1] == "linear" && kernel_tokens.size() == 2) {
      model.kernel = KernelSpec::linear();
    } else {
      r.fail("unknown kernel line");
    }
    if (model.kernel.kind == KernelKind::rbf && !(model.kernel.width > 0.0)) r.fail("bad rbf width");
    auto& p = model.params;
    p.lambda1 = r.real("lambda1");
    p.lambda2 = r.real("lambda2");
    p.c = r.real("c");
    p.tolerance = r.real("tolerance");
    p.max_epochs = static_cast<int>(r.integer(r.expect("max_epochs", 1)[1]));
    p.ridge_scale = r.real("ridge_scale");
    p.shuffle = r.integer(r.expect("shuffle", 1)[1]) != 0;
    p.seed = static_cast<std::uint64_t>(r.integer(r.expect("seed", 1)[1]));
    model.normalizer = read_normalizer(r);
    const long long m = r.integer(r.expect("support", 1)[1]);
    if (m < 0) r.fail("negative support size");
    model.alpha.resize(m);
    model.support.reserve(static_cast<std::size_t>(m));
    for (long long i = 0; i < m; ++i) {
      auto t = r.next_tokens();
      if (t.empty()) r.fail("empty support line");
      model.alpha(i) = r.to_real(t[0]);
      model.support.push_back(r.sparse(t, 1));
    }
    r.expect("end", 0);
    return model;
  }
  if (solver == "linear") {
    if (kernel_tokens.size() != 2 || kernel_tokens[1] != "linear") r.fail("linear models use the linear kernel");
    LinearModel model;
    auto& p = model.params;
    p.lambda1 = r.real("lambda1");
    p.lambda2 = r.real("lambda2");
    p.c = r.real("c");
    p.epochs = static_cast<int>(r.integer(r.expect("epochs", 1)[1]));
    p.eta0 = r.real("eta0");
    p.t0 = static_cast<std::size_t>(r.integer(r.expect("t0", 1)[1]));
    const auto schedule = r.expect("schedule", 1)[1];
    if (schedule == "constant") {
      p.schedule = StepSchedule::constant;
    } else if (schedule == "decaying") {
      p.schedule = StepSchedule::decaying;
    } else {
      r.fail("unknown schedule '" + schedule + "'");
    }
    p.seed = static_cast<std::uint64_t>(r.integer(r.expect("seed", 1)[1]));
    model.t = r.integer(r.expect("steps", 1)[1]);
    model.normalizer = read_normalizer(r);
    const long long d = r.integer(r.expect("weights", 1)[1]);
    if (d < 0) r.fail("negative weight count");
    model.w_bar.resize(d);
    for (long long k = 0; k < d; ++k) {
      auto t = r.next_tokens();
      const auto x = r.sparse(t, 0);
      if (x.nnz() != 1 || x.entries()[0].index != k + 1) r.fail("expected weight " + std::to_string(k + 1));
      model.w_bar(k) = x.entries()[0].value;
    }
    model.w = model.w_bar;
    r.expect("end", 0);
    return model;
  }
  r.fail("unknown solver '" + solver + "'");
}

Model load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model file '" + path.string() + "'");
  return load_model(in);
}

}  // namespace ldm

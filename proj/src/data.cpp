#include "ldm/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "ldm/error.hpp"
#include "ldm/random.hpp"

namespace ldm {

SparseVector::SparseVector(std::vector<FeatureEntry> entries) : entries_(std::move(entries)) {
  int previous = 0;
  for (const auto& e : entries_) {
    if (e.index <= previous) {
      throw DataError("sparse vector indices must be positive and strictly increasing (index " +
                      std::to_string(e.index) + " after " + std::to_string(previous) + ")");
    }
    if (!std::isfinite(e.value)) {
      throw DataError("non-finite value at feature " + std::to_string(e.index));
    }
    previous = e.index;
  }
}

double SparseVector::squared_norm() const {
  double s = 0.0;
  for (const auto& e : entries_) s += e.value * e.value;
  return s;
}

double dot(const SparseVector& a, const SparseVector& b) {
  auto ea = a.entries();
  auto eb = b.entries();
  std::size_t i = 0, j = 0;
  double s = 0.0;
  while (i < ea.size() && j < eb.size()) {
    if (ea[i].index == eb[j].index) {
      s += ea[i].value * eb[j].value;
      ++i;
      ++j;
    } else if (ea[i].index < eb[j].index) {
      ++i;
    } else {
      ++j;
    }
  }
  return s;
}

double dot(const SparseVector& a, std::span<const double> dense) {
  double s = 0.0;
  for (const auto& e : a.entries()) {
    const auto k = static_cast<std::size_t>(e.index - 1);
    if (k >= dense.size()) break;
    s += e.value * dense[k];
  }
  return s;
}

double squared_distance(const SparseVector& a, const SparseVector& b) {
  auto ea = a.entries();
  auto eb = b.entries();
  std::size_t i = 0, j = 0;
  double s = 0.0;
  while (i < ea.size() || j < eb.size()) {
    double diff;
    if (j == eb.size() || (i < ea.size() && ea[i].index < eb[j].index)) {
      diff = ea[i++].value;
    } else if (i == ea.size() || eb[j].index < ea[i].index) {
      diff = eb[j++].value;
    } else {
      diff = ea[i++].value - eb[j++].value;
    }
    s += diff * diff;
  }
  return s;
}

bool LabeledDataset::has_both_classes() const {
  bool pos = false, neg = false;
  for (int y : labels) {
    pos = pos || y > 0;
    neg = neg || y < 0;
  }
  return pos && neg;
}

void LabeledDataset::validate() const {
  if (instances.size() != labels.size()) {
    throw DataError("dataset has " + std::to_string(instances.size()) + " instances but " +
                    std::to_string(labels.size()) + " labels");
  }
  if (instances.empty()) throw DataError("dataset is empty");
  for (int y : labels) {
    if (y != 1 && y != -1) throw DataError("labels must be +1 or -1");
  }
}

LabeledDataset LabeledDataset::subset(std::span<const std::size_t> indices) const {
  LabeledDataset out;
  out.dimension = dimension;
  out.instances.reserve(indices.size());
  out.labels.reserve(indices.size());
  for (std::size_t i : indices) {
    out.instances.push_back(instances.at(i));
    out.labels.push_back(labels.at(i));
  }
  return out;
}

LabeledDataset make_dataset(std::vector<SparseVector> instances, std::vector<int> labels) {
  LabeledDataset d;
  for (const auto& x : instances) d.dimension = std::max(d.dimension, x.max_index());
  d.instances = std::move(instances);
  d.labels = std::move(labels);
  d.validate();
  return d;
}

std::string format_real(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

double parse_real(std::string_view token, std::string_view what) {
  std::string_view t = token;
  if (!t.empty() && t.front() == '+') t.remove_prefix(1);
  double v = 0.0;
  auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    throw DataError("cannot parse " + std::string(what) + " '" + std::string(token) + "'");
  }
  return v;
}

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

// Integral labels are canonicalized ("+1", "1.0" -> "1") so that spelling
// variants of one value count as a single raw label.
std::string canonical_label(std::string_view raw) {
  std::string_view t = raw;
  if (!t.empty() && t.front() == '+') t.remove_prefix(1);
  double v = 0.0;
  auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (!t.empty() && res.ec == std::errc() && res.ptr == t.data() + t.size() && std::isfinite(v) &&
      v == std::floor(v) && std::abs(v) < 1e15) {
    return std::to_string(static_cast<long long>(v));
  }
  return std::string(raw);
}

}  // namespace

LabeledDataset parse_sparse(std::istream& in) {
  std::vector<SparseVector> instances;
  std::vector<std::string> raw_labels;
  std::vector<std::size_t> label_lines;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto tokens = split_ws(line);
    if (tokens.empty()) continue;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    std::vector<FeatureEntry> entries;
    entries.reserve(tokens.size() - 1);
    try {
      for (std::size_t t = 1; t < tokens.size(); ++t) {
        auto tok = tokens[t];
        auto colon = tok.find(':');
        if (colon == std::string_view::npos) {
          throw DataError("expected <index>:<value>, got '" + std::string(tok) + "'");
        }
        auto idx_str = tok.substr(0, colon);
        int idx = 0;
        auto res = std::from_chars(idx_str.data(), idx_str.data() + idx_str.size(), idx);
        if (idx_str.empty() || res.ec != std::errc() || res.ptr != idx_str.data() + idx_str.size() ||
            idx <= 0) {
          throw DataError("invalid feature index '" + std::string(idx_str) + "'");
        }
        entries.push_back({idx, parse_real(tok.substr(colon + 1), "feature value")});
      }
      instances.emplace_back(std::move(entries));
    } catch (const DataError& e) {
      throw DataError(where + e.what());
    }
    raw_labels.push_back(canonical_label(tokens[0]));
    label_lines.push_back(line_no);
  }
  if (instances.empty()) throw DataError("no instances in input");

  std::vector<int> labels(raw_labels.size());
  const bool all_signed = std::all_of(raw_labels.begin(), raw_labels.end(),
                                      [](const std::string& s) { return s == "1" || s == "-1"; });
  if (all_signed) {
    for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = raw_labels[i] == "1" ? 1 : -1;
  } else {
    std::map<std::string, int> distinct;
    for (std::size_t i = 0; i < raw_labels.size(); ++i) {
      distinct.emplace(raw_labels[i], 0);
      if (distinct.size() > 2) {
        throw DataError("line " + std::to_string(label_lines[i]) + ": third distinct label '" +
                        raw_labels[i] + "' (expected +1/-1 or exactly two labels)");
      }
    }
    if (distinct.size() != 2) {
      throw DataError("expected labels +1/-1 or exactly two distinct labels, found label '" +
                      distinct.begin()->first + "' only");
    }
    distinct.begin()->second = -1;
    std::next(distinct.begin())->second = 1;
    for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = distinct.at(raw_labels[i]);
  }
  return make_dataset(std::move(instances), std::move(labels));
}

LabeledDataset parse_sparse_text(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_sparse(in);
}

LabeledDataset load_sparse_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open data file '" + path.string() + "'");
  try {
    return parse_sparse(in);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_sparse(std::ostream& out, const LabeledDataset& d) {
  for (std::size_t i = 0; i < d.size(); ++i) {
    out << (d.labels[i] > 0 ? "+1" : "-1");
    for (const auto& e : d.instances[i].entries()) {
      out << ' ' << e.index << ':' << format_real(e.value);
    }
    out << '\n';
  }
}

std::string serialize_sparse(const LabeledDataset& d) {
  std::ostringstream out;
  write_sparse(out, d);
  return out.str();
}

NormalizationMap::NormalizationMap(std::vector<double> min, std::vector<double> max)
    : min_(std::move(min)), max_(std::move(max)) {
  if (min_.size() != max_.size()) throw DataError("normalization map size mismatch");
  for (std::size_t f = 0; f < min_.size(); ++f) {
    if (!(min_[f] <= max_[f])) {
      throw DataError("normalization map has min > max for feature " + std::to_string(f + 1));
    }
  }
}

double NormalizationMap::transform(int index, double value) const {
  if (index < 1 || index > dimension()) return 0.0;
  const double lo = min(index);
  const double hi = max(index);
  if (!(hi > lo)) return 0.0;
  return std::clamp((value - lo) / (hi - lo), 0.0, 1.0);
}

NormalizationMap fit_normalizer(const LabeledDataset& d) {
  const auto dim = static_cast<std::size_t>(d.dimension);
  std::vector<double> lo(dim, std::numeric_limits<double>::infinity());
  std::vector<double> hi(dim, -std::numeric_limits<double>::infinity());
  std::vector<std::size_t> count(dim, 0);
  for (const auto& x : d.instances) {
    for (const auto& e : x.entries()) {
      const auto f = static_cast<std::size_t>(e.index - 1);
      lo[f] = std::min(lo[f], e.value);
      hi[f] = std::max(hi[f], e.value);
      ++count[f];
    }
  }
  for (std::size_t f = 0; f < dim; ++f) {
    if (count[f] < d.size()) {
      lo[f] = std::min(lo[f], 0.0);
      hi[f] = std::max(hi[f], 0.0);
    }
  }
  return NormalizationMap(std::move(lo), std::move(hi));
}

SparseVector apply_normalizer(const NormalizationMap& map, const SparseVector& x) {
  std::vector<FeatureEntry> out;
  out.reserve(x.nnz());
  auto push = [&](int index, double raw) {
    const double v = map.transform(index, raw);
    if (v != 0.0) out.push_back({index, v});
  };
  auto entries = x.entries();
  std::size_t next = 0;
  for (int f = 1; f <= map.dimension(); ++f) {
    // Only features with a negative minimum need the implicit zero filled in.
    if (!(map.min(f) < 0.0)) continue;
    while (next < entries.size() && entries[next].index < f) {
      push(entries[next].index, entries[next].value);
      ++next;
    }
    if (next < entries.size() && entries[next].index == f) continue;
    push(f, 0.0);
  }
  for (; next < entries.size(); ++next) push(entries[next].index, entries[next].value);
  return SparseVector(std::move(out));
}

LabeledDataset apply_normalizer(const NormalizationMap& map, const LabeledDataset& d) {
  LabeledDataset out;
  out.dimension = d.dimension;
  out.labels = d.labels;
  out.instances.reserve(d.size());
  for (const auto& x : d.instances) out.instances.push_back(apply_normalizer(map, x));
  return out;
}

std::vector<std::size_t> FoldPlan::members(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    if (assignment[i] == fold) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> FoldPlan::complement(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    if (assignment[i] != fold) out.push_back(i);
  }
  return out;
}

FoldPlan make_folds(std::size_t m, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw UsageError("fold count must be at least 2");
  if (k > m) {
    throw UsageError("fold count " + std::to_string(k) + " exceeds instance count " +
                     std::to_string(m));
  }
  Rng rng(seed);
  const auto perm = random_permutation(m, rng);
  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.assignment.resize(m);
  for (std::size_t r = 0; r < m; ++r) plan.assignment[perm[r]] = r % k;
  return plan;
}

SplitIndices random_split_indices(std::size_t m, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw UsageError("split fraction must lie in (0, 1)");
  Rng rng(seed);
  auto perm = random_permutation(m, rng);
  const auto n_train = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(m)));
  SplitIndices s;
  s.train.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.test.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train), perm.end());
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

std::pair<LabeledDataset, LabeledDataset> random_split(const LabeledDataset& d, double fraction,
                                                       std::uint64_t seed) {
  const auto idx = random_split_indices(d.size(), fraction, seed);
  auto train = d.subset(idx.train);
  if (!train.has_both_classes()) {
    throw DataError("training split with seed " + std::to_string(seed) +
                    " does not contain both classes");
  }
  return {std::move(train), d.subset(idx.test)};
}

}  // namespace ldm

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ldm {

/// One stored coordinate of a sparse vector. Indices are 1-based.
struct FeatureEntry {
  int index = 0;
  double value = 0.0;

  friend bool operator==(const FeatureEntry&, const FeatureEntry&) = default;
};

/// Sparse feature vector with strictly increasing 1-based indices and
/// finite values. Absent indices are implicit zeros.
class SparseVector {
 public:
  SparseVector() = default;

  /// Validates ordering, positivity of indices and finiteness of values.
  /// Throws DataError on violation.
  explicit SparseVector(std::vector<FeatureEntry> entries);

  std::span<const FeatureEntry> entries() const { return entries_; }
  std::size_t nnz() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  /// Largest stored index, 0 for an empty vector.
  int max_index() const { return entries_.empty() ? 0 : entries_.back().index; }

  double squared_norm() const;

  friend bool operator==(const SparseVector&, const SparseVector&) = default;

 private:
  std::vector<FeatureEntry> entries_;
};

double dot(const SparseVector& a, const SparseVector& b);

/// Dot product against a dense vector indexed 0-based (entry index k reads
/// dense[k - 1]); indices beyond the dense length contribute zero.
double dot(const SparseVector& a, std::span<const double> dense);

double squared_distance(const SparseVector& a, const SparseVector& b);

/// Instances with +1/-1 labels. `dimension` is the largest feature index
/// observed (or declared, when larger).
struct LabeledDataset {
  std::vector<SparseVector> instances;
  std::vector<int> labels;
  int dimension = 0;

  std::size_t size() const { return instances.size(); }
  bool has_both_classes() const;

  /// Throws DataError unless sizes agree, m >= 1 and labels are +1/-1.
  void validate() const;

  /// Rows at `indices`, in the order given.
  LabeledDataset subset(std::span<const std::size_t> indices) const;
};

LabeledDataset make_dataset(std::vector<SparseVector> instances,
                            std::vector<int> labels);

/// Reads `<label> <idx>:<val> ...` lines. Labels that all read as +1/-1 are
/// kept; otherwise exactly two distinct raw labels are required and the
/// lexicographically smaller one becomes -1.
LabeledDataset parse_sparse(std::istream& in);
LabeledDataset parse_sparse_text(std::string_view text);
LabeledDataset load_sparse_file(const std::filesystem::path& path);

/// Canonical text form: "+1"/"-1" labels, values with 17 significant digits.
void write_sparse(std::ostream& out, const LabeledDataset& d);
std::string serialize_sparse(const LabeledDataset& d);

/// Formats a double with 17 significant digits (round-trip exact).
std::string format_real(double v);

/// Parses a full token as a double; throws DataError naming `what` otherwise.
double parse_real(std::string_view token, std::string_view what);

// Per-feature [min, max] ranges used to rescale features into [0, 1].
class NormalizationMap {
 public:
  NormalizationMap() = default;
  NormalizationMap(std::vector<double> min, std::vector<double> max);

  /// Number of features covered (indices 1..dimension()).
  int dimension() const { return static_cast<int>(min_.size()); }
  double min(int index) const { return min_[static_cast<std::size_t>(index - 1)]; }
  double max(int index) const { return max_[static_cast<std::size_t>(index - 1)]; }

  /// Scaled value for feature `index`, clamped to [0, 1]. Degenerate
  /// features (min == max) and features outside the map give 0.
  double transform(int index, double value) const;

  friend bool operator==(const NormalizationMap&, const NormalizationMap&) = default;

 private:
  std::vector<double> min_;
  std::vector<double> max_;
};

/// Column-wise min/max over `d`, counting an implicit zero for every
/// feature that is absent from at least one instance.
NormalizationMap fit_normalizer(const LabeledDataset& d);

/// Rescales stored entries; entries that map to exactly 0 are dropped.
/// Implicit zeros stay implicit except for features with min < 0, which can
/// only arise for features stored in every fitting instance: there the
/// scaled value of 0 is materialized.
LabeledDataset apply_normalizer(const NormalizationMap& map, const LabeledDataset& d);
SparseVector apply_normalizer(const NormalizationMap& map, const SparseVector& x);

struct FoldPlan {
  std::size_t k = 0;
  std::vector<std::size_t> assignment;  // fold id per instance
  std::uint64_t seed = 0;

  std::vector<std::size_t> members(std::size_t fold) const;
  std::vector<std::size_t> complement(std::size_t fold) const;
};

/// Shuffled round-robin assignment; fold sizes differ by at most one.
FoldPlan make_folds(std::size_t m, std::size_t k, std::uint64_t seed);

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Seeded partition with |train| = ceil(fraction * m); indices ascending.
SplitIndices random_split_indices(std::size_t m, double fraction, std::uint64_t seed);

/// Throws DataError if the training part does not contain both classes.
std::pair<LabeledDataset, LabeledDataset> random_split(const LabeledDataset& d,
                                                       double fraction,
                                                       std::uint64_t seed);

}  // namespace ldm

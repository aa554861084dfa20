#pragma once

#include <cstdint>
#include <string>

#include <Eigen/Dense>

#include "ldm/data.hpp"

namespace ldm {

enum class KernelKind { linear, rbf };

/// Kernel choice. The RBF kernel is exp(-|a - b|^2 / (2 width^2)).
struct KernelSpec {
  KernelKind kind = KernelKind::linear;
  double width = 0.0;

  static KernelSpec linear() { return {}; }
  static KernelSpec rbf(double width);

  /// Throws UsageError when an RBF width is not a positive finite number.
  void validate() const;

  friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

std::string to_string(KernelKind kind);
KernelKind parse_kernel_kind(const std::string& name);

double kernel_eval(const KernelSpec& spec, const SparseVector& a, const SparseVector& b);

/// Dense symmetric Gram matrix; the upper triangle is evaluated and mirrored.
Eigen::MatrixXd gram_matrix(const KernelSpec& spec, const LabeledDataset& d);

/// rows = `queries`, columns = `basis`: K(i, j) = k(queries_i, basis_j).
Eigen::MatrixXd cross_kernel(const KernelSpec& spec, std::span<const SparseVector> queries,
                             std::span<const SparseVector> basis);

/// Average Euclidean distance between instances (over all unordered pairs,
/// or over the pairs of a seeded subsample of `cap` instances when m > cap).
/// Throws DataError when every instance is identical.
double rbf_width_base(const LabeledDataset& d, std::size_t cap = 1000, std::uint64_t seed = 0);

}  // namespace ldm

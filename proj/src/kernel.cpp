#include "ldm/kernel.hpp"

#include <cmath>

#include "ldm/error.hpp"
#include "ldm/random.hpp"

namespace ldm {

KernelSpec KernelSpec::rbf(double width) {
  KernelSpec s{KernelKind::rbf, width};
  s.validate();
  return s;
}

void KernelSpec::validate() const {
  if (kind == KernelKind::rbf && !(std::isfinite(width) && width > 0.0)) {
    throw UsageError("rbf kernel width must be positive");
  }
}

std::string to_string(KernelKind kind) { return kind == KernelKind::rbf ? "rbf" : "linear"; }

KernelKind parse_kernel_kind(const std::string& name) {
  if (name == "linear") return KernelKind::linear;
  if (name == "rbf") return KernelKind::rbf;
  throw UsageError("unknown kernel '" + name + "' (expected linear or rbf)");
}

double kernel_eval(const KernelSpec& spec, const SparseVector& a, const SparseVector& b) {
  if (spec.kind == KernelKind::linear) return dot(a, b);
  return std::exp(-squared_distance(a, b) / (2.0 * spec.width * spec.width));
}

Eigen::MatrixXd gram_matrix(const KernelSpec& spec, const LabeledDataset& d) {
  const auto m = static_cast<Eigen::Index>(d.size());
  Eigen::MatrixXd g(m, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    for (Eigen::Index i = 0; i <= j; ++i) {
      const double v = kernel_eval(spec, d.instances[static_cast<std::size_t>(i)],
                                   d.instances[static_cast<std::size_t>(j)]);
      g(i, j) = v;
      g(j, i) = v;
    }
  }
  return g;
}

Eigen::MatrixXd cross_kernel(const KernelSpec& spec, std::span<const SparseVector> queries,
                             std::span<const SparseVector> basis) {
  Eigen::MatrixXd k(static_cast<Eigen::Index>(queries.size()),
                    static_cast<Eigen::Index>(basis.size()));
  for (std::size_t j = 0; j < basis.size(); ++j) {
    for (std::size_t i = 0; i < queries.size(); ++i) {
      k(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          kernel_eval(spec, queries[i], basis[j]);
    }
  }
  return k;
}

double rbf_width_base(const LabeledDataset& d, std::size_t cap, std::uint64_t seed) {
  if (d.size() < 2) throw DataError("width heuristic needs at least two instances");
  std::vector<std::size_t> rows;
  if (cap >= 2 && d.size() > cap) {
    Rng rng(seed);
    auto perm = random_permutation(d.size(), rng);
    rows.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(cap));
  } else {
    rows.resize(d.size());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  }
  double total = 0.0;
  std::size_t pairs = 0;
  for (std::size_t a = 0; a < rows.size(); ++a) {
    for (std::size_t b = a + 1; b < rows.size(); ++b) {
      total += std::sqrt(squared_distance(d.instances[rows[a]], d.instances[rows[b]]));
      ++pairs;
    }
  }
  const double delta = total / static_cast<double>(pairs);
  if (!(delta > 0.0)) {
    throw DataError("all instances are identical; the rbf width grid would be degenerate");
  }
  return delta;
}

}  // namespace ldm

#pragma once

#include <filesystem>
#include <iosfwd>
#include <variant>

#include "ldm/kernel_ldm.hpp"
#include "ldm/linear_ldm.hpp"
#include "ldm/report.hpp"

namespace ldm {

using Model = std::variant<KernelLdmModel, LinearModel>;

Prediction predict_model(const Model& model, const SparseVector& z);

// Line-oriented text format starting with "#LDM v1". Reals carry 17
// significant digits, so a loaded model predicts bit-identically.
void save_model(std::ostream& out, const Model& model);
void save_model(const std::filesystem::path& path, const Model& model);

/// Throws DataError on any malformed or truncated model file.
Model load_model(std::istream& in);
Model load_model(const std::filesystem::path& path);

}  // namespace ldm

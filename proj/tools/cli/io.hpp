#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "kernelgp/kernels.hpp"
#include "kernelgp/kmat.hpp"

namespace kernelgp::cli {

/// Unreadable files, malformed CSV, inconsistent shapes. Maps to exit code 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Headerless numeric CSV. Blank lines are skipped; every other line must have
/// the same number of fields. Errors carry "path:line:".
RowMatrix read_csv(const std::filesystem::path& path);

struct Dataset {
  PointSet points;
  Eigen::VectorXd labels;
};

/// Features from `data_path`; labels either from a one-column `labels_path` or
/// from column `label_col` (0-based) of the data file.
Dataset load_dataset(const std::filesystem::path& data_path,
                     const std::optional<std::filesystem::path>& labels_path,
                     std::optional<int> label_col);

/// 17 significant digits, locale-independent (always a '.' decimal point).
std::string format_double(double v);

struct ModelFile {
  static constexpr int kFormatVersion = 1;

  KernelType kernel = KernelType::Gaussian;
  Hyperparams params;
  int format_version = kFormatVersion;
};

std::string serialize_model(const ModelFile& model);
ModelFile parse_model(const std::string& text);

void write_model(const std::filesystem::path& path, const ModelFile& model);
ModelFile read_model(const std::filesystem::path& path);

/// Writes "mean,stddev" then one row per prediction.
void write_predictions(const std::filesystem::path& path, const Eigen::VectorXd& mean,
                       const Eigen::VectorXd& stddev);

void write_history(const std::filesystem::path& path, const std::vector<double>& loss,
                   const std::vector<double>& grad_norm);

}  // namespace kernelgp::cli

#include "io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <string_view>

#include "json.hpp"

#include "kernelgp/errors.hpp"

namespace kernelgp::cli {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string location(const std::filesystem::path& path, std::size_t line) {
  return path.string() + ":" + std::to_string(line) + ": ";
}

double parse_field(std::string_view field, const std::filesystem::path& path, std::size_t line) {
  field = trim(field);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
    throw DataError(location(path, line) + "cannot parse '" + std::string(field) + "' as a number");
  }
  return value;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  return out;
}

}  // namespace

RowMatrix read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "' for reading");

  std::vector<double> values;
  long cols = -1;
  long rows = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view content = trim(line);
    if (content.empty()) continue;
    long count = 0;
    std::size_t start = 0;
    while (true) {
      const auto comma = content.find(',', start);
      const auto end = comma == std::string_view::npos ? content.size() : comma;
      values.push_back(parse_field(content.substr(start, end - start), path, line_no));
      ++count;
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (cols < 0) {
      cols = count;
    } else if (count != cols) {
      throw DataError(location(path, line_no) + "expected " + std::to_string(cols) +
                      " columns, found " + std::to_string(count));
    }
    ++rows;
  }
  if (rows == 0) return RowMatrix(0, 0);
  return Eigen::Map<const RowMatrix>(values.data(), rows, cols);
}

Dataset load_dataset(const std::filesystem::path& data_path,
                     const std::optional<std::filesystem::path>& labels_path,
                     std::optional<int> label_col) {
  if (labels_path && label_col) throw DataError("pass either --labels or --label-col, not both");
  const RowMatrix raw = read_csv(data_path);
  if (raw.rows() == 0) throw DataError(data_path.string() + ": no data rows");

  RowMatrix features;
  Eigen::VectorXd labels;
  if (label_col) {
    const int k = *label_col;
    if (k < 0) throw DataError("--label-col must be >= 0");
    if (raw.cols() < std::max(k + 1, 2)) {
      throw DataError(data_path.string() + ": expected at least " + std::to_string(std::max(k + 1, 2)) +
                      " columns (label column " + std::to_string(k) +
                      " plus at least one feature), found " + std::to_string(raw.cols()));
    }
    labels = raw.col(k);
    features.resize(raw.rows(), raw.cols() - 1);
    features.leftCols(k) = raw.leftCols(k);
    features.rightCols(raw.cols() - k - 1) = raw.rightCols(raw.cols() - k - 1);
  } else if (labels_path) {
    const RowMatrix lab = read_csv(*labels_path);
    if (lab.cols() != 1) {
      throw DataError(labels_path->string() + ": expected 1 label column, found " +
                      std::to_string(lab.cols()));
    }
    if (lab.rows() != raw.rows()) {
      throw DataError(labels_path->string() + ": expected " + std::to_string(raw.rows()) +
                      " labels (one per data row), found " + std::to_string(lab.rows()));
    }
    labels = lab.col(0);
    features = raw;
  } else {
    throw DataError("no labels given: pass --labels FILE (1 column) or --label-col K to take "
                    "column K of the data file");
  }
  try {
    return {PointSet(std::move(features)), std::move(labels)};
  } catch (const InvalidArgument& e) {
    throw DataError(data_path.string() + ": " + e.what());
  }
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  if (ec != std::errc()) return "nan";
  return std::string(buf, ptr);
}

std::string serialize_model(const ModelFile& model) {
  std::ostringstream out;
  out << "{\n"
      << "  \"format\": \"kernelgp-model\",\n"
      << "  \"format_version\": " << model.format_version << ",\n"
      << "  \"kernel\": \"" << kernel_name(model.kernel) << "\",\n"
      << "  \"l\": " << format_double(model.params.l) << ",\n"
      << "  \"f\": " << format_double(model.params.f) << ",\n"
      << "  \"s\": " << format_double(model.params.s) << "\n"
      << "}\n";
  return out.str();
}

ModelFile parse_model(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    ModelFile model;
    if (doc.at("format").get<std::string>() != "kernelgp-model") {
      throw DataError("not a kernelgp model file");
    }
    model.format_version = doc.at("format_version").get<int>();
    if (model.format_version != ModelFile::kFormatVersion) {
      throw DataError("unsupported model format_version " + std::to_string(model.format_version));
    }
    model.kernel = parse_kernel(doc.at("kernel").get<std::string>());
    model.params = {doc.at("l").get<double>(), doc.at("f").get<double>(),
                    doc.at("s").get<double>()};
    model.params.validate();
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed model file: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw DataError(std::string("malformed model file: ") + e.what());
  }
}

void write_model(const std::filesystem::path& path, const ModelFile& model) {
  auto out = open_output(path);
  out << serialize_model(model);
  if (!out) throw DataError("failed writing '" + path.string() + "'");
}

ModelFile read_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model file '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  try {
    return parse_model(text.str());
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_predictions(const std::filesystem::path& path, const Eigen::VectorXd& mean,
                       const Eigen::VectorXd& stddev) {
  auto out = open_output(path);
  out << "mean,stddev\n";
  for (Eigen::Index i = 0; i < mean.size(); ++i) {
    out << format_double(mean[i]) << ',' << format_double(stddev[i]) << '\n';
  }
  if (!out) throw DataError("failed writing '" + path.string() + "'");
}

void write_history(const std::filesystem::path& path, const std::vector<double>& loss,
                   const std::vector<double>& grad_norm) {
  auto out = open_output(path);
  out << "step,loss,grad_norm\n";
  for (std::size_t i = 0; i < loss.size(); ++i) {
    out << i << ',' << format_double(loss[i]) << ',' << format_double(grad_norm[i]) << '\n';
  }
  if (!out) throw DataError("failed writing '" + path.string() + "'");
}

}  // namespace kernelgp::cli

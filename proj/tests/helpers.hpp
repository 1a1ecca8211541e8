// Shared fixtures and independent reference implementations for the tests.
#ifndef VXAI_TESTS_HELPERS_HPP_
#define VXAI_TESTS_HELPERS_HPP_

#include "vxai/core.hpp"
#include "vxai/data_ingest.hpp"
#include "vxai/explainers.hpp"
#include "vxai/model_zoo.hpp"
#include "vxai/rng.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace vxai::testing {

inline std::filesystem::path source_dir() { return VXAI_SOURCE_DIR; }
inline std::filesystem::path toy_dataset(const std::string& name) {
  return source_dir() / "data" / "datasets" / (name + ".csv");
}
inline const std::vector<std::string>& toy_names() {
  static const std::vector<std::string> names = {"credit_risk", "heart_screening", "wine_grade"};
  return names;
}

inline std::string toy_label(const std::string& name) {
  if (name == "credit_risk") return "outcome";
  if (name == "heart_screening") return "disease";
  return "grade";
}
inline DatasetTable load_toy(const std::string& name) { return load_csv(toy_dataset(name), toy_label(name), ""); }

// Fresh, empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("vxai_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

inline void spit(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
}

// Standard-normal design matrix.
inline MatrixXd gaussian_rows(Index n, Index p, std::uint64_t seed) {
  Rng rng(seed);
  MatrixXd x(n, p);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < p; ++j) x(i, j) = rng.normal();
  }
  return x;
}

// Two-class predictor whose class-1 probability is the sigmoid of w.x + b.
inline FunctionPredictor logistic_model(const VectorXd& w, double b) {
  return FunctionPredictor(w.size(), 2, [w, b](const MatrixXd& rows) {
    MatrixXd out(rows.rows(), 2);
    for (Index i = 0; i < rows.rows(); ++i) {
      const double p1 = 1.0 / (1.0 + std::exp(-(rows.row(i).dot(w) + b)));
      out(i, 0) = 1.0 - p1;
      out(i, 1) = p1;
    }
    return out;
  });
}

// Small nonlinear model with interactions, so Shapley values are not just
// the linear terms.
inline FunctionPredictor interaction_model(Index p, std::uint64_t seed) {
  Rng rng(seed);
  VectorXd w(p);
  for (Index j = 0; j < p; ++j) w(j) = rng.normal();
  const double pair = rng.normal();
  return FunctionPredictor(p, 2, [w, pair, p](const MatrixXd& rows) {
    MatrixXd out(rows.rows(), 2);
    for (Index i = 0; i < rows.rows(); ++i) {
      double z = rows.row(i).dot(w);
      if (p >= 2) z += pair * rows(i, 0) * rows(i, 1);
      if (p >= 3) z += 0.5 * std::tanh(rows(i, 2)) * rows(i, p - 1);
      const double p1 = 1.0 / (1.0 + std::exp(-z));
      out(i, 0) = 1.0 - p1;
      out(i, 1) = p1;
    }
    return out;
  });
}

// Dataset table from a numeric matrix plus integer labels.
inline DatasetTable numeric_table(const MatrixXd& x, const std::vector<int>& labels, const std::string& id,
                                  const std::string& domain = "") {
  DatasetTable t;
  t.dataset_id = id;
  t.domain_tag = domain;
  for (Index j = 0; j < x.cols(); ++j) {
    t.column_names.push_back("x" + std::to_string(j));
    t.column_kinds.push_back(ColumnKind::numeric);
  }
  t.column_names.push_back("label");
  t.column_kinds.push_back(ColumnKind::categorical);
  t.label_column = static_cast<std::size_t>(x.cols());
  for (Index i = 0; i < x.rows(); ++i) {
    std::vector<Cell> row;
    for (Index j = 0; j < x.cols(); ++j) row.emplace_back(x(i, j));
    row.emplace_back(std::to_string(labels[static_cast<std::size_t>(i)]));
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline std::string numeric_csv(const MatrixXd& x, const std::vector<int>& labels) {
  std::ostringstream out;
  out.precision(17);
  for (Index j = 0; j < x.cols(); ++j) out << "x" << j << ",";
  out << "label\n";
  for (Index i = 0; i < x.rows(); ++i) {
    for (Index j = 0; j < x.cols(); ++j) out << x(i, j) << ",";
    out << labels[static_cast<std::size_t>(i)] << "\n";
  }
  return out.str();
}

// Reference PDP: for every grid value, overwrite the column row by row and
// average single-row predictions.
inline VectorXd brute_force_pdp(const Predictor& model, const MatrixXd& rows, Index feature, const VectorXd& grid,
                                int cls) {
  VectorXd out(grid.size());
  for (Index g = 0; g < grid.size(); ++g) {
    double total = 0.0;
    for (Index i = 0; i < rows.rows(); ++i) {
      VectorXd x = rows.row(i).transpose();
      x(feature) = grid(g);
      total += predict_proba(model, x)(cls);
    }
    out(g) = total / static_cast<double>(rows.rows());
  }
  return out;
}

// Reference binary entropy in bits.
inline double entropy_bits(const std::vector<double>& shares) {
  double h = 0.0;
  for (double s : shares) {
    if (s > 0.0) h -= s * std::log2(s);
  }
  return h;
}

}  // namespace vxai::testing

#endif  // VXAI_TESTS_HELPERS_HPP_

#ifndef VXAI_DATA_INGEST_HPP_
#define VXAI_DATA_INGEST_HPP_

#include "vxai/core.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace vxai {

enum class ColumnKind { numeric, categorical };

// A raw cell: missing, a parsed real, or a category token.
using Cell = std::variant<std::monostate, double, std::string>;

inline bool is_missing(const Cell& cell) { return std::holds_alternative<std::monostate>(cell); }

struct DatasetTable {
  std::string dataset_id;
  std::vector<std::string> column_names;
  std::vector<ColumnKind> column_kinds;
  std::size_t label_column = 0;
  std::vector<std::vector<Cell>> rows;
  std::string domain_tag;

  std::size_t row_count() const { return rows.size(); }
  // Non-label columns.
  std::size_t feature_column_count() const { return column_names.size() - 1; }
};

// Label tokens in class-id order.
std::vector<std::string> class_names(const DatasetTable& table);
std::vector<int> class_labels(const DatasetTable& table);

// Throws MissingLabelColumn, RaggedRow, EmptyDataset, SingleClassLabel.
void validate(const DatasetTable& table);

// Parses CSV text; dataset_id also prefixes diagnostics.
DatasetTable parse_csv(std::string_view text, const std::string& dataset_id,
                       const std::string& label_column, const std::string& domain_tag);
DatasetTable load_csv(const std::filesystem::path& path, const std::string& label_column,
                      const std::string& domain_tag);

// Splits one CSV record honouring quotes. Exposed for tests.
std::vector<std::vector<std::string>> split_csv_records(std::string_view text);

bool is_missing_marker(std::string_view text);

struct PreprocessConfig {
  std::size_t category_cap = 20;
};

struct NormalizationParams {
  double mean = 0.0;
  double std = 1.0;
};

inline constexpr std::string_view kOtherLevel = "__other__";

struct FeatureMatrix {
  MatrixXd matrix;
  std::vector<std::string> feature_names;
  // Index into DatasetTable::column_names for every encoded feature.
  std::vector<std::size_t> source_column;
  std::vector<bool> numeric;
  std::vector<int> labels;
  std::vector<std::string> class_names;
  std::vector<NormalizationParams> normalization;
  // Columns removed for zero variance, by name.
  std::vector<std::string> dropped_columns;

  Index rows() const { return matrix.rows(); }
  Index cols() const { return matrix.cols(); }
  int class_count() const { return static_cast<int>(class_names.size()); }

  // Encoded features that share a source column (one-hot groups), in order.
  std::vector<std::vector<Index>> feature_groups() const;
  FeatureMatrix subset(const std::vector<std::size_t>& row_indices) const;
};

FeatureMatrix preprocess(const DatasetTable& table, const PreprocessConfig& config);

// Maps a z-normalised value of feature j back to its original scale.
double denormalize(const FeatureMatrix& features, Index feature, double value);

struct DatasetProfile {
  std::string dataset_id;
  std::size_t n_rows = 0;
  std::size_t n_features = 0;
  double numeric_ratio = 0.0;
  double categorical_ratio = 0.0;
  double missing_ratio = 0.0;
  double sparsity = 0.0;
  std::size_t n_classes = 0;
  double class_balance_entropy = 0.0;
  double mean_abs_skewness = 0.0;
  double mean_feature_correlation = 0.0;
  std::string domain_tag;

  bool operator==(const DatasetProfile&) const = default;
};

DatasetProfile extract_profile(const DatasetTable& table);

}  // namespace vxai

#endif  // VXAI_DATA_INGEST_HPP_

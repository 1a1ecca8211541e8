#include "vxai/data_ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

namespace vxai {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

std::optional<double> parse_real(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

struct Record {
  std::vector<std::string> fields;
  std::size_t line = 0;
};

std::vector<Record> split_records_with_lines(std::string_view text) {
  std::vector<Record> records;
  Record current;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  std::size_t line = 1;
  current.line = 1;

  auto end_field = [&] {
    current.fields.push_back(field);
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    const bool blank = current.fields.size() == 1 && trim(current.fields[0]).empty();
    if (!blank) records.push_back(std::move(current));
    current = Record{};
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    if (c == '"' && !field_started) {
      in_quotes = true;
      field_started = true;
    } else if (c == ',') {
      end_field();
    } else if (c == '\r') {
      // CRLF line ends.
    } else if (c == '\n') {
      end_record();
      ++line;
      current.line = line;
    } else {
      field.push_back(c);
      if (c != ' ' && c != '\t') field_started = true;
    }
  }
  if (!field.empty() || !current.fields.empty()) end_record();
  return records;
}

bool numeric_token_order(const std::vector<std::string>& tokens) {
  return std::all_of(tokens.begin(), tokens.end(),
                     [](const std::string& t) { return parse_real(t).has_value(); });
}

double median_of(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n == 0) return 0.0;
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double pearson_sorted_pairs(std::vector<std::pair<double, double>> pairs) {
  if (pairs.size() < 2) return 0.0;
  std::sort(pairs.begin(), pairs.end());
  const double n = static_cast<double>(pairs.size());
  double mx = 0.0;
  double my = 0.0;
  for (const auto& [x, y] : pairs) {
    mx += x;
    my += y;
  }
  mx /= n;
  my /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (const auto& [x, y] : pairs) {
    sxy += (x - mx) * (y - my);
    sxx += (x - mx) * (x - mx);
    syy += (y - my) * (y - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) return 0.0;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double skewness_sorted(std::vector<double> values) {
  if (values.size() < 2) return 0.0;
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double m2 = 0.0;
  double m3 = 0.0;
  for (double v : values) {
    const double d = v - mean;
    m2 += d * d;
    m3 += d * d * d;
  }
  m2 /= n;
  m3 /= n;
  if (m2 <= 1e-300) return 0.0;
  return m3 / std::pow(m2, 1.5);
}

}  // namespace

bool is_missing_marker(std::string_view text) {
  text = trim(text);
  if (text.empty()) return true;
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return lower == "na" || lower == "?" || lower == "nan";
}

std::vector<std::vector<std::string>> split_csv_records(std::string_view text) {
  std::vector<std::vector<std::string>> out;
  for (auto& r : split_records_with_lines(text)) out.push_back(std::move(r.fields));
  return out;
}

std::vector<std::string> class_names(const DatasetTable& table) {
  std::set<std::string> distinct;
  for (const auto& row : table.rows) {
    if (const auto* s = std::get_if<std::string>(&row[table.label_column])) distinct.insert(*s);
  }
  std::vector<std::string> names(distinct.begin(), distinct.end());
  if (numeric_token_order(names)) {
    std::stable_sort(names.begin(), names.end(), [](const std::string& a, const std::string& b) {
      return *parse_real(a) < *parse_real(b);
    });
  }
  return names;
}

std::vector<int> class_labels(const DatasetTable& table) {
  const auto names = class_names(table);
  std::vector<int> labels;
  labels.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    const auto& token = std::get<std::string>(row[table.label_column]);
    labels.push_back(static_cast<int>(std::find(names.begin(), names.end(), token) - names.begin()));
  }
  return labels;
}

void validate(const DatasetTable& table) {
  if (table.label_column >= table.column_names.size()) {
    throw Error(ErrorCode::MissingLabelColumn, "label column index out of range");
  }
  if (table.rows.empty() || table.column_names.size() < 2) {
    throw Error(ErrorCode::EmptyDataset, "dataset '" + table.dataset_id + "' has no data rows or no feature columns");
  }
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    if (table.rows[i].size() != table.column_names.size()) {
      throw Error(ErrorCode::RaggedRow, "row " + std::to_string(i) + " has wrong arity");
    }
  }
  if (class_names(table).size() < 2) {
    throw Error(ErrorCode::SingleClassLabel, "dataset '" + table.dataset_id + "' has fewer than two label values");
  }
}

DatasetTable parse_csv(std::string_view text, const std::string& dataset_id,
                       const std::string& label_column, const std::string& domain_tag) {
  auto records = split_records_with_lines(text);
  if (records.empty()) throw Error(ErrorCode::EmptyDataset, "no header row");

  DatasetTable table;
  table.dataset_id = dataset_id;
  table.domain_tag = domain_tag;
  for (const auto& name : records.front().fields) table.column_names.emplace_back(trim(name));
  const std::size_t width = table.column_names.size();

  const auto label_it = std::find(table.column_names.begin(), table.column_names.end(), label_column);
  if (label_it == table.column_names.end()) {
    throw Error(ErrorCode::MissingLabelColumn, "label column '" + label_column + "' not in header");
  }
  table.label_column = static_cast<std::size_t>(label_it - table.column_names.begin());

  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].fields.size() != width) {
      throw Error(ErrorCode::RaggedRow, "line " + std::to_string(records[r].line) + ": expected " +
                                            std::to_string(width) + " fields, got " +
                                            std::to_string(records[r].fields.size()));
    }
  }

  // A column is numeric iff every non-missing cell parses as a finite real.
  table.column_kinds.assign(width, ColumnKind::numeric);
  for (std::size_t c = 0; c < width; ++c) {
    if (c == table.label_column) {
      table.column_kinds[c] = ColumnKind::categorical;
      continue;
    }
    for (std::size_t r = 1; r < records.size(); ++r) {
      const auto& f = records[r].fields[c];
      if (!is_missing_marker(f) && !parse_real(f)) {
        table.column_kinds[c] = ColumnKind::categorical;
        break;
      }
    }
  }

  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& fields = records[r].fields;
    // Rows without a label cannot be used for supervised benchmarking.
    if (is_missing_marker(fields[table.label_column])) continue;
    std::vector<Cell> row(width);
    for (std::size_t c = 0; c < width; ++c) {
      const std::string_view f = trim(fields[c]);
      if (c == table.label_column) {
        row[c] = std::string(f);
      } else if (is_missing_marker(f)) {
        row[c] = std::monostate{};
      } else if (table.column_kinds[c] == ColumnKind::numeric) {
        row[c] = *parse_real(f);
      } else {
        row[c] = std::string(f);
      }
    }
    table.rows.push_back(std::move(row));
  }
  validate(table);
  return table;
}

DatasetTable load_csv(const std::filesystem::path& path, const std::string& label_column,
                      const std::string& domain_tag) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_csv(buffer.str(), path.stem().string(), label_column, domain_tag);
}

std::vector<std::vector<Index>> FeatureMatrix::feature_groups() const {
  std::vector<std::vector<Index>> groups;
  for (Index j = 0; j < cols(); ++j) {
    if (j > 0 && source_column[j] == source_column[j - 1] && !numeric[j]) {
      groups.back().push_back(j);
    } else {
      groups.push_back({j});
    }
  }
  return groups;
}

FeatureMatrix FeatureMatrix::subset(const std::vector<std::size_t>& row_indices) const {
  FeatureMatrix out = *this;
  out.matrix.resize(static_cast<Index>(row_indices.size()), cols());
  out.labels.clear();
  for (std::size_t i = 0; i < row_indices.size(); ++i) {
    out.matrix.row(static_cast<Index>(i)) = matrix.row(static_cast<Index>(row_indices[i]));
    out.labels.push_back(labels[row_indices[i]]);
  }
  return out;
}

FeatureMatrix preprocess(const DatasetTable& table, const PreprocessConfig& config) {
  if (config.category_cap < 2) {
    throw Error(ErrorCode::ConfigInvalid, "category_cap must be at least 2");
  }
  validate(table);
  const std::size_t n = table.rows.size();

  FeatureMatrix out;
  out.class_names = class_names(table);
  out.labels = class_labels(table);

  std::vector<std::vector<double>> columns;
  auto add_feature = [&](std::string name, std::size_t source, bool numeric,
                         NormalizationParams params, std::vector<double> values) {
    out.feature_names.push_back(std::move(name));
    out.source_column.push_back(source);
    out.numeric.push_back(numeric);
    out.normalization.push_back(params);
    columns.push_back(std::move(values));
  };

  for (std::size_t c = 0; c < table.column_names.size(); ++c) {
    if (c == table.label_column) continue;
    const std::string& name = table.column_names[c];

    if (table.column_kinds[c] == ColumnKind::numeric) {
      std::vector<double> present;
      for (const auto& row : table.rows) {
        if (const auto* v = std::get_if<double>(&row[c])) present.push_back(*v);
      }
      const double fill = median_of(present);
      std::vector<double> values(n);
      for (std::size_t r = 0; r < n; ++r) {
        const auto* v = std::get_if<double>(&table.rows[r][c]);
        values[r] = v ? *v : fill;
      }
      const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
      double var = 0.0;
      for (double v : values) var += (v - mean) * (v - mean);
      const double sd = std::sqrt(var / static_cast<double>(n));
      if (!(sd > 1e-12 * std::max(1.0, std::abs(mean)))) {
        out.dropped_columns.push_back(name);
        continue;
      }
      for (double& v : values) v = (v - mean) / sd;
      add_feature(name, c, true, {mean, sd}, std::move(values));
      continue;
    }

    std::map<std::string, std::size_t> counts;
    for (const auto& row : table.rows) {
      if (const auto* s = std::get_if<std::string>(&row[c])) ++counts[*s];
    }
    // Mode; ties go to the lexicographically smallest level.
    std::string mode;
    std::size_t best = 0;
    for (const auto& [level, count] : counts) {
      if (count > best) {
        best = count;
        mode = level;
      }
    }
    std::vector<std::string> imputed(n);
    for (std::size_t r = 0; r < n; ++r) {
      const auto* s = std::get_if<std::string>(&table.rows[r][c]);
      imputed[r] = s ? *s : mode;
    }
    if (mode.empty() && counts.empty()) {
      out.dropped_columns.push_back(name);
      continue;
    }
    counts.clear();
    for (const auto& s : imputed) ++counts[s];

    std::vector<std::pair<std::string, std::size_t>> by_freq(counts.begin(), counts.end());
    std::stable_sort(by_freq.begin(), by_freq.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    std::set<std::string> kept;
    bool has_other = false;
    for (std::size_t i = 0; i < by_freq.size(); ++i) {
      if (i < config.category_cap) {
        kept.insert(by_freq[i].first);
      } else {
        has_other = true;
      }
    }
    std::vector<std::string> levels(kept.begin(), kept.end());
    if (has_other) levels.emplace_back(kOtherLevel);
    if (levels.size() < 2) {
      out.dropped_columns.push_back(name);
      continue;
    }
    for (const auto& level : levels) {
      std::vector<double> values(n);
      for (std::size_t r = 0; r < n; ++r) {
        const bool is_other = kept.count(imputed[r]) == 0;
        values[r] = (level == kOtherLevel ? is_other : imputed[r] == level) ? 1.0 : 0.0;
      }
      add_feature(name + "=" + level, c, false, {0.0, 1.0}, std::move(values));
    }
  }

  out.matrix.resize(static_cast<Index>(n), static_cast<Index>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j) {
    out.matrix.col(static_cast<Index>(j)) = Eigen::Map<const VectorXd>(columns[j].data(), static_cast<Index>(n));
  }
  return out;
}

double denormalize(const FeatureMatrix& features, Index feature, double value) {
  const auto& p = features.normalization.at(static_cast<std::size_t>(feature));
  return value * p.std + p.mean;
}

DatasetProfile extract_profile(const DatasetTable& table) {
  validate(table);
  DatasetProfile profile;
  profile.dataset_id = table.dataset_id;
  profile.domain_tag = table.domain_tag;
  profile.n_rows = table.rows.size();
  profile.n_features = table.feature_column_count();

  std::vector<std::size_t> numeric_cols;
  for (std::size_t c = 0; c < table.column_names.size(); ++c) {
    if (c != table.label_column && table.column_kinds[c] == ColumnKind::numeric) numeric_cols.push_back(c);
  }
  const double d = static_cast<double>(profile.n_features);
  profile.numeric_ratio = static_cast<double>(numeric_cols.size()) / d;
  profile.categorical_ratio = 1.0 - profile.numeric_ratio;

  std::size_t missing = 0;
  std::size_t zeros = 0;
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c == table.label_column) continue;
      if (is_missing(row[c])) {
        ++missing;
      } else if (const auto* v = std::get_if<double>(&row[c]); v && *v == 0.0) {
        ++zeros;
      }
    }
  }
  const double cells = static_cast<double>(profile.n_rows) * d;
  profile.missing_ratio = static_cast<double>(missing) / cells;
  profile.sparsity = static_cast<double>(zeros) / cells;

  const auto labels = class_labels(table);
  profile.n_classes = class_names(table).size();
  std::vector<std::size_t> counts(profile.n_classes, 0);
  for (int y : labels) ++counts[static_cast<std::size_t>(y)];
  double entropy = 0.0;
  for (std::size_t count : counts) {
    if (count == 0) continue;
    const double q = static_cast<double>(count) / static_cast<double>(labels.size());
    entropy -= q * std::log2(q);
  }
  profile.class_balance_entropy =
      std::clamp(entropy / std::log2(static_cast<double>(profile.n_classes)), 0.0, 1.0);
  // Equal class counts give exactly one.
  if (std::all_of(counts.begin(), counts.end(), [&](std::size_t c) { return c == counts.front(); })) {
    profile.class_balance_entropy = 1.0;
  }

  auto column_values = [&](std::size_t c) {
    std::vector<double> values;
    for (const auto& row : table.rows) {
      if (const auto* v = std::get_if<double>(&row[c])) values.push_back(*v);
    }
    return values;
  };

  if (!numeric_cols.empty()) {
    double total = 0.0;
    for (std::size_t c : numeric_cols) total += std::abs(skewness_sorted(column_values(c)));
    profile.mean_abs_skewness = total / static_cast<double>(numeric_cols.size());
  }

  if (numeric_cols.size() >= 2) {
    double total = 0.0;
    std::size_t pairs = 0;
    for (std::size_t a = 0; a < numeric_cols.size(); ++a) {
      for (std::size_t b = a + 1; b < numeric_cols.size(); ++b) {
        std::vector<std::pair<double, double>> xy;
        for (const auto& row : table.rows) {
          const auto* x = std::get_if<double>(&row[numeric_cols[a]]);
          const auto* y = std::get_if<double>(&row[numeric_cols[b]]);
          if (x && y) xy.emplace_back(*x, *y);
        }
        total += std::abs(pearson_sorted_pairs(std::move(xy)));
        ++pairs;
      }
    }
    profile.mean_feature_correlation = std::clamp(total / static_cast<double>(pairs), 0.0, 1.0);
  }
  return profile;
}

}  // namespace vxai

#ifndef VXAI_REPOSITORY_STORE_HPP_
#define VXAI_REPOSITORY_STORE_HPP_

#include "vxai/core.hpp"
#include "vxai/data_ingest.hpp"
#include "vxai/model_zoo.hpp"
#include "vxai/persona_engine.hpp"
#include "vxai/xai_metrics.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace vxai {

inline constexpr int kRepositoryFormatVersion = 1;
inline constexpr std::string_view kRepositoryExtension = ".vxai.jsonl";

struct RepositoryEntry {
  std::string dataset_id;
  DatasetProfile profile;
  QuantRecord quant;
  QualRecord qual;
  std::map<ModelId, PerformanceMetrics> model_performance;
  std::string created_at;
  int format_version = kRepositoryFormatVersion;
  // Encoded feature names and the normalised global importance per method.
  std::vector<std::string> feature_names;
  std::map<MethodId, std::vector<double>> global_importance;

  bool operator==(const RepositoryEntry&) const = default;
};

// Throws InvalidEntry.
void validate_entry(const RepositoryEntry& entry);

class Repository {
 public:
  // Validates, then inserts or replaces the entry with the same dataset_id.
  void put_entry(RepositoryEntry entry);
  const RepositoryEntry* find(std::string_view dataset_id) const;
  // Sorted by dataset_id.
  std::vector<RepositoryEntry> list_entries() const;
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  bool operator==(const Repository&) const = default;

 private:
  std::map<std::string, RepositoryEntry, std::less<>> entries_;
};

std::string entry_to_json(const RepositoryEntry& entry);
// line_number is only used in CorruptRepository messages.
RepositoryEntry entry_from_json(std::string_view text, std::size_t line_number = 0);

// One entry per line, sorted by dataset_id. Blank lines are skipped.
std::string serialize_repository(const Repository& repo);
Repository parse_repository(std::string_view text);

// Throws Io when the file cannot be read.
Repository load_repository(const std::filesystem::path& path);
// Writes path + ".partial" and renames it over path.
void save_repository(const Repository& repo, const std::filesystem::path& path);

}  // namespace vxai

#endif  // VXAI_REPOSITORY_STORE_HPP_

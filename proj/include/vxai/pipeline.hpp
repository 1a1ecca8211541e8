#ifndef VXAI_PIPELINE_HPP_
#define VXAI_PIPELINE_HPP_

#include "vxai/config.hpp"
#include "vxai/data_ingest.hpp"
#include "vxai/explainers.hpp"
#include "vxai/llm_backend.hpp"
#include "vxai/persona_engine.hpp"
#include "vxai/repository_store.hpp"
#include "vxai/survey_priors.hpp"

#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace vxai {

// A CSV plus the metadata its optional `<path>.meta.json` sidecar carries:
// {"label_column": ..., "domain_tag": ..., "dataset_id": ...}.
struct DatasetSource {
  std::filesystem::path path;
  std::string label_column;  // empty = last column
  std::string domain_tag;
  std::string dataset_id;    // empty = file stem
};

DatasetSource resolve_source(const std::filesystem::path& csv_path);
DatasetTable load_dataset(const DatasetSource& source);

std::unique_ptr<LlmBackend> make_backend(const LlmSettings& settings);
PersonaEngineConfig engine_config(const RunConfig& config, AuditLog* audit);
SurveyPriors load_priors_files(const std::vector<std::string>& paths);

// Per-dataset seed; independent of which other datasets are in the run.
std::uint64_t dataset_seed(std::uint64_t master_seed, const std::string& dataset_id);

struct PersonaPool {
  std::uint64_t seed = 0;
  std::size_t n_backstories = 0;
  std::vector<std::string> failed_ids;
  std::vector<PersonaProfile> personas;

  bool operator==(const PersonaPool&) const = default;
};

// generate -> extract -> select_balanced. Throws InsufficientPersonas when
// fewer than m profiles survive extraction.
PersonaPool build_persona_pool(const RunConfig& config, std::uint64_t master_seed, LlmBackend& backend,
                               AuditLog* audit);
std::string persona_pool_json(const PersonaPool& pool);
PersonaPool parse_persona_pool(std::string_view text);
PersonaPool load_persona_pool(const std::filesystem::path& path);
// Atomic, like save_repository.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

struct DatasetBenchmark {
  RepositoryEntry entry;
  std::map<MethodId, Explanation> explanations;
  std::vector<PersonaResponse> responses;
};

// Preprocess, train both models, explain with all four methods, score them,
// run the persona survey and assemble the repository entry.
DatasetBenchmark benchmark_dataset(const DatasetTable& table, const RunConfig& config, std::uint64_t master_seed,
                                   const std::vector<PersonaProfile>& personas, LlmBackend& backend,
                                   AuditLog* audit);

struct BenchmarkOutcome {
  Repository repository;
  std::vector<std::string> succeeded;
  // (path, reason)
  std::vector<std::pair<std::string, std::string>> failures;
};

using ProgressFn = std::function<void(const std::string&)>;

// Failures are isolated per dataset. Datasets run config.workers at a time;
// entries are merged in input order.
BenchmarkOutcome run_benchmark(const std::vector<DatasetSource>& sources, const RunConfig& config,
                               std::uint64_t master_seed, Repository repository,
                               const std::vector<PersonaProfile>& personas, LlmBackend& backend, AuditLog* audit,
                               const ProgressFn& progress = {});

}  // namespace vxai

#endif  // VXAI_PIPELINE_HPP_

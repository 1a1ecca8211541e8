#ifndef VXAI_CONFIG_HPP_
#define VXAI_CONFIG_HPP_

#include "vxai/data_ingest.hpp"
#include "vxai/explainers.hpp"
#include "vxai/llm_backend.hpp"
#include "vxai/model_zoo.hpp"
#include "vxai/recommender.hpp"
#include "vxai/xai_metrics.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace vxai {

struct PersonaSettings {
  std::size_t n_backstories = 1000;
  std::size_t m_selected = 100;
  std::size_t max_in_flight = 4;
  int max_parse_attempts = 3;
  // Reuse a pool written by `personas` instead of generating one.
  std::string pool_path;
};

struct LlmSettings {
  std::string backend = "stub";  // "stub" or "http"
  std::string base_url = "https://api.openai.com/v1";
  std::string model = "gpt-4o-mini";
  int timeout_seconds = 30;
  int retry_attempts = 3;
  int retry_base_delay_ms = 1000;
  std::string audit_log;
  std::map<MethodId, int> stub_method_bias;
};

struct PathSettings {
  std::string repository = "repository.vxai.jsonl";
  std::vector<std::string> priors = {"data/priors/technique_frequency.json", "data/priors/domain_methods.json"};
  std::string output_dir = "out";
};

struct RunConfig {
  std::optional<std::uint64_t> seed;
  PreprocessConfig preprocess;
  HyperParams models;
  ExplainerConfig explainers;
  MetricConfig metrics;
  PersonaSettings personas;
  LlmSettings llm;
  ScoreWeights weights;
  std::size_t k = 5;
  PathSettings paths;
  std::size_t workers = 1;
  // Stamped on repository entries. Empty falls back to SOURCE_DATE_EPOCH,
  // then to the Unix epoch, so reruns stay byte-identical.
  std::string created_at;
};

// Throws ConfigInvalid for malformed JSON, unknown keys and out-of-range
// values. Missing keys keep their defaults.
RunConfig parse_config(std::string_view json_text);
RunConfig load_config(const std::filesystem::path& path);
void validate_config(const RunConfig& config);

// The effective configuration with every default spelled out.
std::string dump_config(const RunConfig& config);

std::string resolve_created_at(const RunConfig& config);

}  // namespace vxai

#endif  // VXAI_CONFIG_HPP_

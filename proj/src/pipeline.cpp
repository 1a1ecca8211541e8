#include "vxai/pipeline.hpp"

#include "vxai/model_zoo.hpp"
#include "vxai/rng.hpp"
#include "vxai/xai_metrics.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <cstdlib>
#include <exception>
#include <fstream>
#include <future>
#include <sstream>

namespace vxai {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

DatasetSource resolve_source(const std::filesystem::path& csv_path) {
  DatasetSource source;
  source.path = csv_path;
  std::filesystem::path sidecar = csv_path;
  sidecar += ".meta.json";
  if (!std::filesystem::exists(sidecar)) return source;
  json meta;
  try {
    meta = json::parse(read_text(sidecar));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigInvalid, sidecar.string() + ": " + e.what());
  }
  if (!meta.is_object()) throw Error(ErrorCode::ConfigInvalid, sidecar.string() + ": expected an object");
  for (const auto& [key, value] : meta.items()) {
    if (!value.is_string()) throw Error(ErrorCode::ConfigInvalid, sidecar.string() + ": " + key + " must be a string");
    if (key == "label_column") {
      source.label_column = value.get<std::string>();
    } else if (key == "domain_tag") {
      source.domain_tag = value.get<std::string>();
    } else if (key == "dataset_id") {
      source.dataset_id = value.get<std::string>();
    } else {
      throw Error(ErrorCode::ConfigInvalid, sidecar.string() + ": unknown key " + key);
    }
  }
  return source;
}

DatasetTable load_dataset(const DatasetSource& source) {
  const std::string text = read_text(source.path);
  std::string label = source.label_column;
  if (label.empty()) {
    const auto first_line = text.substr(0, text.find('\n'));
    const auto header = split_csv_records(first_line);
    if (header.empty() || header.front().empty()) {
      throw Error(ErrorCode::EmptyDataset, source.path.string() + ": no header row");
    }
    label = header.front().back();
    if (!label.empty() && label.back() == '\r') label.pop_back();
  }
  const std::string id = source.dataset_id.empty() ? source.path.stem().string() : source.dataset_id;
  return parse_csv(text, id, label, source.domain_tag);
}

std::unique_ptr<LlmBackend> make_backend(const LlmSettings& settings) {
  if (settings.backend == "stub") return std::make_unique<StubBackend>(StubConfig{settings.stub_method_bias});
  HttpBackendConfig http;
  http.base_url = settings.base_url;
  http.model = settings.model;
  http.timeout = std::chrono::seconds(settings.timeout_seconds);
  if (const char* key = std::getenv(kApiKeyEnv)) http.api_key = key;
  return std::make_unique<HttpChatBackend>(http);
}

PersonaEngineConfig engine_config(const RunConfig& config, AuditLog* audit) {
  PersonaEngineConfig engine;
  engine.model = config.llm.backend == "stub" ? std::string{} : config.llm.model;
  engine.retry.max_attempts = config.llm.retry_attempts;
  engine.retry.base_delay = std::chrono::milliseconds(config.llm.retry_base_delay_ms);
  engine.max_parse_attempts = config.personas.max_parse_attempts;
  engine.max_in_flight = config.personas.max_in_flight;
  engine.audit = audit;
  return engine;
}

SurveyPriors load_priors_files(const std::vector<std::string>& paths) {
  SurveyPriors merged;
  for (const auto& p : paths) merged = merge_priors(merged, load_priors(p));
  return merged;
}

std::uint64_t dataset_seed(std::uint64_t master_seed, const std::string& dataset_id) {
  return derive_seed(master_seed, fnv1a(dataset_id));
}

// ---- personas ----------------------------------------------------------------

PersonaPool build_persona_pool(const RunConfig& config, std::uint64_t master_seed, LlmBackend& backend,
                               AuditLog* audit) {
  if (config.personas.m_selected > config.personas.n_backstories) {
    throw Error(ErrorCode::InsufficientPersonas,
                fmt::format("cannot select {} personas from {} backstories", config.personas.m_selected,
                            config.personas.n_backstories));
  }
  const PersonaEngineConfig engine = engine_config(config, audit);
  PersonaPool pool;
  pool.seed = derive_seed(master_seed, seed_offset::kPersonas);
  pool.n_backstories = config.personas.n_backstories;
  const auto stories = generate_backstories(config.personas.n_backstories, backend, pool.seed, engine);
  auto extracted = extract_profiles(stories, backend, engine);
  pool.failed_ids = std::move(extracted.failed_ids);
  pool.personas = select_balanced(extracted.profiles, config.personas.m_selected);
  return pool;
}

std::string persona_pool_json(const PersonaPool& pool) {
  ordered_json j;
  j["format_version"] = 1;
  j["seed"] = pool.seed;
  j["n_backstories"] = pool.n_backstories;
  j["failed_ids"] = pool.failed_ids;
  std::array<std::size_t, kStrata> counts{};
  for (const auto& p : pool.personas) ++counts[stratum_of(p)];
  j["strata_counts"] = counts;
  j["personas"] = ordered_json::array();
  for (const auto& p : pool.personas) {
    j["personas"].push_back({{"persona_id", p.persona_id},
                             {"age_bracket", to_token(p.age_bracket)},
                             {"profession", p.profession},
                             {"ai_expertise", to_token(p.ai_expertise)},
                             {"explanation_preference", to_token(p.explanation_preference)},
                             {"backstory_ref", p.backstory_ref}});
  }
  return j.dump(2) + "\n";
}

PersonaPool parse_persona_pool(std::string_view text) {
  try {
    const json j = json::parse(text);
    if (j.at("format_version").get<int>() != 1) throw Error(ErrorCode::VersionMismatch, "unknown persona pool version");
    PersonaPool pool;
    pool.seed = j.at("seed").get<std::uint64_t>();
    pool.n_backstories = j.at("n_backstories").get<std::size_t>();
    pool.failed_ids = j.at("failed_ids").get<std::vector<std::string>>();
    for (const auto& p : j.at("personas")) {
      PersonaProfile profile;
      profile.persona_id = p.at("persona_id").get<std::string>();
      const auto age = parse_age_bracket(p.at("age_bracket").get<std::string>());
      const auto expertise = parse_expertise(p.at("ai_expertise").get<std::string>());
      const auto preference = parse_preference(p.at("explanation_preference").get<std::string>());
      if (!age || !expertise || !preference) {
        throw Error(ErrorCode::ConfigInvalid, "persona " + profile.persona_id + " has an invalid field");
      }
      profile.age_bracket = *age;
      profile.profession = p.at("profession").get<std::string>();
      profile.ai_expertise = *expertise;
      profile.explanation_preference = *preference;
      profile.backstory_ref = p.at("backstory_ref").get<std::string>();
      pool.personas.push_back(std::move(profile));
    }
    return pool;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigInvalid, std::string("persona pool: ") + e.what());
  }
}

PersonaPool load_persona_pool(const std::filesystem::path& path) { return parse_persona_pool(read_text(path)); }

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path partial = path;
  partial += ".partial";
  {
    std::ofstream out(partial, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + partial.string());
    out << contents;
    out.flush();
    if (!out) throw Error(ErrorCode::Io, "write failed for " + partial.string());
  }
  std::filesystem::rename(partial, path);
}

// ---- benchmark -----------------------------------------------------------------

DatasetBenchmark benchmark_dataset(const DatasetTable& table, const RunConfig& config, std::uint64_t master_seed,
                                   const std::vector<PersonaProfile>& personas, LlmBackend& backend,
                                   AuditLog* audit) {
  validate(table);
  const std::uint64_t seed = dataset_seed(master_seed, table.dataset_id);
  const FeatureMatrix features = preprocess(table, config.preprocess);
  if (features.cols() == 0) throw Error(ErrorCode::EmptyDataset, table.dataset_id + ": no usable feature columns");

  const std::uint64_t split_seed = derive_seed(seed, seed_offset::kSplit);
  const double test_fraction = 0.2;
  const Split split = stratified_split(features.labels, test_fraction, split_seed);
  const FeatureMatrix train_set = features.subset(split.train);
  const FeatureMatrix test_set = features.subset(split.test);

  std::map<ModelId, TrainedModel> models;
  std::map<ModelId, PerformanceMetrics> performance;
  for (ModelId id : kAllModels) {
    auto model = train(train_set, id, config.models, derive_seed(seed, seed_offset::kTrain));
    performance[id] = evaluate(model, features, split_seed, test_fraction);
    models.emplace(id, std::move(model));
  }
  const ModelId scored = best_model(performance);

  ExplainContext ctx;
  ctx.model = &models.at(scored);
  ctx.data = features.matrix;
  ctx.eval = test_set.matrix;
  ctx.eval_labels = test_set.labels;
  ctx.background = sample_background(train_set.matrix, config.explainers.shap.background_size,
                                     derive_seed(seed, seed_offset::kBackground));
  ctx.layout = FeatureLayout::from(features);
  ctx.explained_class = majority_class(train_set.labels, features.class_count());

  const std::uint64_t explain_seed = derive_seed(seed, seed_offset::kExplain);
  const std::uint64_t metric_seed = derive_seed(seed, seed_offset::kMetrics);
  const auto instances =
      select_instances(ctx.eval.rows(), config.explainers.local_instances, derive_seed(explain_seed, 100));

  DatasetBenchmark result;
  std::map<MethodId, MethodMetrics> metrics;
  for (MethodId m : kAllMethods) {
    const auto offset = static_cast<std::uint64_t>(m);
    Explanation e = explain(m, ctx, instances, config.explainers, derive_seed(explain_seed, offset));
    MethodMetrics mm;
    mm.fidelity = fidelity(e, ctx, config.metrics, derive_seed(metric_seed, offset));
    mm.simplicity = simplicity(e, config.metrics.tau);
    mm.stability = stability(m, ctx, config.explainers, config.metrics, derive_seed(metric_seed, 10 + offset));
    metrics[m] = mm;
    result.explanations.emplace(m, std::move(e));
  }

  RepositoryEntry& entry = result.entry;
  entry.dataset_id = table.dataset_id;
  entry.profile = extract_profile(table);
  entry.quant = aggregate_quant(metrics, performance, static_cast<std::size_t>(features.cols()));
  entry.quant.metric_config = config.metrics;
  entry.quant.explain_seed = explain_seed;
  entry.quant.metric_seed = metric_seed;
  entry.model_performance = performance;
  entry.created_at = resolve_created_at(config);
  entry.feature_names = features.feature_names;
  for (const auto& [m, e] : result.explanations) {
    entry.global_importance[m] = std::vector<double>(e.global_importance.data(),
                                                     e.global_importance.data() + e.global_importance.size());
  }

  std::map<MethodId, ExplanationSummary> summaries;
  for (const auto& [m, e] : result.explanations) summaries[m] = summarize_explanation(e, features.feature_names);
  DatasetSummary summary;
  summary.dataset_id = table.dataset_id;
  summary.domain_tag = table.domain_tag.empty() ? "unspecified" : table.domain_tag;
  summary.n_rows = table.row_count();
  summary.n_features = static_cast<std::size_t>(features.cols());
  summary.n_classes = static_cast<std::size_t>(features.class_count());
  summary.target_description = fmt::format("the model predicts '{}', explanations refer to class '{}'",
                                           table.column_names[table.label_column],
                                           features.class_names[static_cast<std::size_t>(ctx.explained_class)]);
  result.responses = run_survey(personas, summaries, summary, backend, derive_seed(seed, seed_offset::kSurvey),
                                engine_config(config, audit));
  entry.qual = aggregate_qual(result.responses);

  validate_entry(entry);
  return result;
}

BenchmarkOutcome run_benchmark(const std::vector<DatasetSource>& sources, const RunConfig& config,
                               std::uint64_t master_seed, Repository repository,
                               const std::vector<PersonaProfile>& personas, LlmBackend& backend, AuditLog* audit,
                               const ProgressFn& progress) {
  BenchmarkOutcome outcome;
  const std::size_t window = std::max<std::size_t>(config.workers, 1);
  for (std::size_t start = 0; start < sources.size(); start += window) {
    const std::size_t end = std::min(sources.size(), start + window);
    std::vector<std::future<RepositoryEntry>> futures;
    for (std::size_t i = start; i < end; ++i) {
      futures.push_back(std::async(window == 1 ? std::launch::deferred : std::launch::async, [&, i] {
        const DatasetTable table = load_dataset(sources[i]);
        return benchmark_dataset(table, config, master_seed, personas, backend, audit).entry;
      }));
    }
    for (std::size_t i = start; i < end; ++i) {
      const std::string name = sources[i].path.string();
      try {
        RepositoryEntry entry = futures[i - start].get();
        const std::string id = entry.dataset_id;
        repository.put_entry(std::move(entry));
        outcome.succeeded.push_back(id);
        if (progress) progress("benchmarked " + id);
      } catch (const std::exception& e) {
        outcome.failures.emplace_back(name, e.what());
        if (progress) progress("failed " + name + ": " + e.what());
      }
    }
  }
  outcome.repository = std::move(repository);
  return outcome;
}

}  // namespace vxai

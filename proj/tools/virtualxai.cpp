// virtualxai: benchmark XAI methods on tabular datasets and recommend a
// model / explanation method pair for new ones.

#include "vxai/config.hpp"
#include "vxai/pipeline.hpp"
#include "vxai/recommender.hpp"
#include "vxai/report.hpp"
#include "vxai/repository_store.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;

namespace {

enum ExitCode : int { kOk = 0, kFatal = 1, kPartial = 2, kNoRepository = 3, kPersonaFailure = 4 };

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string repo;
  bool verbose = false;
};

vxai::RunConfig effective_config(const Globals& g) {
  vxai::RunConfig config = g.config_path.empty() ? vxai::RunConfig{} : vxai::load_config(g.config_path);
  if (g.seed) config.seed = g.seed;
  if (!g.repo.empty()) config.paths.repository = g.repo;
  vxai::validate_config(config);
  return config;
}

std::unique_ptr<vxai::AuditLog> open_audit(const vxai::RunConfig& config) {
  if (config.llm.audit_log.empty()) return nullptr;
  return std::make_unique<vxai::AuditLog>(config.llm.audit_log);
}

// Missing or empty repositories map to exit code 3.
std::optional<vxai::Repository> open_repository(const std::string& path) {
  if (!fs::exists(path)) {
    std::cerr << "error: repository " << path << " does not exist\n";
    return std::nullopt;
  }
  vxai::Repository repo = vxai::load_repository(path);
  if (repo.empty()) {
    std::cerr << "error: repository " << path << " is empty\n";
    return std::nullopt;
  }
  return repo;
}

int cmd_benchmark(const Globals& g, const std::vector<std::string>& datasets) {
  const vxai::RunConfig config = effective_config(g);
  if (!config.seed) throw vxai::Error(vxai::ErrorCode::ConfigInvalid, "benchmark needs a seed (--seed or config)");
  if (datasets.empty()) throw vxai::Error(vxai::ErrorCode::ConfigInvalid, "benchmark needs at least one dataset");

  std::vector<vxai::DatasetSource> sources;
  for (const auto& d : datasets) sources.push_back(vxai::resolve_source(d));

  auto backend = vxai::make_backend(config.llm);
  auto audit = open_audit(config);

  vxai::PersonaPool pool;
  try {
    pool = config.personas.pool_path.empty()
               ? vxai::build_persona_pool(config, *config.seed, *backend, audit.get())
               : vxai::load_persona_pool(config.personas.pool_path);
  } catch (const vxai::Error& e) {
    std::cerr << "error: persona pipeline failed: " << e.what() << "\n";
    return kPersonaFailure;
  }
  if (g.verbose) std::cerr << fmt::format("using {} personas\n", pool.personas.size());

  vxai::Repository repo;
  if (fs::exists(config.paths.repository)) repo = vxai::load_repository(config.paths.repository);

  vxai::ProgressFn progress;
  if (g.verbose) progress = [](const std::string& msg) { std::cerr << msg << "\n"; };
  auto outcome = vxai::run_benchmark(sources, config, *config.seed, std::move(repo), pool.personas, *backend,
                                     audit.get(), progress);
  vxai::save_repository(outcome.repository, config.paths.repository);

  for (const auto& [path, why] : outcome.failures) std::cerr << "failed: " << path << ": " << why << "\n";
  std::cout << fmt::format("{} of {} datasets benchmarked; repository {} has {} entries\n",
                           outcome.succeeded.size(), sources.size(), config.paths.repository,
                           outcome.repository.size());
  return outcome.failures.empty() ? kOk : kPartial;
}

int cmd_recommend(const Globals& g, const std::string& dataset, const std::string& out_dir) {
  const vxai::RunConfig config = effective_config(g);
  auto repo = open_repository(config.paths.repository);
  if (!repo) return kNoRepository;
  const vxai::SurveyPriors priors = vxai::load_priors_files(config.paths.priors);
  const vxai::DatasetTable table = vxai::load_dataset(vxai::resolve_source(dataset));
  const vxai::Recommendation rec = vxai::recommend(table, *repo, priors, config.weights, config.k);

  const fs::path dir = out_dir.empty() ? fs::path(config.paths.output_dir) : fs::path(out_dir);
  vxai::write_file_atomic(dir / ("recommendation_" + rec.dataset_id + ".json"), vxai::recommendation_json(rec));
  vxai::write_file_atomic(dir / ("recommendation_" + rec.dataset_id + ".txt"), vxai::recommendation_text(rec));
  std::cout << vxai::recommendation_text(rec);
  return kOk;
}

int cmd_personas(const Globals& g, const std::string& out_path) {
  const vxai::RunConfig config = effective_config(g);
  const std::uint64_t seed = config.seed.value_or(0);
  auto backend = vxai::make_backend(config.llm);
  auto audit = open_audit(config);
  vxai::PersonaPool pool;
  try {
    pool = vxai::build_persona_pool(config, seed, *backend, audit.get());
  } catch (const vxai::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kPersonaFailure;
  }
  fs::path path = out_path;
  if (path.empty()) {
    path = config.personas.pool_path.empty() ? fs::path(config.paths.output_dir) / "persona_pool.json"
                                             : fs::path(config.personas.pool_path);
  }
  vxai::write_file_atomic(path, vxai::persona_pool_json(pool));
  std::cout << fmt::format("{} personas selected from {} backstories ({} extraction failures) -> {}\n",
                           pool.personas.size(), pool.n_backstories, pool.failed_ids.size(), path.string());
  return kOk;
}

int cmd_report(const Globals& g, const std::string& out_dir) {
  const vxai::RunConfig config = effective_config(g);
  auto repo = open_repository(config.paths.repository);
  if (!repo) return kNoRepository;
  const fs::path dir = out_dir.empty() ? fs::path(config.paths.output_dir) : fs::path(out_dir);
  for (const auto& p : vxai::write_report(*repo, dir)) {
    if (g.verbose) std::cerr << "wrote " << p.string() << "\n";
  }
  std::cout << fmt::format("report for {} datasets written to {}\n", repo->size(), dir.string());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Benchmark XAI methods and recommend a model / explanation pair for tabular datasets"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--config", g.config_path, "JSON configuration file")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "master seed (overrides the config)");
  app.add_option("--repo", g.repo, "repository file (.vxai.jsonl)");
  app.add_flag("--verbose", g.verbose, "progress on stderr");

  std::vector<std::string> datasets;
  auto* benchmark = app.add_subcommand("benchmark", "benchmark datasets into the repository");
  benchmark->add_option("datasets", datasets, "CSV files (optional <file>.meta.json sidecars)")->required();

  std::string query;
  std::string recommend_out;
  auto* recommend = app.add_subcommand("recommend", "recommend a model and XAI method for a dataset");
  recommend->add_option("dataset", query, "CSV file")->required();
  recommend->add_option("--out", recommend_out, "directory for the JSON and text report");

  std::string pool_out;
  auto* personas = app.add_subcommand("personas", "generate and balance a persona pool");
  personas->add_option("--out", pool_out, "persona pool file");

  std::string report_out;
  auto* report = app.add_subcommand("report", "write CSV/SVG summaries of the repository");
  report->add_option("--out", report_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kFatal;
  }

  try {
    if (*benchmark) return cmd_benchmark(g, datasets);
    if (*recommend) return cmd_recommend(g, query, recommend_out);
    if (*personas) return cmd_personas(g, pool_out);
    if (*report) return cmd_report(g, report_out);
  } catch (const vxai::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    switch (e.code()) {
      case vxai::ErrorCode::EmptyRepository:
      case vxai::ErrorCode::CorruptRepository:
      case vxai::ErrorCode::VersionMismatch:
        return kNoRepository;
      case vxai::ErrorCode::InsufficientPersonas:
      case vxai::ErrorCode::ProfileExtractionFailed:
        return kPersonaFailure;
      default:
        return kFatal;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFatal;
  }
  return kFatal;
}

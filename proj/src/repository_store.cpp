#include "vxai/repository_store.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace vxai {

namespace {

using ordered_json = nlohmann::ordered_json;
using json = nlohmann::json;

[[noreturn]] void invalid(const std::string& id, const std::string& why) {
  throw Error(ErrorCode::InvalidEntry, "entry '" + id + "': " + why);
}

ordered_json profile_json(const DatasetProfile& p) {
  ordered_json j;
  j["dataset_id"] = p.dataset_id;
  j["n_rows"] = p.n_rows;
  j["n_features"] = p.n_features;
  j["numeric_ratio"] = p.numeric_ratio;
  j["categorical_ratio"] = p.categorical_ratio;
  j["missing_ratio"] = p.missing_ratio;
  j["sparsity"] = p.sparsity;
  j["n_classes"] = p.n_classes;
  j["class_balance_entropy"] = p.class_balance_entropy;
  j["mean_abs_skewness"] = p.mean_abs_skewness;
  j["mean_feature_correlation"] = p.mean_feature_correlation;
  j["domain_tag"] = p.domain_tag;
  return j;
}

DatasetProfile profile_from(const json& j) {
  DatasetProfile p;
  p.dataset_id = j.at("dataset_id").get<std::string>();
  p.n_rows = j.at("n_rows").get<std::size_t>();
  p.n_features = j.at("n_features").get<std::size_t>();
  p.numeric_ratio = j.at("numeric_ratio").get<double>();
  p.categorical_ratio = j.at("categorical_ratio").get<double>();
  p.missing_ratio = j.at("missing_ratio").get<double>();
  p.sparsity = j.at("sparsity").get<double>();
  p.n_classes = j.at("n_classes").get<std::size_t>();
  p.class_balance_entropy = j.at("class_balance_entropy").get<double>();
  p.mean_abs_skewness = j.at("mean_abs_skewness").get<double>();
  p.mean_feature_correlation = j.at("mean_feature_correlation").get<double>();
  p.domain_tag = j.at("domain_tag").get<std::string>();
  return p;
}

ordered_json performance_json(const std::map<ModelId, PerformanceMetrics>& perf) {
  ordered_json j = ordered_json::object();
  for (const auto& [model, m] : perf) {
    j[std::string(to_token(model))] = {{"accuracy", m.accuracy},
                                       {"macro_precision", m.macro_precision},
                                       {"split_seed", m.split_seed},
                                       {"test_fraction", m.test_fraction}};
  }
  return j;
}

ModelId model_from(const std::string& token) {
  const auto m = parse_model(token);
  if (!m) throw std::invalid_argument("unknown model '" + token + "'");
  return *m;
}

MethodId method_from(const std::string& token) {
  const auto m = parse_method(token);
  if (!m) throw std::invalid_argument("unknown method '" + token + "'");
  return *m;
}

std::map<ModelId, PerformanceMetrics> performance_from(const json& j) {
  std::map<ModelId, PerformanceMetrics> out;
  for (const auto& [token, m] : j.items()) {
    PerformanceMetrics p;
    p.accuracy = m.at("accuracy").get<double>();
    p.macro_precision = m.at("macro_precision").get<double>();
    p.split_seed = m.at("split_seed").get<std::uint64_t>();
    p.test_fraction = m.at("test_fraction").get<double>();
    out[model_from(token)] = p;
  }
  return out;
}

ordered_json quant_json(const QuantRecord& q) {
  ordered_json j;
  ordered_json methods = ordered_json::object();
  for (const auto& [method, m] : q.methods) {
    methods[std::string(to_token(method))] = {{"fidelity", m.fidelity},
                                              {"simplicity", m.simplicity},
                                              {"stability", m.stability},
                                              {"quant_composite", m.quant_composite}};
  }
  j["methods"] = std::move(methods);
  j["performance"] = performance_json(q.performance);
  j["scored_model"] = to_token(q.scored_model);
  j["feature_count"] = q.feature_count;
  j["metric_config"] = {{"fidelity_instances", q.metric_config.fidelity_instances},
                        {"tau", q.metric_config.tau},
                        {"stability_instances", q.metric_config.stability_instances},
                        {"stability_perturbations", q.metric_config.stability_perturbations},
                        {"stability_sigma", q.metric_config.stability_sigma}};
  j["explain_seed"] = q.explain_seed;
  j["metric_seed"] = q.metric_seed;
  return j;
}

QuantRecord quant_from(const json& j) {
  QuantRecord q;
  for (const auto& [token, m] : j.at("methods").items()) {
    q.methods[method_from(token)] = {m.at("fidelity").get<double>(), m.at("simplicity").get<double>(),
                                     m.at("stability").get<double>(), m.at("quant_composite").get<double>()};
  }
  q.performance = performance_from(j.at("performance"));
  q.scored_model = model_from(j.at("scored_model").get<std::string>());
  q.feature_count = j.at("feature_count").get<std::size_t>();
  const auto& mc = j.at("metric_config");
  q.metric_config.fidelity_instances = mc.at("fidelity_instances").get<std::size_t>();
  q.metric_config.tau = mc.at("tau").get<double>();
  q.metric_config.stability_instances = mc.at("stability_instances").get<std::size_t>();
  q.metric_config.stability_perturbations = mc.at("stability_perturbations").get<int>();
  q.metric_config.stability_sigma = mc.at("stability_sigma").get<double>();
  q.explain_seed = j.at("explain_seed").get<std::uint64_t>();
  q.metric_seed = j.at("metric_seed").get<std::uint64_t>();
  return q;
}

ordered_json qual_json(const QualRecord& q) {
  ordered_json j;
  ordered_json methods = ordered_json::object();
  for (const auto& [method, m] : q.methods) {
    methods[std::string(to_token(method))] = {{"interpretability", m.means.interpretability},
                                              {"understanding", m.means.understanding},
                                              {"trust", m.means.trust},
                                              {"qual_composite", m.qual_composite},
                                              {"response_count", m.response_count}};
  }
  j["methods"] = std::move(methods);
  j["persona_set_id"] = q.persona_set_id;
  return j;
}

QualRecord qual_from(const json& j) {
  QualRecord q;
  for (const auto& [token, m] : j.at("methods").items()) {
    MethodQual mq;
    mq.means = {m.at("interpretability").get<double>(), m.at("understanding").get<double>(),
                m.at("trust").get<double>()};
    mq.qual_composite = m.at("qual_composite").get<double>();
    mq.response_count = m.at("response_count").get<std::size_t>();
    q.methods[method_from(token)] = mq;
  }
  q.persona_set_id = j.at("persona_set_id").get<std::string>();
  return q;
}

}  // namespace

void validate_entry(const RepositoryEntry& e) {
  if (e.dataset_id.empty()) invalid(e.dataset_id, "empty dataset_id");
  if (e.format_version != kRepositoryFormatVersion) invalid(e.dataset_id, "unsupported format_version");
  if (e.profile.dataset_id != e.dataset_id) invalid(e.dataset_id, "profile belongs to '" + e.profile.dataset_id + "'");
  for (MethodId m : kAllMethods) {
    if (!e.quant.methods.count(m)) invalid(e.dataset_id, "quant record lacks " + std::string(to_token(m)));
    if (!e.qual.methods.count(m)) invalid(e.dataset_id, "qual record lacks " + std::string(to_token(m)));
  }
  if (e.model_performance.empty()) invalid(e.dataset_id, "no model performance");
  for (const auto& [method, values] : e.global_importance) {
    if (values.size() != e.feature_names.size()) {
      invalid(e.dataset_id, std::string(to_token(method)) + " importance length differs from feature_names");
    }
  }
}

void Repository::put_entry(RepositoryEntry entry) {
  validate_entry(entry);
  std::string key = entry.dataset_id;
  entries_.insert_or_assign(std::move(key), std::move(entry));
}

const RepositoryEntry* Repository::find(std::string_view dataset_id) const {
  const auto it = entries_.find(dataset_id);
  return it == entries_.end() ? nullptr : &it->second;
}

std::vector<RepositoryEntry> Repository::list_entries() const {
  std::vector<RepositoryEntry> out;
  out.reserve(entries_.size());
  for (const auto& [id, e] : entries_) out.push_back(e);
  return out;
}

std::string entry_to_json(const RepositoryEntry& e) {
  ordered_json j;
  j["format_version"] = e.format_version;
  j["dataset_id"] = e.dataset_id;
  j["created_at"] = e.created_at;
  j["profile"] = profile_json(e.profile);
  j["model_performance"] = performance_json(e.model_performance);
  j["quant"] = quant_json(e.quant);
  j["qual"] = qual_json(e.qual);
  j["feature_names"] = e.feature_names;
  ordered_json importance = ordered_json::object();
  for (const auto& [method, values] : e.global_importance) importance[std::string(to_token(method))] = values;
  j["global_importance"] = std::move(importance);
  return j.dump();
}

RepositoryEntry entry_from_json(std::string_view text, std::size_t line_number) {
  const std::string where = line_number ? "line " + std::to_string(line_number) + ": " : "";
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::CorruptRepository, where + "invalid JSON: " + e.what());
  }
  if (!j.is_object() || !j.contains("format_version") || !j["format_version"].is_number_integer()) {
    throw Error(ErrorCode::CorruptRepository, where + "missing format_version");
  }
  const auto version = j["format_version"].get<std::int64_t>();
  if (version != kRepositoryFormatVersion) {
    throw Error(ErrorCode::VersionMismatch, where + "format_version " + std::to_string(version) + ", expected " +
                                                std::to_string(kRepositoryFormatVersion));
  }
  try {
    RepositoryEntry e;
    e.format_version = static_cast<int>(version);
    e.dataset_id = j.at("dataset_id").get<std::string>();
    e.created_at = j.at("created_at").get<std::string>();
    e.profile = profile_from(j.at("profile"));
    e.model_performance = performance_from(j.at("model_performance"));
    e.quant = quant_from(j.at("quant"));
    e.qual = qual_from(j.at("qual"));
    e.feature_names = j.value("feature_names", std::vector<std::string>{});
    if (j.contains("global_importance")) {
      for (const auto& [token, values] : j["global_importance"].items()) {
        e.global_importance[method_from(token)] = values.get<std::vector<double>>();
      }
    }
    return e;
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::CorruptRepository, where + ex.what());
  } catch (const std::invalid_argument& ex) {
    throw Error(ErrorCode::CorruptRepository, where + ex.what());
  }
}

std::string serialize_repository(const Repository& repo) {
  std::string out;
  for (const auto& e : repo.list_entries()) out += entry_to_json(e) + "\n";
  return out;
}

Repository parse_repository(std::string_view text) {
  Repository repo;
  std::size_t line_number = 0;
  while (!text.empty()) {
    ++line_number;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    RepositoryEntry e = entry_from_json(line, line_number);
    if (repo.find(e.dataset_id)) {
      throw Error(ErrorCode::CorruptRepository,
                  "line " + std::to_string(line_number) + ": duplicate dataset_id '" + e.dataset_id + "'");
    }
    try {
      repo.put_entry(std::move(e));
    } catch (const Error& ex) {
      throw Error(ErrorCode::CorruptRepository, "line " + std::to_string(line_number) + ": " + ex.what());
    }
  }
  return repo;
}

Repository load_repository(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read repository " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_repository(buffer.str());
}

void save_repository(const Repository& repo, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path partial = path;
  partial += ".partial";
  {
    std::ofstream out(partial, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + partial.string());
    out << serialize_repository(repo);
    out.flush();
    if (!out) throw Error(ErrorCode::Io, "write failed for " + partial.string());
  }
  std::filesystem::rename(partial, path);
}

}  // namespace vxai

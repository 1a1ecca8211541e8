#include "vxai/config.hpp"

#include <json.hpp>

#include <cstdlib>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>

namespace vxai {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

[[noreturn]] void bad(const std::string& why) { throw Error(ErrorCode::ConfigInvalid, why); }

// Reads keys out of one JSON object and rejects whatever is left over.
class Section {
 public:
  Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) bad(where() + " must be an object");
  }

  template <typename T>
  void read(const char* key, T& target) {
    seen_.insert(key);
    if (!node_.contains(key)) return;
    try {
      target = node_.at(key).get<T>();
    } catch (const json::exception&) {
      bad(where(key) + " has the wrong type");
    }
  }

  // Unsigned counts; rejects negative numbers that get<size_t> would wrap.
  void read_count(const char* key, std::size_t& target) {
    seen_.insert(key);
    if (!node_.contains(key)) return;
    const json& v = node_.at(key);
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0) bad(where(key) + " must be a non-negative integer");
    target = v.get<std::size_t>();
  }

  Section child(const char* key) {
    seen_.insert(key);
    static const json empty = json::object();
    return Section(node_.contains(key) ? node_.at(key) : empty, where(key));
  }

  bool has(const char* key) const { return node_.contains(key); }
  const json& raw(const char* key) {
    seen_.insert(key);
    return node_.at(key);
  }

  void finish() const {
    for (const auto& [key, value] : node_.items()) {
      if (!seen_.count(key)) bad("unknown key " + where(key.c_str()));
    }
  }

 private:
  std::string where() const { return path_.empty() ? "config" : path_; }
  std::string where(const char* key) const { return path_.empty() ? std::string(key) : path_ + "." + key; }

  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

}  // namespace

RunConfig parse_config(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    bad(std::string("invalid JSON: ") + e.what());
  }
  RunConfig c;
  Section root(doc, "");
  if (root.has("seed")) {
    const json& s = root.raw("seed");
    if (!s.is_number_integer() || (s.is_number_integer() && !s.is_number_unsigned() && s.get<std::int64_t>() < 0)) {
      bad("seed must be a non-negative integer");
    }
    c.seed = s.get<std::uint64_t>();
  }

  {
    Section s = root.child("preprocess");
    s.read_count("category_cap", c.preprocess.category_cap);
    s.finish();
  }
  {
    Section s = root.child("models");
    s.read("n_trees", c.models.n_trees);
    s.read("max_depth", c.models.max_depth);
    s.read("min_leaf", c.models.min_leaf);
    s.read("max_features", c.models.max_features);
    s.read("bootstrap", c.models.bootstrap);
    s.read("lr_iterations", c.models.lr_iterations);
    s.read("lr_step", c.models.lr_step);
    s.read("lr_l2", c.models.lr_l2);
    s.finish();
  }
  {
    Section s = root.child("explainers");
    Section shap = s.child("shap");
    shap.read_count("background_size", c.explainers.shap.background_size);
    shap.read_count("max_coalitions", c.explainers.shap.max_coalitions);
    shap.finish();
    Section lime = s.child("lime");
    lime.read_count("n_samples", c.explainers.lime.n_samples);
    lime.read("sigma", c.explainers.lime.sigma);
    lime.read("flip_probability", c.explainers.lime.flip_probability);
    lime.read("kernel_width", c.explainers.lime.kernel_width);
    lime.read_count("max_features", c.explainers.lime.max_features);
    lime.read("l2", c.explainers.lime.l2);
    lime.finish();
    s.read("pfi_repeats", c.explainers.pfi_repeats);
    s.read("pdp_grid", c.explainers.pdp_grid);
    s.read_count("local_instances", c.explainers.local_instances);
    s.finish();
  }
  {
    Section s = root.child("metrics");
    s.read_count("fidelity_instances", c.metrics.fidelity_instances);
    s.read("tau", c.metrics.tau);
    s.read_count("stability_instances", c.metrics.stability_instances);
    s.read("stability_perturbations", c.metrics.stability_perturbations);
    s.read("stability_sigma", c.metrics.stability_sigma);
    s.finish();
  }
  {
    Section s = root.child("personas");
    s.read_count("n_backstories", c.personas.n_backstories);
    s.read_count("m_selected", c.personas.m_selected);
    s.read_count("max_in_flight", c.personas.max_in_flight);
    s.read("max_parse_attempts", c.personas.max_parse_attempts);
    s.read("pool_path", c.personas.pool_path);
    s.finish();
  }
  {
    Section s = root.child("llm");
    s.read("backend", c.llm.backend);
    s.read("base_url", c.llm.base_url);
    s.read("model", c.llm.model);
    s.read("timeout_seconds", c.llm.timeout_seconds);
    s.read("retry_attempts", c.llm.retry_attempts);
    s.read("retry_base_delay_ms", c.llm.retry_base_delay_ms);
    s.read("audit_log", c.llm.audit_log);
    if (s.has("stub_method_bias")) {
      const json& bias = s.raw("stub_method_bias");
      if (!bias.is_object()) bad("llm.stub_method_bias must be an object");
      for (const auto& [token, shift] : bias.items()) {
        const auto method = parse_method(token);
        if (!method) bad("llm.stub_method_bias: unknown method '" + token + "'");
        if (!shift.is_number_integer()) bad("llm.stub_method_bias." + token + " must be an integer");
        c.llm.stub_method_bias[*method] = shift.get<int>();
      }
    }
    s.finish();
  }
  {
    Section s = root.child("recommend");
    Section w = s.child("weights");
    w.read("w_quant", c.weights.w_quant);
    w.read("w_qual", c.weights.w_qual);
    w.read("w_prior", c.weights.w_prior);
    w.finish();
    s.read_count("k", c.k);
    s.finish();
  }
  {
    Section s = root.child("paths");
    s.read("repository", c.paths.repository);
    s.read("priors", c.paths.priors);
    s.read("output_dir", c.paths.output_dir);
    s.finish();
  }
  root.read_count("workers", c.workers);
  root.read("created_at", c.created_at);
  root.finish();

  validate_config(c);
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) bad("cannot read config file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

void validate_config(const RunConfig& c) {
  if (c.preprocess.category_cap < 2) bad("preprocess.category_cap must be at least 2");
  if (c.models.n_trees < 1) bad("models.n_trees must be at least 1");
  if (c.models.max_depth < 1) bad("models.max_depth must be at least 1");
  if (c.models.min_leaf < 1) bad("models.min_leaf must be at least 1");
  if (c.models.max_features < 0) bad("models.max_features must be >= 0");
  if (c.models.lr_iterations < 1 || !(c.models.lr_step > 0.0) || c.models.lr_l2 < 0.0) {
    bad("models: logistic regression settings out of range");
  }
  if (c.explainers.shap.background_size < 1) bad("explainers.shap.background_size must be at least 1");
  if (c.explainers.shap.max_coalitions < 2) bad("explainers.shap.max_coalitions must be at least 2");
  if (c.explainers.lime.n_samples < 10) bad("explainers.lime.n_samples must be at least 10");
  if (!(c.explainers.lime.sigma > 0.0)) bad("explainers.lime.sigma must be positive");
  if (c.explainers.lime.flip_probability < 0.0 || c.explainers.lime.flip_probability > 1.0) {
    bad("explainers.lime.flip_probability must be in [0, 1]");
  }
  if (c.explainers.lime.max_features < 1) bad("explainers.lime.max_features must be at least 1");
  if (c.explainers.pfi_repeats < 1) bad("explainers.pfi_repeats must be at least 1");
  if (c.explainers.pdp_grid < 2) bad("explainers.pdp_grid must be at least 2");
  if (c.explainers.local_instances < 1) bad("explainers.local_instances must be at least 1");
  if (c.metrics.fidelity_instances < 1 || c.metrics.stability_instances < 1 ||
      c.metrics.stability_perturbations < 1) {
    bad("metrics: instance counts must be at least 1");
  }
  if (!(c.metrics.tau > 0.0) || c.metrics.tau > 1.0) bad("metrics.tau must be in (0, 1]");
  if (c.metrics.stability_sigma < 0.0) bad("metrics.stability_sigma must be >= 0");
  if (c.personas.n_backstories < 1) bad("personas.n_backstories must be at least 1");
  if (c.personas.m_selected < 1) bad("personas.m_selected must be at least 1");
  if (c.personas.max_in_flight < 1) bad("personas.max_in_flight must be at least 1");
  if (c.personas.max_parse_attempts < 1) bad("personas.max_parse_attempts must be at least 1");
  if (c.llm.backend != "stub" && c.llm.backend != "http") bad("llm.backend must be \"stub\" or \"http\"");
  if (c.llm.timeout_seconds < 1) bad("llm.timeout_seconds must be at least 1");
  if (c.llm.retry_attempts < 1 || c.llm.retry_base_delay_ms < 0) bad("llm: retry settings out of range");
  validate_weights(c.weights);
  if (c.k < 1) bad("recommend.k must be at least 1");
  if (c.workers < 1) bad("workers must be at least 1");
}

std::string dump_config(const RunConfig& c) {
  ordered_json j;
  if (c.seed) j["seed"] = *c.seed;
  j["preprocess"] = {{"category_cap", c.preprocess.category_cap}};
  j["models"] = {{"n_trees", c.models.n_trees},       {"max_depth", c.models.max_depth},
                 {"min_leaf", c.models.min_leaf},     {"max_features", c.models.max_features},
                 {"bootstrap", c.models.bootstrap},   {"lr_iterations", c.models.lr_iterations},
                 {"lr_step", c.models.lr_step},       {"lr_l2", c.models.lr_l2}};
  j["explainers"]["shap"] = {{"background_size", c.explainers.shap.background_size},
                             {"max_coalitions", c.explainers.shap.max_coalitions}};
  j["explainers"]["lime"] = {{"n_samples", c.explainers.lime.n_samples},
                             {"sigma", c.explainers.lime.sigma},
                             {"flip_probability", c.explainers.lime.flip_probability},
                             {"kernel_width", c.explainers.lime.kernel_width},
                             {"max_features", c.explainers.lime.max_features},
                             {"l2", c.explainers.lime.l2}};
  j["explainers"]["pfi_repeats"] = c.explainers.pfi_repeats;
  j["explainers"]["pdp_grid"] = c.explainers.pdp_grid;
  j["explainers"]["local_instances"] = c.explainers.local_instances;
  j["metrics"] = {{"fidelity_instances", c.metrics.fidelity_instances},
                  {"tau", c.metrics.tau},
                  {"stability_instances", c.metrics.stability_instances},
                  {"stability_perturbations", c.metrics.stability_perturbations},
                  {"stability_sigma", c.metrics.stability_sigma}};
  j["personas"] = {{"n_backstories", c.personas.n_backstories},
                   {"m_selected", c.personas.m_selected},
                   {"max_in_flight", c.personas.max_in_flight},
                   {"max_parse_attempts", c.personas.max_parse_attempts},
                   {"pool_path", c.personas.pool_path}};
  ordered_json bias = ordered_json::object();
  for (const auto& [m, shift] : c.llm.stub_method_bias) bias[std::string(to_token(m))] = shift;
  j["llm"] = {{"backend", c.llm.backend},
              {"base_url", c.llm.base_url},
              {"model", c.llm.model},
              {"timeout_seconds", c.llm.timeout_seconds},
              {"retry_attempts", c.llm.retry_attempts},
              {"retry_base_delay_ms", c.llm.retry_base_delay_ms},
              {"audit_log", c.llm.audit_log},
              {"stub_method_bias", bias}};
  j["recommend"] = {{"weights", {{"w_quant", c.weights.w_quant}, {"w_qual", c.weights.w_qual},
                                 {"w_prior", c.weights.w_prior}}},
                    {"k", c.k}};
  j["paths"] = {{"repository", c.paths.repository}, {"priors", c.paths.priors}, {"output_dir", c.paths.output_dir}};
  j["workers"] = c.workers;
  j["created_at"] = c.created_at;
  return j.dump(2) + "\n";
}

std::string resolve_created_at(const RunConfig& config) {
  if (!config.created_at.empty()) return config.created_at;
  std::time_t t = 0;
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) {
    char* end = nullptr;
    const long long v = std::strtoll(epoch, &end, 10);
    if (end && *end == '\0' && v >= 0) t = static_cast<std::time_t>(v);
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace vxai

#include "vxai/llm_backend.hpp"

#include "vxai/rng.hpp"

#include <httplib.h>
#include <json.hpp>

#include <algorithm>
#include <array>
#include <regex>
#include <sstream>
#include <thread>

namespace vxai {

using nlohmann::json;

std::string complete_with_retry(LlmBackend& backend, const ChatRequest& request, const RetryPolicy& policy) {
  std::string last_error = "no attempts made";
  const int attempts = std::max(policy.max_attempts, 1);
  for (int attempt = 1; attempt <= attempts; ++attempt) {
    try {
      return backend.complete(request);
    } catch (const TransientBackendError& e) {
      last_error = e.what();
    }
    if (attempt < attempts) std::this_thread::sleep_for(policy.base_delay * (1 << (attempt - 1)));
  }
  throw Error(ErrorCode::BackendUnavailable,
              "giving up after " + std::to_string(attempts) + " attempts: " + last_error);
}

std::string encode_chat_request(const ChatRequest& request) {
  json body;
  body["model"] = request.model;
  body["messages"] = json::array();
  for (const auto& m : request.messages) body["messages"].push_back({{"role", m.role}, {"content", m.content}});
  body["temperature"] = request.temperature;
  if (request.seed) body["seed"] = *request.seed;
  return body.dump();
}

std::string decode_chat_response(std::string_view body) {
  try {
    const json doc = json::parse(body);
    return doc.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw TransientBackendError(std::string("unexpected response body: ") + e.what());
  }
}

HttpChatBackend::HttpChatBackend(HttpBackendConfig config) : config_(std::move(config)) {
  const std::string& url = config_.base_url;
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorCode::ConfigInvalid, "llm base_url must start with http:// or https://");
  }
  const auto path_start = url.find('/', scheme_end + 3);
  scheme_host_port_ = url.substr(0, path_start);
  path_prefix_ = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
}

std::string HttpChatBackend::complete(const ChatRequest& request) {
  httplib::Client client(scheme_host_port_);
  const auto seconds = static_cast<time_t>(config_.timeout.count());
  client.set_connection_timeout(seconds, 0);
  client.set_read_timeout(seconds, 0);
  client.set_write_timeout(seconds, 0);
  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

  ChatRequest with_model = request;
  if (with_model.model.empty()) with_model.model = config_.model;
  const auto res = client.Post(path_prefix_ + "/chat/completions", headers, encode_chat_request(with_model),
                               "application/json");
  if (!res) throw TransientBackendError("request failed: " + httplib::to_string(res.error()));
  if (res->status != 200) throw TransientBackendError("HTTP " + std::to_string(res->status));
  return decode_chat_response(res->body);
}

// ---- stub ------------------------------------------------------------------

namespace {

constexpr std::array<std::string_view, 24> kProfessions = {
    "nurse",           "teacher",           "software engineer", "accountant",         "farmer",
    "electrician",     "pharmacist",        "lawyer",            "journalist",         "data analyst",
    "retail manager",  "civil engineer",    "social worker",     "chef",               "bank teller",
    "truck driver",    "physician",         "graphic designer",  "insurance underwriter", "police officer",
    "librarian",       "marketing specialist", "mechanic",       "financial advisor"};

constexpr std::array<std::string_view, 8> kTowns = {"a small coastal town", "a busy capital city",
                                                    "a farming village",    "an industrial suburb",
                                                    "a university town",    "a mountain village",
                                                    "a port city",          "a quiet river town"};

constexpr std::array<std::string_view, 6> kChildhoods = {
    "in a large family that always argued about politics at dinner",
    "as an only child who spent most afternoons reading",
    "moving between schools because my parents changed jobs often",
    "helping out in my grandparents' shop after school",
    "playing football in the street until it got dark",
    "with a single mother who worked two jobs"};

constexpr std::array<std::string_view, 6> kHobbies = {
    "On weekends I like to hike and take photographs.",
    "In my free time I volunteer at a local food bank.",
    "I spend my evenings cooking for friends and family.",
    "I am learning to play the piano, slowly.",
    "I follow the news closely and read a lot of history.",
    "Most Sundays I go fishing with my brother."};

constexpr std::array<std::string_view, 3> kExpertisePhrases = {
    "I would call myself a complete beginner with artificial intelligence",
    "I have some working experience with artificial intelligence tools",
    "I build and evaluate artificial intelligence systems for a living"};
constexpr std::array<std::string_view, 3> kExpertiseTokens = {"novice", "intermediate", "expert"};

constexpr std::array<std::string_view, 3> kPreferencePhrases = {
    "I understand things best when I can see a chart or a picture",
    "I understand things best when someone explains them to me in plain words",
    "I understand things best when I can look at the exact numbers"};
constexpr std::array<std::string_view, 3> kPreferenceTokens = {"visual", "textual", "numeric"};

std::string_view article(std::string_view noun) {
  return std::string_view("aeiou").find(noun.front()) != std::string_view::npos ? "an" : "a";
}

std::string age_bracket_token(int age) {
  if (age < 30) return "18-29";
  if (age < 45) return "30-44";
  if (age < 60) return "45-59";
  return "60+";
}

std::string field_value(const std::string& prompt, const std::string& key) {
  const auto pos = prompt.find(key + ": ");
  if (pos == std::string::npos) return "";
  const auto start = pos + key.size() + 2;
  const auto end = prompt.find('\n', start);
  return prompt.substr(start, end == std::string::npos ? std::string::npos : end - start);
}

std::string user_text(const ChatRequest& request) {
  std::string all;
  for (const auto& m : request.messages) all += m.content + "\n";
  return all;
}

}  // namespace

std::string StubBackend::complete(const ChatRequest& request) {
  const std::string prompt = user_text(request);
  const std::uint64_t seed = request.seed.value_or(fnv1a(prompt));
  if (prompt.find(prompt_marker::kSurvey) != std::string::npos) return survey(prompt, seed);
  if (prompt.find(prompt_marker::kExtraction) != std::string::npos) return extraction(prompt);
  if (prompt.find(prompt_marker::kBackstory) != std::string::npos) return backstory(seed);
  throw TransientBackendError("stub backend does not recognise the prompt");
}

std::string StubBackend::backstory(std::uint64_t seed) const {
  Rng rng(seed);
  const int age = 18 + static_cast<int>(rng.below(62));
  const auto profession = kProfessions[rng.below(kProfessions.size())];
  const auto expertise = rng.below(3);
  const auto preference = rng.below(3);
  std::ostringstream out;
  out << "I was born in " << kTowns[rng.below(kTowns.size())] << " and grew up "
      << kChildhoods[rng.below(kChildhoods.size())] << ". I am " << age << " years old. I work as "
      << article(profession) << ' ' << profession << ". " << kExpertisePhrases[expertise] << ". "
      << kPreferencePhrases[preference] << ". " << kHobbies[rng.below(kHobbies.size())];
  return out.str();
}

std::string StubBackend::extraction(const std::string& prompt) const {
  json reply;
  std::smatch m;
  static const std::regex age_re(R"(I am (\d+) years old)");
  static const std::regex job_re(R"(I work as an? ([^.]+)\.)");
  const std::uint64_t h = fnv1a(prompt);
  reply["age_bracket"] = std::regex_search(prompt, m, age_re) ? age_bracket_token(std::stoi(m[1].str()))
                                                               : age_bracket_token(18 + static_cast<int>(h % 62));
  reply["profession"] = std::regex_search(prompt, m, job_re) ? m[1].str() : std::string("unspecified");
  reply["ai_expertise"] = std::string(kExpertiseTokens[(h >> 8) % 3]);
  for (std::size_t i = 0; i < kExpertisePhrases.size(); ++i) {
    if (prompt.find(kExpertisePhrases[i]) != std::string::npos) reply["ai_expertise"] = std::string(kExpertiseTokens[i]);
  }
  reply["explanation_preference"] = std::string(kPreferenceTokens[(h >> 16) % 3]);
  for (std::size_t i = 0; i < kPreferencePhrases.size(); ++i) {
    if (prompt.find(kPreferencePhrases[i]) != std::string::npos) {
      reply["explanation_preference"] = std::string(kPreferenceTokens[i]);
    }
  }
  return reply.dump();
}

std::string StubBackend::survey(const std::string& prompt, std::uint64_t seed) const {
  const std::string expertise = field_value(prompt, "AI expertise");
  const std::string preference = field_value(prompt, "Preferred explanation style");
  const auto method = parse_method(field_value(prompt, "Method id")).value_or(MethodId::shap);

  const bool matches = (preference == "visual" && method == MethodId::pdp) ||
                       (preference == "textual" && method == MethodId::lime) ||
                       (preference == "numeric" && (method == MethodId::shap || method == MethodId::pfi));
  const auto bias_it = config_.method_bias.find(method);
  const int bias = bias_it == config_.method_bias.end() ? 0 : bias_it->second;

  json reply;
  constexpr std::array<const char*, 3> kDims = {"interpretability", "understanding", "trust"};
  for (std::size_t d = 0; d < kDims.size(); ++d) {
    int rating = 3 + (matches ? 1 : 0) + bias;
    if (expertise == "novice" && method == MethodId::shap && d == 1) rating -= 1;
    if (expertise == "expert" && (method == MethodId::shap || method == MethodId::pfi) && d == 2) rating += 1;
    rating += static_cast<int>(splitmix64(seed + d) % 3) - 1;
    reply[kDims[d]] = std::clamp(rating, 1, 5);
  }
  return reply.dump();
}

// ---- audit -----------------------------------------------------------------

AuditLog::AuditLog(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  out_.open(path, std::ios::out | std::ios::app);
  if (!out_) throw Error(ErrorCode::Io, "cannot open audit log " + path.string());
}

void AuditLog::record(const std::string& kind, const std::string& subject, int attempt,
                      const ChatRequest& request, const std::string& reply, bool accepted) {
  if (!out_.is_open()) return;
  json line;
  line["kind"] = kind;
  line["subject"] = subject;
  line["attempt"] = attempt;
  line["request"] = json::parse(encode_chat_request(request));
  line["reply"] = reply;
  line["accepted"] = accepted;
  const std::lock_guard<std::mutex> lock(mutex_);
  out_ << line.dump() << '\n';
  out_.flush();
}

}  // namespace vxai

#ifndef VXAI_LLM_BACKEND_HPP_
#define VXAI_LLM_BACKEND_HPP_

#include "vxai/core.hpp"

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace vxai {

struct ChatMessage {
  std::string role;
  std::string content;
};

struct ChatRequest {
  std::string model;
  std::vector<ChatMessage> messages;
  double temperature = 1.0;
  std::optional<std::uint64_t> seed;
};

// One failed attempt (HTTP error, timeout, unparseable envelope). Retried by
// complete_with_retry; never escapes it.
class TransientBackendError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Chat-completions style text generator. Implementations must be safe to
// call from several threads at once.
class LlmBackend {
 public:
  virtual ~LlmBackend() = default;
  virtual std::string complete(const ChatRequest& request) = 0;
};

// Phrases the persona engine's prompts carry; the stub keys off them.
namespace prompt_marker {
inline constexpr std::string_view kBackstory = "Tell me the story of your life";
inline constexpr std::string_view kExtraction = "Extract the persona profile";
inline constexpr std::string_view kSurvey = "Rate the explanation";
}  // namespace prompt_marker

struct RetryPolicy {
  int max_attempts = 3;
  // Delay before retry k (k = 1, 2, ...) is base_delay * 2^(k-1).
  std::chrono::milliseconds base_delay{1000};
};

// Throws Error(BackendUnavailable) once every attempt has failed.
std::string complete_with_retry(LlmBackend& backend, const ChatRequest& request, const RetryPolicy& policy);

// Wire format of the chat-completions endpoint.
std::string encode_chat_request(const ChatRequest& request);
// choices[0].message.content; throws TransientBackendError on a bad envelope.
std::string decode_chat_response(std::string_view body);

struct HttpBackendConfig {
  // e.g. https://api.openai.com/v1 ; "/chat/completions" is appended.
  std::string base_url = "https://api.openai.com/v1";
  std::string model = "gpt-4o-mini";
  std::string api_key;
  std::chrono::seconds timeout{30};
};

inline constexpr const char* kApiKeyEnv = "VIRTUALXAI_LLM_KEY";

class HttpChatBackend final : public LlmBackend {
 public:
  explicit HttpChatBackend(HttpBackendConfig config);
  std::string complete(const ChatRequest& request) override;

 private:
  HttpBackendConfig config_;
  std::string scheme_host_port_;
  std::string path_prefix_;
};

struct StubConfig {
  // Added to every rating the stub gives a method (before clamping to 1..5).
  std::map<MethodId, int> method_bias;
};

// Deterministic offline stand-in. Recognises the three prompt families the
// persona engine sends and answers them from seeded templates, so the whole
// pipeline runs without network access.
class StubBackend final : public LlmBackend {
 public:
  explicit StubBackend(StubConfig config = {}) : config_(std::move(config)) {}
  std::string complete(const ChatRequest& request) override;

 private:
  std::string backstory(std::uint64_t seed) const;
  std::string extraction(const std::string& prompt) const;
  std::string survey(const std::string& prompt, std::uint64_t seed) const;

  StubConfig config_;
};

// JSON-lines record of every prompt and reply.
class AuditLog {
 public:
  AuditLog() = default;
  explicit AuditLog(const std::filesystem::path& path);

  bool enabled() const { return out_.is_open(); }
  void record(const std::string& kind, const std::string& subject, int attempt, const ChatRequest& request,
              const std::string& reply, bool accepted);

 private:
  std::mutex mutex_;
  std::ofstream out_;
};

}  // namespace vxai

#endif  // VXAI_LLM_BACKEND_HPP_

#include "helpers.hpp"

#include "vxai/llm_backend.hpp"

#include <doctest.h>
#include <httplib.h>
#include <json.hpp>

#include <atomic>
#include <thread>

using namespace vxai;
using namespace vxai::testing;

namespace {

// Local chat-completions endpoint. Fails the first `failures` requests.
class FakeServer {
 public:
  explicit FakeServer(int failures) : failures_(failures) {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      const int n = hits++;
      last_body = req.body;
      last_auth = req.get_header_value("Authorization");
      if (n < failures_) {
        res.status = 500;
        res.set_content("boom", "text/plain");
        return;
      }
      const nlohmann::json reply = {{"choices", {{{"message", {{"role", "assistant"}, {"content", "hello"}}}}}}};
      res.set_content(reply.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeServer() {
    server_.stop();
    thread_.join();
  }

  std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }

  std::atomic<int> hits{0};
  std::string last_body;
  std::string last_auth;

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  int failures_;
};

ChatRequest hello_request() {
  ChatRequest r;
  r.messages = {{"user", "hi"}};
  r.temperature = 0.0;
  r.seed = 42;
  return r;
}

RetryPolicy instant() { return {3, std::chrono::milliseconds(0)}; }

}  // namespace

TEST_SUITE("llm_backend") {

TEST_CASE("request encoding") {
  ChatRequest r = hello_request();
  r.model = "m";
  const auto doc = nlohmann::json::parse(encode_chat_request(r));
  CHECK(doc["model"] == "m");
  CHECK(doc["temperature"] == 0.0);
  CHECK(doc["seed"] == 42);
  CHECK(doc["messages"][0]["role"] == "user");
  CHECK(doc["messages"][0]["content"] == "hi");
}

TEST_CASE("response decoding") {
  CHECK(decode_chat_response(R"({"choices":[{"message":{"content":"ok"}}]})") == "ok");
  CHECK_THROWS_AS(decode_chat_response(R"({"choices":[]})"), TransientBackendError);
  CHECK_THROWS_AS(decode_chat_response("<html>"), TransientBackendError);
}

TEST_CASE("http backend talks to a chat endpoint") {
  FakeServer server(0);
  HttpBackendConfig cfg;
  cfg.base_url = server.base_url();
  cfg.model = "test-model";
  cfg.api_key = "secret";
  cfg.timeout = std::chrono::seconds(5);
  HttpChatBackend backend(cfg);
  CHECK(complete_with_retry(backend, hello_request(), instant()) == "hello");
  CHECK(server.last_auth == "Bearer secret");
  CHECK(nlohmann::json::parse(server.last_body)["model"] == "test-model");
}

TEST_CASE("three server errors exhaust the retries") {
  FakeServer server(3);
  HttpBackendConfig cfg;
  cfg.base_url = server.base_url();
  cfg.timeout = std::chrono::seconds(5);
  HttpChatBackend backend(cfg);
  try {
    complete_with_retry(backend, hello_request(), instant());
    FAIL("expected BackendUnavailable");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BackendUnavailable);
  }
  CHECK(server.hits.load() == 3);
}

TEST_CASE("two server errors are retried away") {
  FakeServer server(2);
  HttpBackendConfig cfg;
  cfg.base_url = server.base_url();
  cfg.timeout = std::chrono::seconds(5);
  HttpChatBackend backend(cfg);
  CHECK(complete_with_retry(backend, hello_request(), instant()) == "hello");
  CHECK(server.hits.load() == 3);
}

TEST_CASE("an unreachable host is unavailable") {
  HttpBackendConfig cfg;
  cfg.base_url = "http://127.0.0.1:1/v1";
  cfg.timeout = std::chrono::seconds(1);
  HttpChatBackend backend(cfg);
  CHECK_THROWS_AS(complete_with_retry(backend, hello_request(), instant()), Error);
  CHECK_THROWS_AS(HttpChatBackend(HttpBackendConfig{"localhost:80", "m", "", std::chrono::seconds(1)}), Error);
}

TEST_CASE("stub answers the same prompt the same way") {
  StubBackend stub;
  ChatRequest r;
  r.messages = {{"user", std::string(prompt_marker::kBackstory)}};
  r.seed = 9;
  CHECK(stub.complete(r) == stub.complete(r));
  r.seed = 10;
  const auto other = stub.complete(r);
  r.seed = 9;
  CHECK(stub.complete(r) != other);
}

TEST_CASE("audit log writes one json line per exchange") {
  const auto dir = scratch_dir("audit");
  {
    AuditLog log(dir / "a.jsonl");
    log.record("survey", "persona-0001", 1, hello_request(), "reply", true);
    log.record("survey", "persona-0001", 2, hello_request(), "again", false);
  }
  const auto text = slurp(dir / "a.jsonl");
  CHECK(std::count(text.begin(), text.end(), '\n') == 2);
  const auto first = nlohmann::json::parse(text.substr(0, text.find('\n')));
  CHECK(first["subject"] == "persona-0001");
}

}  // TEST_SUITE

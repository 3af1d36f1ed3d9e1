#include <atomic>
#include <cstdlib>
#include <mutex>
#include <thread>

#include "doctest.h"
#include "dagkit/errors.hpp"
#include "dagkit/http_backend.hpp"
#include "httplib.h"

using namespace dagkit;

namespace {

// Local OpenAI-style server. Fails the first `failures` requests with
// `fail_status`, then answers with `reply`.
class FakeServer {
 public:
  FakeServer() {
    auto handler = [this](const httplib::Request& req, httplib::Response& res) {
      std::lock_guard<std::mutex> lock(mu_);
      bodies.push_back(nlohmann::json::parse(req.body));
      paths.push_back(req.path);
      auth.push_back(req.get_header_value("Authorization"));
      if (failures > 0) {
        --failures;
        res.status = fail_status;
        res.set_content("busy", "text/plain");
        return;
      }
      res.set_content(reply.dump(), "application/json");
    };
    server_.Post("/v1/completions", handler);
    server_.Post("/v1/chat/completions", handler);
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeServer() {
    server_.stop();
    thread_.join();
  }

  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

  nlohmann::json reply;
  int failures = 0;
  int fail_status = 503;
  std::vector<nlohmann::json> bodies;
  std::vector<std::string> paths;
  std::vector<std::string> auth;

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
  std::mutex mu_;
};

nlohmann::json completion_reply() {
  return nlohmann::json::parse(R"J({"choices": [{"text": "client.f(a=1)",
    "logprobs": {"tokens": ["client", ".f", "(a=1)"], "token_logprobs": [-0.01, -0.2, -0.05]}}]})J");
}

HttpBackendConfig config_for(const FakeServer& server) {
  HttpBackendConfig cfg;
  cfg.base_url = server.url();
  cfg.model = "test-model";
  cfg.api_key_env = "DAGKIT_TEST_KEY_UNSET";
  cfg.timeout = std::chrono::seconds(5);
  return cfg;
}

}  // namespace

TEST_CASE("completion request and response wire format") {
  FakeServer server;
  server.reply = completion_reply();
  std::vector<std::chrono::milliseconds> sleeps;
  HttpBackend backend(config_for(server), [&](std::chrono::milliseconds d) { sleeps.push_back(d); });

  GenerationRequest req;
  req.prompt = "import boto3\n";
  auto r = backend.generate(req);
  CHECK(r.text == "client.f(a=1)");
  REQUIRE(r.tokens.size() == 3);
  CHECK(r.tokens[1].logprob == -0.2);
  CHECK(r.tokens[2].char_start == 8);

  REQUIRE(server.bodies.size() == 1);
  const auto& body = server.bodies[0];
  CHECK(server.paths[0] == "/v1/completions");
  CHECK(body["model"] == "test-model");
  CHECK(body["prompt"] == "import boto3\n");
  CHECK(body["max_tokens"] == 256);
  CHECK(body["temperature"] == 0);
  CHECK(body["logprobs"] == true);
  CHECK(server.auth[0].empty());
  CHECK(sleeps.empty());
}

TEST_CASE("chat mode sends the instruct system prompt and unwraps the fence") {
  FakeServer server;
  server.reply = nlohmann::json::parse(R"J({"choices": [{"message": {"role": "assistant",
    "content": "```python\nclient.f(a=1)\n```"}, "logprobs": {"content": [
      {"token": "```", "logprob": -0.1}, {"token": "python\n", "logprob": -0.1},
      {"token": "client.f", "logprob": -0.3}, {"token": "(a=1)\n", "logprob": -0.01},
      {"token": "```", "logprob": -0.1}]}}]})J");
  auto cfg = config_for(server);
  cfg.chat = true;
  HttpBackend backend(cfg, [](std::chrono::milliseconds) {});
  GenerationRequest req;
  req.prompt = "p";
  auto r = backend.generate(req);
  CHECK(r.text == "client.f(a=1)");
  CHECK(r.has_logprobs);
  CHECK(server.paths[0] == "/v1/chat/completions");
  const auto& msgs = server.bodies[0]["messages"];
  REQUIRE(msgs.size() == 2);
  CHECK(msgs[0]["role"] == "system");
  CHECK(msgs[0]["content"] == std::string(kInstructSystemPrompt));
  CHECK(msgs[1]["content"] == "p");
  CHECK_THROWS_AS(backend.score("a", "b"), CapabilityError);
}

TEST_CASE("retries with exponential backoff then succeeds") {
  FakeServer server;
  server.reply = completion_reply();
  server.failures = 2;
  server.fail_status = 429;
  std::vector<std::chrono::milliseconds> sleeps;
  auto cfg = config_for(server);
  cfg.initial_backoff = std::chrono::milliseconds(100);
  HttpBackend backend(cfg, [&](std::chrono::milliseconds d) { sleeps.push_back(d); });
  GenerationRequest req;
  req.prompt = "x";
  CHECK(backend.generate(req).text == "client.f(a=1)");
  CHECK(sleeps == std::vector<std::chrono::milliseconds>{std::chrono::milliseconds(100), std::chrono::milliseconds(200)});
  CHECK(server.bodies.size() == 3);
}

TEST_CASE("gives up after max_retries and does not retry client errors") {
  FakeServer server;
  server.reply = completion_reply();
  server.failures = 10;
  auto cfg = config_for(server);
  cfg.max_retries = 2;
  HttpBackend backend(cfg, [](std::chrono::milliseconds) {});
  GenerationRequest req;
  req.prompt = "x";
  CHECK_THROWS_AS(backend.generate(req), TransportError);
  CHECK(server.bodies.size() == 3);

  FakeServer bad;
  bad.failures = 1;
  bad.fail_status = 400;
  HttpBackend once(config_for(bad), [](std::chrono::milliseconds) {});
  CHECK_THROWS_AS(once.generate(req), TransportError);
  CHECK(bad.bodies.size() == 1);
}

TEST_CASE("unreachable server is a transport error") {
  HttpBackendConfig cfg;
  cfg.base_url = "http://127.0.0.1:1";
  cfg.max_retries = 1;
  cfg.timeout = std::chrono::seconds(2);
  int sleeps = 0;
  HttpBackend backend(cfg, [&](std::chrono::milliseconds) { ++sleeps; });
  GenerationRequest req;
  req.prompt = "x";
  CHECK_THROWS_AS(backend.generate(req), TransportError);
  CHECK(sleeps == 1);
}

TEST_CASE("api key goes into a bearer header") {
  FakeServer server;
  server.reply = completion_reply();
  auto cfg = config_for(server);
  cfg.api_key_env = "DAGKIT_HTTP_TEST_KEY";
  ::setenv("DAGKIT_HTTP_TEST_KEY", "sekret", 1);
  HttpBackend backend(cfg, [](std::chrono::milliseconds) {});
  GenerationRequest req;
  req.prompt = "x";
  req.want_logprobs = false;
  backend.generate(req);
  ::unsetenv("DAGKIT_HTTP_TEST_KEY");
  CHECK(server.auth[0] == "Bearer sekret");
  CHECK(server.bodies[0]["logprobs"] == false);
}

TEST_CASE("score keeps the logprobs of continuation tokens") {
  FakeServer server;
  server.reply = nlohmann::json::parse(R"J({"choices": [{"text": "ctx delete_message",
    "logprobs": {"tokens": ["ctx", " delete", "_message"], "token_logprobs": [null, -0.5, -0.25]}}]})J");
  HttpBackend backend(config_for(server), [](std::chrono::milliseconds) {});
  auto lps = backend.score("ctx", " delete_message");
  CHECK(lps == std::vector<double>{-0.5, -0.25});
  CHECK(server.bodies[0]["echo"] == true);
  CHECK(server.bodies[0]["max_tokens"] == 0);
}

TEST_CASE("missing logprobs when asked is a capability error") {
  auto j = nlohmann::json::parse(R"J({"choices": [{"text": "f()"}]})J");
  CHECK_THROWS_AS(HttpBackend::parse_completion(j, true), CapabilityError);
  auto r = HttpBackend::parse_completion(j, false);
  CHECK(r.text == "f()");
  CHECK_FALSE(r.has_logprobs);
  CHECK_THROWS_AS(HttpBackend::parse_completion(nlohmann::json::object(), false), TransportError);
}

#pragma once

#include <chrono>
#include <functional>
#include <string>

#include "dagkit/model_gateway.hpp"
#include "json.hpp"

namespace dagkit {

struct HttpBackendConfig {
  std::string base_url = "http://localhost:8000";  // scheme://host[:port]
  std::string completions_path = "/v1/completions";
  std::string chat_path = "/v1/chat/completions";
  std::string model;
  bool chat = false;
  std::string api_key_env = "DAGKIT_API_KEY";
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{500};
  double backoff_factor = 2.0;
  std::chrono::seconds timeout{120};
};

// Completions-style HTTP backend. Chat mode sends the instruct system prompt
// and unwraps the fenced reply. Transport failures, 429 and 5xx are retried
// with exponential backoff; other 4xx responses fail immediately.
class HttpBackend final : public Backend {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  explicit HttpBackend(HttpBackendConfig config, Sleeper sleeper = {});

  GenerationResult generate(const GenerationRequest& request) override;
  // Echo-mode teacher forcing on the completions endpoint; unsupported in chat mode.
  std::vector<double> score(const std::string& prompt, const std::string& continuation) override;
  std::string name() const override { return "http"; }

  // Wire formats, exposed for tests.
  nlohmann::json completion_body(const GenerationRequest& request) const;
  nlohmann::json chat_body(const GenerationRequest& request) const;
  static GenerationResult parse_completion(const nlohmann::json& response, bool want_logprobs);
  static GenerationResult parse_chat(const nlohmann::json& response, bool want_logprobs);

 private:
  nlohmann::json post(const std::string& path, const nlohmann::json& body);

  HttpBackendConfig config_;
  Sleeper sleeper_;
};

}  // namespace dagkit

#include "dagkit/http_backend.hpp"

#include <cstdlib>
#include <thread>

#include "dagkit/errors.hpp"
#include "httplib.h"

namespace dagkit {

HttpBackend::HttpBackend(HttpBackendConfig config, Sleeper sleeper)
    : config_(std::move(config)), sleeper_(std::move(sleeper)) {
  if (!sleeper_) sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  if (config_.max_retries < 0) throw ConfigError("max_retries must be >= 0");
}

nlohmann::json HttpBackend::completion_body(const GenerationRequest& request) const {
  return {{"model", config_.model},
          {"prompt", request.prompt},
          {"max_tokens", request.max_new_tokens},
          {"temperature", 0},
          {"logprobs", request.want_logprobs}};
}

nlohmann::json HttpBackend::chat_body(const GenerationRequest& request) const {
  const std::string system = request.system_prompt.value_or(std::string(kInstructSystemPrompt));
  return {{"model", config_.model},
          {"messages",
           nlohmann::json::array({{{"role", "system"}, {"content", system}},
                                  {{"role", "user"}, {"content", request.prompt}}})},
          {"max_tokens", request.max_new_tokens},
          {"temperature", 0},
          {"logprobs", request.want_logprobs}};
}

namespace {

const nlohmann::json& first_choice(const nlohmann::json& response) {
  if (!response.contains("choices") || !response["choices"].is_array() || response["choices"].empty()) {
    throw TransportError("backend response has no choices");
  }
  return response["choices"][0];
}

GenerationResult from_token_lists(const std::vector<std::string>& pieces, const std::vector<double>& logprobs,
                                  const std::string& text, bool want_logprobs) {
  if (pieces.empty() || pieces.size() != logprobs.size()) {
    if (want_logprobs) throw CapabilityError("backend response carries no usable logprobs");
    return GenerationResult{text, {}, false};
  }
  return GenerationResult::from_pieces(pieces, logprobs);
}

}  // namespace

GenerationResult HttpBackend::parse_completion(const nlohmann::json& response, bool want_logprobs) {
  const auto& choice = first_choice(response);
  const std::string text = choice.value("text", std::string{});
  std::vector<std::string> pieces;
  std::vector<double> logprobs;
  if (choice.contains("logprobs") && choice["logprobs"].is_object()) {
    const auto& lp = choice["logprobs"];
    if (lp.contains("tokens") && lp.contains("token_logprobs")) {
      for (const auto& t : lp["tokens"]) pieces.push_back(t.get<std::string>());
      for (const auto& v : lp["token_logprobs"]) logprobs.push_back(v.is_null() ? 0.0 : v.get<double>());
    }
  }
  return from_token_lists(pieces, logprobs, text, want_logprobs);
}

GenerationResult HttpBackend::parse_chat(const nlohmann::json& response, bool want_logprobs) {
  const auto& choice = first_choice(response);
  const std::string text = choice.at("message").value("content", std::string{});
  std::vector<std::string> pieces;
  std::vector<double> logprobs;
  if (choice.contains("logprobs") && choice["logprobs"].is_object() && choice["logprobs"].contains("content") &&
      choice["logprobs"]["content"].is_array()) {
    for (const auto& t : choice["logprobs"]["content"]) {
      pieces.push_back(t.at("token").get<std::string>());
      logprobs.push_back(t.at("logprob").get<double>());
    }
  }
  return unwrap_code_fence(from_token_lists(pieces, logprobs, text, want_logprobs));
}

nlohmann::json HttpBackend::post(const std::string& path, const nlohmann::json& body) {
  httplib::Client client(config_.base_url);
  client.set_connection_timeout(config_.timeout);
  client.set_read_timeout(config_.timeout);
  httplib::Headers headers;
  if (const char* key = std::getenv(config_.api_key_env.c_str()); key != nullptr && *key != '\0') {
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }
  const std::string payload = body.dump();
  auto delay = config_.initial_backoff;
  std::string last_error;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) {
      sleeper_(delay);
      delay = std::chrono::milliseconds(static_cast<long long>(static_cast<double>(delay.count()) * config_.backoff_factor));
    }
    auto res = client.Post(path, headers, payload, "application/json");
    if (!res) {
      last_error = "request failed: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 429 || res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status < 200 || res->status >= 300) {
      throw TransportError("HTTP " + std::to_string(res->status) + ": " + res->body);
    }
    try {
      return nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::parse_error& e) {
      throw TransportError(std::string("unparseable backend response: ") + e.what());
    }
  }
  throw TransportError(last_error + " (after " + std::to_string(config_.max_retries) + " retries)");
}

GenerationResult HttpBackend::generate(const GenerationRequest& request) {
  GenerationResult result;
  if (config_.chat) {
    result = parse_chat(post(config_.chat_path, chat_body(request)), request.want_logprobs);
  } else {
    result = parse_completion(post(config_.completions_path, completion_body(request)), request.want_logprobs);
  }
  if (request.max_new_tokens > 0) result = result.truncated(static_cast<std::size_t>(request.max_new_tokens));
  return result;
}

std::vector<double> HttpBackend::score(const std::string& prompt, const std::string& continuation) {
  if (config_.chat) throw CapabilityError("chat backends cannot teacher-force a continuation");
  nlohmann::json body{{"model", config_.model},
                      {"prompt", prompt + continuation},
                      {"max_tokens", 0},
                      {"temperature", 0},
                      {"logprobs", true},
                      {"echo", true}};
  const nlohmann::json response = post(config_.completions_path, body);
  const auto& choice = first_choice(response);
  if (!choice.contains("logprobs") || !choice["logprobs"].is_object()) {
    throw CapabilityError("backend did not return echo logprobs");
  }
  const auto& lp = choice["logprobs"];
  const auto& tokens = lp.at("tokens");
  const auto& values = lp.at("token_logprobs");
  std::vector<double> out;
  std::size_t offset = 0;
  // Echoed tokens cover prompt + continuation; keep those reaching past the prompt.
  for (std::size_t i = 0; i < tokens.size() && i < values.size(); ++i) {
    offset += tokens[i].get<std::string>().size();
    if (offset > prompt.size() && !values[i].is_null()) out.push_back(values[i].get<double>());
  }
  if (out.empty()) throw CapabilityError("backend returned no logprobs for the continuation");
  return out;
}

}  // namespace dagkit

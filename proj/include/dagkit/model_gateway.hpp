#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dagkit/invocation.hpp"
#include "json.hpp"

namespace dagkit {

// Sent verbatim as the system message to chat-style backends.
inline constexpr std::string_view kInstructSystemPrompt =
    "You are code completion model. You generate code starting from the end of the prompt given to you. "
    "You will give your output surrounded by backticks.\n"
    "\n"
    "Notably, the prompt requires you to complete an API invocation. Complete the API invocation and stop there. "
    "Do not write any code other than the single API invocation.\n"
    "\n"
    "As an example you will be given a code input. And you should return your output as:\n"
    "```python\n"
    "<API_INVOCATION_HERE>\n"
    "```";

inline constexpr int kDefaultMaxNewTokens = 256;

// Decoding is always greedy (temperature 0).
struct GenerationRequest {
  std::string prompt;
  int max_new_tokens = kDefaultMaxNewTokens;
  bool want_logprobs = true;
  std::optional<std::string> system_prompt;
  std::string task_id;  // lets scripted backends key on the task
};

struct TokenLogprob {
  std::string piece;
  double logprob = 0.0;  // natural log, <= 0
  std::size_t char_start = 0;
  std::size_t char_end = 0;

  friend bool operator==(const TokenLogprob&, const TokenLogprob&) = default;
};

struct GenerationResult {
  std::string text;
  std::vector<TokenLogprob> tokens;  // pieces concatenate to `text` when present
  bool has_logprobs = false;

  friend bool operator==(const GenerationResult&, const GenerationResult&) = default;

  // Builds offsets from consecutive pieces.
  static GenerationResult from_pieces(std::span<const std::string> pieces, std::span<const double> logprobs);
  // Keeps the first `max_tokens` tokens. Results without tokens are returned as is.
  GenerationResult truncated(std::size_t max_tokens) const;
};

nlohmann::json to_json(const GenerationResult& result);
GenerationResult generation_from_json(const nlohmann::json& j);

// Strips one fenced code block (```lang ... ```) if the text contains one,
// clipping token pieces to the inner code and re-basing their offsets.
GenerationResult unwrap_code_fence(const GenerationResult& result);

class Backend {
 public:
  virtual ~Backend() = default;

  // Must be deterministic for a fixed backend state and request, and safe to
  // call from several threads at once.
  virtual GenerationResult generate(const GenerationRequest& request) = 0;

  // Teacher-forced log-probabilities of the tokens of `continuation` after
  // `prompt`. Throws CapabilityError when unsupported.
  virtual std::vector<double> score(const std::string& prompt, const std::string& continuation) = 0;

  virtual std::string name() const = 0;
};

// Minimum token probability over tokens overlapping `span` (the terminal API
// name). Throws CapabilityError without logprobs and ContractError when no
// token overlaps the span.
double api_confidence(const GenerationResult& result, CharSpan span);

// exp(-(1/n) * sum(logprobs)). Throws ContractError on empty input.
double perplexity(std::span<const double> logprobs);

double perplexity_over_api_tokens(Backend& backend, const std::string& prompt, const std::string& api_name_text);

}  // namespace dagkit

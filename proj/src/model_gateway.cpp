#include "dagkit/model_gateway.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dagkit/errors.hpp"

namespace dagkit {

GenerationResult GenerationResult::from_pieces(std::span<const std::string> pieces, std::span<const double> logprobs) {
  if (pieces.size() != logprobs.size()) {
    throw ConfigError("token_pieces and logprobs differ in length (" + std::to_string(pieces.size()) + " vs " +
                      std::to_string(logprobs.size()) + ")");
  }
  GenerationResult out;
  out.has_logprobs = true;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    if (logprobs[i] > 0.0 || std::isnan(logprobs[i])) {
      throw ConfigError("logprob " + std::to_string(logprobs[i]) + " is not <= 0");
    }
    const std::size_t start = out.text.size();
    out.text += pieces[i];
    out.tokens.push_back({pieces[i], logprobs[i], start, out.text.size()});
  }
  return out;
}

GenerationResult GenerationResult::truncated(std::size_t max_tokens) const {
  if (tokens.size() <= max_tokens) return *this;
  GenerationResult out;
  out.has_logprobs = has_logprobs;
  out.tokens.assign(tokens.begin(), tokens.begin() + static_cast<std::ptrdiff_t>(max_tokens));
  out.text = text.substr(0, out.tokens.empty() ? 0 : out.tokens.back().char_end);
  return out;
}

nlohmann::json to_json(const GenerationResult& result) {
  nlohmann::json tokens = nlohmann::json::array();
  for (const auto& t : result.tokens) {
    tokens.push_back({{"piece", t.piece}, {"logprob", t.logprob}, {"char_start", t.char_start},
                      {"char_end", t.char_end}});
  }
  return {{"text", result.text}, {"has_logprobs", result.has_logprobs}, {"tokens", std::move(tokens)}};
}

GenerationResult generation_from_json(const nlohmann::json& j) {
  GenerationResult out;
  out.text = j.at("text").get<std::string>();
  out.has_logprobs = j.value("has_logprobs", false);
  for (const auto& t : j.value("tokens", nlohmann::json::array())) {
    out.tokens.push_back({t.at("piece").get<std::string>(), t.at("logprob").get<double>(),
                          t.at("char_start").get<std::size_t>(), t.at("char_end").get<std::size_t>()});
  }
  return out;
}

GenerationResult unwrap_code_fence(const GenerationResult& result) {
  const std::string& text = result.text;
  const std::size_t open = text.find("```");
  if (open == std::string::npos) return result;
  std::size_t body = text.find('\n', open + 3);
  if (body == std::string::npos) return result;
  ++body;
  std::size_t close = text.find("```", body);
  if (close == std::string::npos) close = text.size();
  std::size_t end = close;
  if (end > body && text[end - 1] == '\n') --end;

  GenerationResult out;
  out.has_logprobs = result.has_logprobs;
  out.text = text.substr(body, end - body);
  for (const auto& t : result.tokens) {
    const std::size_t lo = std::max(t.char_start, body);
    const std::size_t hi = std::min(t.char_end, end);
    if (lo >= hi) continue;
    out.tokens.push_back({text.substr(lo, hi - lo), t.logprob, lo - body, hi - body});
  }
  return out;
}

double api_confidence(const GenerationResult& result, CharSpan span) {
  if (!result.has_logprobs) throw CapabilityError("generation carries no logprobs");
  if (span.empty() || span.end > result.text.size()) {
    throw ContractError("callee span lies outside the generated text");
  }
  double lowest = std::numeric_limits<double>::infinity();
  bool any = false;
  for (const auto& t : result.tokens) {
    if (t.char_start < span.end && span.begin < t.char_end) {
      lowest = std::min(lowest, std::exp(t.logprob));
      any = true;
    }
  }
  if (!any) throw ContractError("no token overlaps the callee span");
  return lowest;
}

double perplexity(std::span<const double> logprobs) {
  if (logprobs.empty()) throw ContractError("perplexity of zero tokens");
  double sum = 0.0;
  for (double lp : logprobs) sum += lp;
  return std::exp(-sum / static_cast<double>(logprobs.size()));
}

double perplexity_over_api_tokens(Backend& backend, const std::string& prompt, const std::string& api_name_text) {
  const std::vector<double> logprobs = backend.score(prompt, api_name_text);
  return perplexity(logprobs);
}

}  // namespace dagkit

#include "dagkit/mock_backend.hpp"

#include "dagkit/errors.hpp"
#include "dagkit/io.hpp"

namespace dagkit {

MockBackend::MockBackend(std::vector<ScriptEntry> entries, bool chat_style)
    : entries_(std::move(entries)), chat_style_(chat_style) {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const ScriptEntry& e = entries_[i];
    const std::string where = "script entry " + std::to_string(i);
    if (!e.token_pieces.empty()) {
      std::string joined;
      for (const auto& p : e.token_pieces) joined += p;
      if (joined != e.completion) throw ConfigError(where + ": token_pieces do not concatenate to completion");
      if (!e.logprobs.empty() && e.logprobs.size() != e.token_pieces.size()) {
        throw ConfigError(where + ": logprobs and token_pieces differ in length");
      }
    } else if (e.logprobs.size() > 1) {
      throw ConfigError(where + ": several logprobs given without token_pieces");
    }
    for (double lp : e.logprobs) {
      if (!(lp <= 0.0)) throw ConfigError(where + ": logprob " + std::to_string(lp) + " is not <= 0");
    }
  }
}

MockBackend MockBackend::from_json(const nlohmann::json& j, bool chat_style) {
  const nlohmann::json& list = j.is_object() ? j.at("entries") : j;
  if (!list.is_array()) throw ConfigError("mock script must be an array of entries");
  std::vector<ScriptEntry> entries;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const auto& e = list[i];
    try {
      ScriptEntry entry;
      if (e.contains("match")) entry.match = e.at("match").get<std::string>();
      if (e.contains("task_id")) entry.task_id = e.at("task_id").get<std::string>();
      if (e.contains("error")) entry.error = e.at("error").get<std::string>();
      entry.completion = e.value("completion", std::string{});
      entry.token_pieces = e.value("token_pieces", std::vector<std::string>{});
      entry.logprobs = e.value("logprobs", std::vector<double>{});
      entries.push_back(std::move(entry));
    } catch (const nlohmann::json::exception& ex) {
      throw ConfigError("script entry " + std::to_string(i) + ": " + ex.what());
    }
  }
  return MockBackend(std::move(entries), chat_style);
}

MockBackend MockBackend::from_file(const std::filesystem::path& path, bool chat_style) {
  try {
    return from_json(read_json_file(path), chat_style);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

const ScriptEntry* MockBackend::find(const std::string& prompt, const std::string& task_id) const {
  for (const auto& e : entries_) {
    if (e.task_id && *e.task_id != task_id) continue;
    if (e.match && prompt.find(*e.match) == std::string::npos) continue;
    return &e;
  }
  return nullptr;
}

GenerationResult MockBackend::render(const ScriptEntry& entry) const {
  if (entry.logprobs.empty()) {
    GenerationResult out;
    out.text = entry.completion;
    for (std::size_t i = 0, start = 0; i < entry.token_pieces.size(); ++i) {
      out.tokens.push_back({entry.token_pieces[i], 0.0, start, start + entry.token_pieces[i].size()});
      start += entry.token_pieces[i].size();
    }
    return out;
  }
  if (entry.token_pieces.empty()) {
    const std::vector<std::string> single{entry.completion};
    return GenerationResult::from_pieces(single, entry.logprobs);
  }
  return GenerationResult::from_pieces(entry.token_pieces, entry.logprobs);
}

GenerationResult MockBackend::generate(const GenerationRequest& request) {
  const ScriptEntry* entry = find(request.prompt, request.task_id);
  if (entry == nullptr) {
    throw ConfigError("mock script has no entry for task '" + request.task_id + "'");
  }
  if (entry->error) throw TransportError("scripted failure: " + *entry->error);
  GenerationResult result = render(*entry);
  if (request.want_logprobs && !result.has_logprobs) {
    throw CapabilityError("scripted reply for task '" + request.task_id + "' has no logprobs");
  }
  if (chat_style_) result = unwrap_code_fence(result);
  if (request.max_new_tokens > 0) {
    result = result.truncated(static_cast<std::size_t>(request.max_new_tokens));
  }
  if (!request.want_logprobs) {
    result.has_logprobs = false;
    result.tokens.clear();
  }
  return result;
}

std::vector<double> MockBackend::score(const std::string& prompt, const std::string& continuation) {
  for (const auto& e : entries_) {
    if (e.match && prompt.find(*e.match) == std::string::npos) continue;
    if (!e.completion.starts_with(continuation) || e.logprobs.empty()) continue;
    const GenerationResult scripted = render(e);
    std::vector<double> out;
    for (const auto& t : scripted.tokens) {
      if (t.char_start < continuation.size()) out.push_back(t.logprob);
    }
    if (!out.empty()) return out;
  }
  throw CapabilityError("mock script cannot score '" + continuation + "' after the given prompt");
}

}  // namespace dagkit

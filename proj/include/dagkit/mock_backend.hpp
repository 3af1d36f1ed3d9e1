#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dagkit/model_gateway.hpp"
#include "json.hpp"

namespace dagkit {

// One scripted reply. An entry applies when every selector it sets matches:
// `task_id` equals the request's task id and `match` occurs in the prompt.
struct ScriptEntry {
  std::optional<std::string> match;
  std::optional<std::string> task_id;
  std::string completion;
  std::vector<std::string> token_pieces;  // empty: one piece = completion
  std::vector<double> logprobs;           // empty: no logprobs
  std::optional<std::string> error;       // simulate a transport failure
};

// Replays a JSON script. Pieces and logprobs are used verbatim; first matching
// entry in file order wins. Stateless, so concurrent calls are safe.
class MockBackend final : public Backend {
 public:
  explicit MockBackend(std::vector<ScriptEntry> entries, bool chat_style = false);

  // Accepts a JSON array of entries or {"entries": [...]}.
  static MockBackend from_json(const nlohmann::json& j, bool chat_style = false);
  static MockBackend from_file(const std::filesystem::path& path, bool chat_style = false);

  GenerationResult generate(const GenerationRequest& request) override;
  std::vector<double> score(const std::string& prompt, const std::string& continuation) override;
  std::string name() const override { return "mock"; }

 private:
  const ScriptEntry* find(const std::string& prompt, const std::string& task_id) const;
  GenerationResult render(const ScriptEntry& entry) const;

  std::vector<ScriptEntry> entries_;
  bool chat_style_;
};

}  // namespace dagkit

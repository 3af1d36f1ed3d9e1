#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "dagkit/api_index.hpp"
#include "dagkit/corpus_miner.hpp"
#include "json.hpp"

namespace dagkit {

// One benchmark item. A generation is valid if it binds to any target.
struct Task {
  std::string id;
  Provider provider = Provider::AWS;
  std::string prompt;
  std::vector<std::string> target_apis;
  std::uint64_t frequency_count = 0;
  FrequencyClass frequency_class = FrequencyClass::Low;
};

nlohmann::json to_json(const Task& task);

// Parses and checks one task: class must match count, targets must exist.
Task parse_task(const nlohmann::json& j, const ApiIndex& index);

// Tasks JSONL, one task per non-blank line, order preserved. Errors carry the
// 1-based line number.
std::vector<Task> load_tasks(const std::filesystem::path& path, const ApiIndex& index);
std::vector<Task> parse_tasks_jsonl(std::string_view text, const ApiIndex& index);

}  // namespace dagkit

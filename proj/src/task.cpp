#include "dagkit/task.hpp"

#include <set>

#include "dagkit/errors.hpp"
#include "dagkit/io.hpp"

namespace dagkit {

nlohmann::json to_json(const Task& task) {
  return {{"id", task.id},
          {"provider", std::string(to_string(task.provider))},
          {"prompt", task.prompt},
          {"target_apis", task.target_apis},
          {"frequency_count", task.frequency_count},
          {"frequency_class", std::string(to_string(task.frequency_class))}};
}

Task parse_task(const nlohmann::json& j, const ApiIndex& index) {
  if (!j.is_object()) throw ConfigError("task must be a JSON object");
  Task task;
  try {
    task.id = j.at("id").get<std::string>();
    task.provider = parse_provider(j.at("provider").get<std::string>());
    task.prompt = j.at("prompt").get<std::string>();
    task.target_apis = j.at("target_apis").get<std::vector<std::string>>();
    const auto& count = j.at("frequency_count");
    if (!count.is_number_integer() || count.get<long long>() < 0) {
      throw ConfigError("frequency_count must be a non-negative integer");
    }
    task.frequency_count = count.get<std::uint64_t>();
    task.frequency_class = parse_frequency_class(j.at("frequency_class").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed task: ") + e.what());
  }
  if (task.id.empty()) throw ConfigError("task id is empty");
  if (task.target_apis.empty()) throw ConfigError("task '" + task.id + "' has no target_apis");
  const FrequencyClass expected = classify_frequency(task.frequency_count);
  if (expected != task.frequency_class) {
    throw ConfigError("task '" + task.id + "': frequency_class '" + std::string(to_string(task.frequency_class)) +
                      "' does not match frequency_count " + std::to_string(task.frequency_count) + " (expected '" +
                      std::string(to_string(expected)) + "')");
  }
  for (const auto& target : task.target_apis) {
    if (!index.contains(target)) {
      throw ConfigError("task '" + task.id + "': target API '" + target + "' is not in the index");
    }
  }
  return task;
}

std::vector<Task> parse_tasks_jsonl(std::string_view text, const ApiIndex& index) {
  std::vector<Task> tasks;
  std::set<std::string> ids;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].find_first_not_of(" \t") == std::string::npos) continue;
    const std::string where = "line " + std::to_string(i + 1);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(lines[i]);
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError(where + ": invalid JSON: " + e.what());
    }
    try {
      tasks.push_back(parse_task(j, index));
      if (!ids.insert(tasks.back().id).second) throw ConfigError("duplicate task id '" + tasks.back().id + "'");
    } catch (const ConfigError& e) {
      throw ConfigError(where + ": " + e.what());
    }
  }
  return tasks;
}

std::vector<Task> load_tasks(const std::filesystem::path& path, const ApiIndex& index) {
  try {
    return parse_tasks_jsonl(read_text_file(path), index);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

}  // namespace dagkit

#include "dagkit/bench.hpp"

#include <atomic>
#include <cstdio>
#include <exception>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "dagkit/errors.hpp"
#include "dagkit/io.hpp"

namespace dagkit {

nlohmann::json RunConfig::echo() const {
  nlohmann::json j{{"policy", std::string(to_string(policy.kind))},
                   {"precision", retriever.precision_x},
                   {"k", retriever.k},
                   {"seed", retriever.seed},
                   {"augmentation", std::string(to_string(design))},
                   {"pin_target_first", retriever.pin_target_first},
                   {"max_new_tokens", max_new_tokens},
                   {"binding_mode", bind_mode ? std::string(to_string(*bind_mode)) : std::string("auto")}};
  j["threshold"] = policy.uses_confidence() ? nlohmann::json(policy.threshold) : nlohmann::json(nullptr);
  return j;
}

BenchmarkRun run_benchmark(std::span<const Task> tasks, const ApiIndex& index, Backend& backend,
                           const RunConfig& config) {
  config.policy.check();
  config.retriever.check();
  std::vector<std::string> ids;
  ids.reserve(tasks.size());
  for (const auto& t : tasks) ids.push_back(t.id);

  BenchmarkRun run;
  run.plan = plan_inclusions(ids, config.retriever.precision_x, config.retriever.seed);
  const Bm25Retriever retriever(index, config.retriever.bm25_k1, config.retriever.bm25_b);
  const Pipeline pipeline{index,
                          retriever,
                          run.plan,
                          backend,
                          config.retriever,
                          config.design,
                          config.bind_mode,
                          config.max_new_tokens,
                          config.system_prompt,
                          ExtractOptions{},
                          TokenCounter{}};

  run.traces.resize(tasks.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      try {
        run.traces[i] = run_task(tasks[i], config.policy, pipeline);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = tasks.size();
      }
    }
  };
  const std::size_t threads = std::max<std::size_t>(1, std::min(config.parallelism, tasks.size()));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return run;
}

std::string traces_to_jsonl(std::span<const TaskTrace> traces) {
  std::string out;
  for (const auto& t : traces) {
    out += to_json(t).dump();
    out += '\n';
  }
  return out;
}

std::vector<TaskTrace> parse_traces_jsonl(std::string_view text) {
  std::vector<TaskTrace> traces;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].find_first_not_of(" \t") == std::string::npos) continue;
    try {
      traces.push_back(trace_from_json(nlohmann::json::parse(lines[i])));
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError("results line " + std::to_string(i + 1) + ": invalid JSON: " + e.what());
    } catch (const ConfigError& e) {
      throw ConfigError("results line " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return traces;
}

namespace {

double percent(std::size_t part, std::size_t whole) {
  return whole == 0 ? 0.0 : 100.0 * static_cast<double>(part) / static_cast<double>(whole);
}

void tally(ClassStats& stats, const TaskTrace& trace) {
  ++stats.task_count;
  if (trace.errored) {
    ++stats.errored;
    return;
  }
  if (trace.triggered) ++stats.triggered;
  if (trace.verdict.valid) ++stats.valid;
  switch (trace.verdict.category) {
    case HallucinationCategory::NonExistingApi:
      ++stats.taxonomy.non_existing_api;
      break;
    case HallucinationCategory::IncorrectExistingApi:
      ++stats.taxonomy.incorrect_existing_api;
      break;
    case HallucinationCategory::InvalidUsageOfTarget:
      ++stats.taxonomy.invalid_usage_of_target;
      break;
    case HallucinationCategory::None:
      if (trace.verdict.reason == VerdictReason::NoCallFound) ++stats.taxonomy.no_call_found;
      break;
  }
}

void finish(ClassStats& stats) {
  stats.valid_pct = percent(stats.valid, stats.evaluated());
  stats.retrieval_triggered_pct = percent(stats.triggered, stats.evaluated());
}

nlohmann::json class_json(const ClassStats& s) {
  return {{"task_count", s.task_count},
          {"evaluated", s.evaluated()},
          {"errored", s.errored},
          {"valid", s.valid},
          {"triggered", s.triggered},
          {"valid_pct", s.valid_pct},
          {"retrieval_triggered_pct", s.retrieval_triggered_pct},
          {"taxonomy",
           {{"non_existing_api", s.taxonomy.non_existing_api},
            {"incorrect_existing_api", s.taxonomy.incorrect_existing_api},
            {"invalid_usage_of_target", s.taxonomy.invalid_usage_of_target},
            {"no_call_found", s.taxonomy.no_call_found}}}};
}

std::string fixed2(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", value);
  return buf;
}

constexpr std::array<FrequencyClass, 3> kColumnOrder = {FrequencyClass::High, FrequencyClass::Medium,
                                                        FrequencyClass::Low};

}  // namespace

Report aggregate(std::span<const TaskTrace> traces, std::span<const Task> tasks, const nlohmann::json& config) {
  std::unordered_map<std::string, const Task*> by_id;
  for (const auto& t : tasks) by_id.emplace(t.id, &t);
  Report report;
  report.config = config;
  std::size_t augmented = 0;
  std::size_t augmentation_tokens = 0;
  std::set<std::string> seen;
  for (const auto& trace : traces) {
    auto it = by_id.find(trace.task_id);
    if (it == by_id.end()) throw ConfigError("trace for unknown task '" + trace.task_id + "'");
    if (!seen.insert(trace.task_id).second) throw ConfigError("duplicate trace for task '" + trace.task_id + "'");
    tally(report.per_class[static_cast<std::size_t>(it->second->frequency_class)], trace);
    tally(report.overall, trace);
    if (trace.triggered && !trace.errored) {
      ++augmented;
      augmentation_tokens += trace.augmentation_tokens;
    }
  }
  for (auto& s : report.per_class) finish(s);
  finish(report.overall);
  report.avg_augmentation_tokens =
      augmented == 0 ? 0.0 : static_cast<double>(augmentation_tokens) / static_cast<double>(augmented);
  return report;
}

ReportFormat parse_report_format(std::string_view text) {
  if (text == "json") return ReportFormat::Json;
  if (text == "markdown" || text == "md") return ReportFormat::Markdown;
  throw ConfigError("unknown report format '" + std::string(text) + "' (expected json|markdown)");
}

nlohmann::json report_to_json(const Report& report) {
  nlohmann::json classes = nlohmann::json::object();
  for (auto cls : kColumnOrder) classes[std::string(to_string(cls))] = class_json(report.of(cls));
  return {{"config", report.config},
          {"classes", std::move(classes)},
          {"overall", class_json(report.overall)},
          {"avg_augmentation_tokens", report.avg_augmentation_tokens}};
}

std::string emit_report(const Report& report, ReportFormat format) {
  if (format == ReportFormat::Json) return report_to_json(report).dump(2) + "\n";

  const auto& cfg = report.config;
  auto cfg_value = [&](const char* key) {
    if (!cfg.contains(key) || cfg[key].is_null()) return std::string("-");
    return cfg[key].is_string() ? cfg[key].get<std::string>() : cfg[key].dump();
  };
  std::ostringstream md;
  md << "# Benchmark report\n\n";
  md << "policy: " << cfg_value("policy") << " | precision: " << cfg_value("precision") << " | k: "
     << cfg_value("k") << " | threshold: " << cfg_value("threshold") << " | seed: " << cfg_value("seed")
     << " | augmentation: " << cfg_value("augmentation") << "\n\n";
  md << "| Method | Triggered High (%) | Triggered Med. (%) | Triggered Low (%) | Valid High (%) | Valid Med. (%) "
        "| Valid Low (%) | Valid Avg. (%) |\n";
  md << "|---|---|---|---|---|---|---|---|\n";
  md << "| " << cfg_value("policy");
  for (auto cls : kColumnOrder) md << " | " << fixed2(report.of(cls).retrieval_triggered_pct);
  for (auto cls : kColumnOrder) md << " | " << fixed2(report.of(cls).valid_pct);
  md << " | " << fixed2(report.overall.valid_pct) << " |\n\n";

  md << "| Class | Tasks | Errored | Valid | Non-existing API | Incorrect existing API | Invalid usage of target "
        "| No call found |\n";
  md << "|---|---|---|---|---|---|---|---|\n";
  auto row = [&](std::string_view label, const ClassStats& s) {
    md << "| " << label << " | " << s.task_count << " | " << s.errored << " | " << s.valid << " | "
       << s.taxonomy.non_existing_api << " | " << s.taxonomy.incorrect_existing_api << " | "
       << s.taxonomy.invalid_usage_of_target << " | " << s.taxonomy.no_call_found << " |\n";
  };
  for (auto cls : kColumnOrder) row(to_string(cls), report.of(cls));
  row("all", report.overall);
  md << "\nAvg. augmentation tokens: " << fixed2(report.avg_augmentation_tokens) << "\n";
  return md.str();
}

std::vector<std::pair<std::string, double>> parse_markdown_report(std::string_view markdown) {
  static const std::array<const char*, 7> keys = {"triggered_pct.high", "triggered_pct.medium", "triggered_pct.low",
                                                  "valid_pct.high",     "valid_pct.medium",     "valid_pct.low",
                                                  "valid_pct.avg"};
  const auto lines = split_lines(markdown);
  for (std::size_t i = 0; i + 2 < lines.size(); ++i) {
    if (!lines[i].starts_with("| Method |")) continue;
    std::vector<std::string> cells;
    std::stringstream row(lines[i + 2]);
    std::string cell;
    while (std::getline(row, cell, '|')) {
      const auto b = cell.find_first_not_of(' ');
      const auto e = cell.find_last_not_of(' ');
      if (b != std::string::npos) cells.push_back(cell.substr(b, e - b + 1));
    }
    if (cells.size() != keys.size() + 1) throw ConfigError("markdown report row has unexpected shape");
    std::vector<std::pair<std::string, double>> out;
    for (std::size_t k = 0; k < keys.size(); ++k) out.emplace_back(keys[k], std::stod(cells[k + 1]));
    return out;
  }
  throw ConfigError("markdown report has no method row");
}

}  // namespace dagkit

#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dagkit/policy_engine.hpp"
#include "dagkit/task.hpp"
#include "json.hpp"

namespace dagkit {

struct RunConfig {
  Policy policy;
  RetrieverConfig retriever;
  AugmentationDesign design = AugmentationDesign::DescriptionPlusSpecification;
  std::optional<BindMode> bind_mode;
  int max_new_tokens = kDefaultMaxNewTokens;
  std::optional<std::string> system_prompt;
  std::size_t parallelism = 1;

  nlohmann::json echo() const;
};

struct BenchmarkRun {
  InclusionPlan plan;
  std::vector<TaskTrace> traces;  // same order as the input tasks
};

// Plans inclusions over the task ids (in order) and runs every task. Traces are
// independent of `parallelism`.
BenchmarkRun run_benchmark(std::span<const Task> tasks, const ApiIndex& index, Backend& backend,
                           const RunConfig& config);

std::string traces_to_jsonl(std::span<const TaskTrace> traces);
std::vector<TaskTrace> parse_traces_jsonl(std::string_view text);

struct TaxonomyCounts {
  std::size_t non_existing_api = 0;
  std::size_t incorrect_existing_api = 0;
  std::size_t invalid_usage_of_target = 0;
  std::size_t no_call_found = 0;

  friend bool operator==(const TaxonomyCounts&, const TaxonomyCounts&) = default;
};

struct ClassStats {
  std::size_t task_count = 0;  // all tasks of the class
  std::size_t errored = 0;     // excluded from the percentages below
  std::size_t valid = 0;
  std::size_t triggered = 0;
  double valid_pct = 0.0;
  double retrieval_triggered_pct = 0.0;
  TaxonomyCounts taxonomy;

  std::size_t evaluated() const { return task_count - errored; }
  friend bool operator==(const ClassStats&, const ClassStats&) = default;
};

struct Report {
  std::array<ClassStats, 3> per_class;  // indexed by FrequencyClass
  ClassStats overall;                   // pooled over every evaluated task
  double avg_augmentation_tokens = 0.0; // over triggered, non-errored traces
  nlohmann::json config = nlohmann::json::object();

  const ClassStats& of(FrequencyClass cls) const { return per_class[static_cast<std::size_t>(cls)]; }
};

// Joins traces to tasks by id. Order of traces does not matter. Throws
// ConfigError for traces without a task.
Report aggregate(std::span<const TaskTrace> traces, std::span<const Task> tasks,
                 const nlohmann::json& config = nlohmann::json::object());

enum class ReportFormat { Json, Markdown };
ReportFormat parse_report_format(std::string_view text);

std::string emit_report(const Report& report, ReportFormat format);

nlohmann::json report_to_json(const Report& report);

// Reads back the rows of a markdown report: "valid_pct.high", "triggered_pct.low",
// "valid_pct.avg", ... mapped to their printed values.
std::vector<std::pair<std::string, double>> parse_markdown_report(std::string_view markdown);

}  // namespace dagkit

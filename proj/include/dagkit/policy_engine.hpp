#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dagkit/api_index.hpp"
#include "dagkit/augmenter.hpp"
#include "dagkit/invocation.hpp"
#include "dagkit/model_gateway.hpp"
#include "dagkit/retriever.hpp"
#include "dagkit/task.hpp"
#include "json.hpp"

namespace dagkit {

enum class PolicyKind { Base, Dag, IndexLookup, ConfidenceThreshold, DagPlusPlus };

// CLI spellings: base, dag, index-lookup, confidence, dag++.
std::string_view to_string(PolicyKind kind);
PolicyKind parse_policy_kind(std::string_view text);

inline constexpr double kDefaultConfidenceThreshold = 0.8;

struct Policy {
  PolicyKind kind = PolicyKind::DagPlusPlus;
  double threshold = kDefaultConfidenceThreshold;  // read by confidence and dag++ only

  bool uses_confidence() const {
    return kind == PolicyKind::ConfidenceThreshold || kind == PolicyKind::DagPlusPlus;
  }
  void check() const;
};

// Whether the first pass warrants retrieval. Confidence policies with no
// confidence for an existing call fall back to index lookup and append a
// warning.
bool should_retrieve(const Policy& policy, const std::optional<CallCandidate>& first_call,
                     std::optional<double> confidence, const ApiIndex& index,
                     std::vector<std::string>* warnings = nullptr);

// Everything one run shares across tasks. References must outlive run_task.
struct Pipeline {
  const ApiIndex& index;
  const Bm25Retriever& retriever;
  const InclusionPlan& plan;
  Backend& backend;
  RetrieverConfig retriever_config;
  AugmentationDesign design = AugmentationDesign::DescriptionPlusSpecification;
  std::optional<BindMode> bind_mode;
  int max_new_tokens = kDefaultMaxNewTokens;
  std::optional<std::string> system_prompt;
  ExtractOptions extract;
  TokenCounter token_counter;
};

struct TaskTrace {
  std::string task_id;
  GenerationResult first_pass;
  std::optional<CallCandidate> first_call;
  std::optional<double> confidence;
  bool triggered = false;
  std::vector<std::string> query_tokens;
  std::vector<std::string> retrieved_doc_names;
  bool target_included = false;
  std::size_t augmentation_tokens = 0;
  GenerationResult final_pass;
  std::optional<CallCandidate> final_call;
  Verdict verdict;
  bool errored = false;
  std::string error;
  std::vector<std::string> warnings;
};

nlohmann::json to_json(const TaskTrace& trace);
TaskTrace trace_from_json(const nlohmann::json& j);

// Retrieval query when the first pass has no parseable call: tokens of the
// prompt's last comment line (or last non-blank line if it has no comment).
std::vector<std::string> fallback_query(std::string_view prompt);

// generate -> parse -> decide -> (retrieve -> augment -> regenerate) -> judge.
// Backend failures produce an errored trace instead of throwing.
TaskTrace run_task(const Task& task, const Policy& policy, const Pipeline& pipeline);

}  // namespace dagkit

#include "dagkit/policy_engine.hpp"

#include <cmath>

#include "dagkit/errors.hpp"
#include "dagkit/io.hpp"
#include "dagkit/tokenize.hpp"

namespace dagkit {

std::string_view to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::Base:
      return "base";
    case PolicyKind::Dag:
      return "dag";
    case PolicyKind::IndexLookup:
      return "index-lookup";
    case PolicyKind::ConfidenceThreshold:
      return "confidence";
    case PolicyKind::DagPlusPlus:
      return "dag++";
  }
  return "?";
}

PolicyKind parse_policy_kind(std::string_view text) {
  for (auto k : {PolicyKind::Base, PolicyKind::Dag, PolicyKind::IndexLookup, PolicyKind::ConfidenceThreshold,
                 PolicyKind::DagPlusPlus}) {
    if (text == to_string(k)) return k;
  }
  throw ConfigError("unknown policy '" + std::string(text) + "' (expected base|dag|index-lookup|confidence|dag++)");
}

void Policy::check() const {
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw ConfigError("confidence threshold must lie in [0, 1]");
}

bool should_retrieve(const Policy& policy, const std::optional<CallCandidate>& first_call,
                     std::optional<double> confidence, const ApiIndex& index, std::vector<std::string>* warnings) {
  auto index_miss = [&] { return !first_call || !index.contains(terminal_name(first_call->callee_path)); };
  switch (policy.kind) {
    case PolicyKind::Base:
      return false;
    case PolicyKind::Dag:
      return true;
    case PolicyKind::IndexLookup:
      return index_miss();
    case PolicyKind::ConfidenceThreshold:
    case PolicyKind::DagPlusPlus:
      break;
  }
  if (!first_call) return true;
  if (!confidence) {
    if (warnings) warnings->push_back("confidence unavailable; falling back to index lookup");
    return index_miss();
  }
  const bool low_confidence = *confidence < policy.threshold;
  if (policy.kind == PolicyKind::ConfidenceThreshold) return low_confidence;
  return index_miss() || low_confidence;
}

namespace {

nlohmann::json call_to_json(const std::optional<CallCandidate>& call) {
  if (!call) return nullptr;
  return {{"callee", call->callee_path},
          {"positional_count", call->positional_count},
          {"keyword_names", call->keyword_names},
          {"span", {call->span.begin, call->span.end}},
          {"name_span", {call->name_span.begin, call->name_span.end}},
          {"call_end", call->call_end}};
}

std::optional<CallCandidate> call_from_json(const nlohmann::json& j) {
  if (j.is_null()) return std::nullopt;
  CallCandidate c;
  c.callee_path = j.at("callee").get<std::string>();
  c.positional_count = j.at("positional_count").get<std::size_t>();
  c.keyword_names = j.at("keyword_names").get<std::vector<std::string>>();
  c.span = {j.at("span")[0].get<std::size_t>(), j.at("span")[1].get<std::size_t>()};
  c.name_span = {j.at("name_span")[0].get<std::size_t>(), j.at("name_span")[1].get<std::size_t>()};
  c.call_end = j.at("call_end").get<std::size_t>();
  return c;
}

}  // namespace

nlohmann::json to_json(const TaskTrace& trace) {
  nlohmann::json verdict{{"valid", trace.verdict.valid},
                         {"reason", std::string(to_string(trace.verdict.reason))},
                         {"category", std::string(to_string(trace.verdict.category))},
                         {"detail", trace.verdict.detail}};
  return {{"task_id", trace.task_id},
          {"first_pass", to_json(trace.first_pass)},
          {"first_call", call_to_json(trace.first_call)},
          {"confidence", trace.confidence ? nlohmann::json(*trace.confidence) : nlohmann::json(nullptr)},
          {"triggered", trace.triggered},
          {"query_tokens", trace.query_tokens},
          {"retrieved_doc_names", trace.retrieved_doc_names},
          {"target_included", trace.target_included},
          {"augmentation_tokens", trace.augmentation_tokens},
          {"final_pass", to_json(trace.final_pass)},
          {"final_call", call_to_json(trace.final_call)},
          {"verdict", std::move(verdict)},
          {"errored", trace.errored},
          {"error", trace.error},
          {"warnings", trace.warnings}};
}

TaskTrace trace_from_json(const nlohmann::json& j) {
  TaskTrace t;
  try {
    t.task_id = j.at("task_id").get<std::string>();
    t.first_pass = generation_from_json(j.at("first_pass"));
    t.first_call = call_from_json(j.at("first_call"));
    if (!j.at("confidence").is_null()) t.confidence = j.at("confidence").get<double>();
    t.triggered = j.at("triggered").get<bool>();
    t.query_tokens = j.value("query_tokens", std::vector<std::string>{});
    t.retrieved_doc_names = j.value("retrieved_doc_names", std::vector<std::string>{});
    t.target_included = j.value("target_included", false);
    t.augmentation_tokens = j.value("augmentation_tokens", std::size_t{0});
    t.final_pass = generation_from_json(j.at("final_pass"));
    t.final_call = call_from_json(j.at("final_call"));
    const auto& v = j.at("verdict");
    t.verdict.valid = v.at("valid").get<bool>();
    t.verdict.reason = parse_verdict_reason(v.at("reason").get<std::string>());
    t.verdict.category = parse_hallucination_category(v.at("category").get<std::string>());
    t.verdict.detail = v.value("detail", std::string{});
    t.errored = j.value("errored", false);
    t.error = j.value("error", std::string{});
    t.warnings = j.value("warnings", std::vector<std::string>{});
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed trace: ") + e.what());
  }
  return t;
}

std::vector<std::string> fallback_query(std::string_view prompt) {
  std::string last_comment;
  std::string last_nonblank;
  for (const auto& line : split_lines(prompt)) {
    const std::size_t first = line.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    last_nonblank = line;
    if (line[first] == '#') last_comment = line.substr(first + 1);
  }
  return tokenize(last_comment.empty() ? last_nonblank : last_comment);
}

namespace {

GenerationResult generate_with_fallback(Backend& backend, GenerationRequest request, TaskTrace& trace) {
  try {
    return backend.generate(request);
  } catch (const CapabilityError& e) {
    if (!request.want_logprobs) throw;
    trace.warnings.push_back(std::string("logprobs unavailable (") + e.what() + "); retrying without");
    request.want_logprobs = false;
    return backend.generate(request);
  }
}

}  // namespace

TaskTrace run_task(const Task& task, const Policy& policy, const Pipeline& pipeline) {
  TaskTrace trace;
  trace.task_id = task.id;

  GenerationRequest request;
  request.prompt = task.prompt;
  request.max_new_tokens = pipeline.max_new_tokens;
  request.want_logprobs = policy.uses_confidence();
  request.system_prompt = pipeline.system_prompt;
  request.task_id = task.id;

  try {
    trace.first_pass = generate_with_fallback(pipeline.backend, request, trace);
  } catch (const std::runtime_error& e) {
    trace.errored = true;
    trace.error = std::string("first pass: ") + e.what();
    return trace;
  }
  trace.first_call = extract_first_call(trace.first_pass.text, pipeline.extract);
  if (policy.uses_confidence() && trace.first_call && trace.first_pass.has_logprobs) {
    trace.confidence = api_confidence(trace.first_pass, trace.first_call->name_span);
  }

  trace.triggered =
      should_retrieve(policy, trace.first_call, trace.confidence, pipeline.index, &trace.warnings);

  if (!trace.triggered) {
    trace.final_pass = trace.first_pass;
    trace.final_call = trace.first_call;
  } else {
    trace.query_tokens = trace.first_call ? tokenize(terminal_name(trace.first_call->callee_path))
                                          : fallback_query(task.prompt);
    trace.target_included = pipeline.plan.includes(task.id);
    const auto docs = precision_retrieve(pipeline.retriever, task.target_apis, task.provider, trace.query_tokens,
                                         pipeline.retriever_config, trace.target_included);
    std::vector<const ApiSpec*> specs;
    for (const auto& d : docs) {
      specs.push_back(&pipeline.index.spec(d.id));
      trace.retrieved_doc_names.push_back(pipeline.index.spec(d.id).name);
    }
    const AugmentedPrompt augmented = augment(task.prompt, specs, pipeline.design, pipeline.token_counter);
    trace.augmentation_tokens = augmented.augmentation_token_count;

    GenerationRequest second = request;
    second.prompt = augmented.text;
    second.want_logprobs = false;
    try {
      trace.final_pass = pipeline.backend.generate(second);
    } catch (const std::runtime_error& e) {
      trace.errored = true;
      trace.error = std::string("second pass: ") + e.what();
      return trace;
    }
    trace.final_call = extract_first_call(trace.final_pass.text, pipeline.extract);
  }
  trace.verdict = validate(trace.final_call, task.target_apis, pipeline.index, pipeline.bind_mode);
  return trace;
}

}  // namespace dagkit

#include "dagkit/invocation.hpp"

#include <algorithm>
#include <array>

#include "dagkit/errors.hpp"
#include "dagkit/python_lexer.hpp"

namespace dagkit {

namespace {

constexpr std::array<std::string_view, 33> kPythonKeywords = {
    "False", "None",   "True",  "and",    "as",       "assert", "async",  "await", "break",
    "class", "continue", "def", "del",    "elif",     "else",   "except", "finally", "for",
    "from",  "global", "if",    "import", "in",       "is",     "lambda", "nonlocal", "not",
    "or",    "pass",   "raise", "return", "try",      "while"};

bool is_keyword(std::string_view word) {
  return std::find(kPythonKeywords.begin(), kPythonKeywords.end(), word) != kPythonKeywords.end() ||
         word == "with" || word == "yield";
}

bool is_op(const PyToken& tok, std::string_view source, std::string_view op) {
  return tok.kind == PyTokenKind::Op && tok.text(source) == op;
}

bool is_opener(std::string_view t) { return t == "(" || t == "[" || t == "{"; }

char closer_for(char opener) {
  switch (opener) {
    case '(':
      return ')';
    case '[':
      return ']';
    default:
      return '}';
  }
}

// match[i] = index of the closing bracket for opener i, or npos.
std::vector<std::size_t> match_brackets(const std::vector<PyToken>& tokens, std::string_view source) {
  constexpr std::size_t npos = static_cast<std::size_t>(-1);
  std::vector<std::size_t> match(tokens.size(), npos);
  std::vector<std::size_t> stack;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i].kind != PyTokenKind::Op) continue;
    const std::string_view t = tokens[i].text(source);
    if (is_opener(t)) {
      stack.push_back(i);
    } else if (t == ")" || t == "]" || t == "}") {
      if (!stack.empty() && closer_for(source[tokens[stack.back()].begin]) == t.front()) {
        match[stack.back()] = i;
        stack.pop_back();
      }
    }
  }
  return match;
}

void classify_argument(const std::vector<PyToken>& tokens, std::size_t first, std::size_t last,
                       std::string_view source, CallCandidate& call) {
  if (first >= last) return;  // empty slot, e.g. a trailing comma
  const PyToken& head = tokens[first];
  if (is_op(head, source, "**")) {
    call.keyword_names.emplace_back(kKeywordSplat);
  } else if (head.kind == PyTokenKind::Name && first + 1 < last && is_op(tokens[first + 1], source, "=")) {
    call.keyword_names.emplace_back(head.text(source));
  } else {
    ++call.positional_count;
  }
}

}  // namespace

std::set<std::string, std::less<>> ExtractOptions::default_ignored_callees() {
  return {"abs",   "all",     "any",     "bool",  "bytes", "dict",   "enumerate", "filter",
          "float", "format",  "getattr", "hasattr", "hash", "id",    "input",     "int",
          "isinstance", "iter", "len",  "list",  "map",   "max",    "min",       "next",
          "open",  "print",   "range",   "repr",  "round", "set",    "setattr",   "sorted",
          "str",   "sum",     "super",   "tuple", "type",  "zip"};
}

std::optional<CallCandidate> extract_first_call(std::string_view text, const ExtractOptions& options) {
  const std::vector<PyToken> tokens = lex_python(text);
  const std::vector<std::size_t> match = match_brackets(tokens, text);
  constexpr std::size_t npos = static_cast<std::size_t>(-1);

  for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
    const PyToken& name = tokens[i];
    if (name.kind != PyTokenKind::Name) continue;
    const PyToken& open = tokens[i + 1];
    if (!is_op(open, text, "(") || open.begin != name.end) continue;
    if (is_keyword(name.text(text))) continue;
    if (match[i + 1] == npos) continue;
    if (i > 0 && tokens[i - 1].kind == PyTokenKind::Name) {
      const std::string_view prev = tokens[i - 1].text(text);
      if (prev == "def" || prev == "class") continue;
    }

    std::size_t head = i;
    while (head >= 2 && is_op(tokens[head - 1], text, ".") && tokens[head - 1].end == tokens[head].begin &&
           tokens[head - 2].kind == PyTokenKind::Name && tokens[head - 2].end == tokens[head - 1].begin &&
           !is_keyword(tokens[head - 2].text(text))) {
      head -= 2;
    }
    if (head == i && options.ignored_callees.count(name.text(text)) != 0) continue;

    CallCandidate call;
    call.span = {tokens[head].begin, name.end};
    call.callee_path = std::string(text.substr(call.span.begin, call.span.size()));
    call.name_span = {name.begin, name.end};
    const std::size_t close = match[i + 1];
    call.call_end = tokens[close].end;

    std::size_t arg_start = i + 2;
    for (std::size_t j = i + 2; j < close; ++j) {
      if (tokens[j].kind == PyTokenKind::Op) {
        const std::string_view t = tokens[j].text(text);
        if (is_opener(t) && match[j] != npos) {
          j = match[j];
          continue;
        }
        if (t == ",") {
          classify_argument(tokens, arg_start, j, text, call);
          arg_start = j + 1;
        }
      }
    }
    classify_argument(tokens, arg_start, close, text, call);
    return call;
  }
  return std::nullopt;
}

std::string_view to_string(BindMode mode) {
  return mode == BindMode::KeywordOnly ? "keyword-only" : "positional-or-keyword";
}

BindMode parse_bind_mode(std::string_view text) {
  if (text == "keyword-only") return BindMode::KeywordOnly;
  if (text == "positional-or-keyword") return BindMode::PositionalOrKeyword;
  throw ConfigError("unknown binding mode '" + std::string(text) + "'");
}

BindMode default_bind_mode(Provider provider) {
  return provider == Provider::AWS ? BindMode::KeywordOnly : BindMode::PositionalOrKeyword;
}

namespace {

constexpr std::array<std::pair<VerdictReason, std::string_view>, 8> kReasonNames = {{
    {VerdictReason::Ok, "ok"},
    {VerdictReason::MissingRequired, "missing_required"},
    {VerdictReason::UnknownKeyword, "unknown_keyword"},
    {VerdictReason::DuplicateKeyword, "duplicate_keyword"},
    {VerdictReason::TooManyPositional, "too_many_positional"},
    {VerdictReason::NoCallFound, "no_call_found"},
    {VerdictReason::NotInIndex, "not_in_index"},
    {VerdictReason::NotATarget, "not_a_target"},
}};

constexpr std::array<std::pair<HallucinationCategory, std::string_view>, 4> kCategoryNames = {{
    {HallucinationCategory::None, "none"},
    {HallucinationCategory::NonExistingApi, "non_existing_api"},
    {HallucinationCategory::IncorrectExistingApi, "incorrect_existing_api"},
    {HallucinationCategory::InvalidUsageOfTarget, "invalid_usage_of_target"},
}};

}  // namespace

std::string_view to_string(VerdictReason reason) {
  for (const auto& [r, name] : kReasonNames) {
    if (r == reason) return name;
  }
  return "?";
}

std::string_view to_string(HallucinationCategory category) {
  for (const auto& [c, name] : kCategoryNames) {
    if (c == category) return name;
  }
  return "?";
}

VerdictReason parse_verdict_reason(std::string_view text) {
  for (const auto& [r, name] : kReasonNames) {
    if (name == text) return r;
  }
  throw ConfigError("unknown verdict reason '" + std::string(text) + "'");
}

HallucinationCategory parse_hallucination_category(std::string_view text) {
  for (const auto& [c, name] : kCategoryNames) {
    if (name == text) return c;
  }
  throw ConfigError("unknown hallucination category '" + std::string(text) + "'");
}

Verdict bind(const ApiSpec& spec, const CallCandidate& call, BindMode mode) {
  if (terminal_name(call.callee_path) != spec.name) {
    throw ContractError("bind: call '" + call.callee_path + "' does not name '" + spec.name + "'");
  }
  auto fail = [](VerdictReason reason, std::string detail) {
    return Verdict{false, reason, HallucinationCategory::None, std::move(detail)};
  };

  std::vector<std::string_view> formals;
  formals.reserve(spec.required_params.size() + spec.optional_params.size());
  for (const auto& p : spec.required_params) formals.push_back(p);
  for (const auto& p : spec.optional_params) formals.push_back(p);

  if (mode == BindMode::KeywordOnly && call.positional_count > 0) {
    return fail(VerdictReason::TooManyPositional, std::to_string(call.positional_count) + " positional");
  }
  if (call.positional_count > formals.size()) {
    return fail(VerdictReason::TooManyPositional, std::to_string(call.positional_count) + " positional");
  }
  std::vector<bool> bound(formals.size(), false);
  std::fill_n(bound.begin(), call.positional_count, true);

  std::vector<std::size_t> keyword_slots;
  for (const auto& kw : call.keyword_names) {
    auto it = std::find(formals.begin(), formals.end(), kw);
    if (it == formals.end()) return fail(VerdictReason::UnknownKeyword, kw);
    keyword_slots.push_back(static_cast<std::size_t>(it - formals.begin()));
  }
  for (std::size_t i = 0; i < keyword_slots.size(); ++i) {
    const std::size_t slot = keyword_slots[i];
    if (bound[slot]) return fail(VerdictReason::DuplicateKeyword, call.keyword_names[i]);
    bound[slot] = true;
  }
  for (std::size_t i = 0; i < spec.required_params.size(); ++i) {
    if (!bound[i]) return fail(VerdictReason::MissingRequired, spec.required_params[i]);
  }
  return Verdict::ok();
}

Verdict validate(const std::optional<CallCandidate>& call, std::span<const std::string> targets,
                 const ApiIndex& index, std::optional<BindMode> mode_override) {
  if (targets.empty()) throw ConfigError("validate: task has no target APIs");
  for (const auto& t : targets) {
    if (!index.contains(t)) throw ConfigError("target API '" + t + "' is not in the index");
  }
  if (!call) return Verdict{false, VerdictReason::NoCallFound, HallucinationCategory::None, {}};

  const std::string name = terminal_name(call->callee_path);
  if (!index.contains(name)) {
    return Verdict{false, VerdictReason::NotInIndex, HallucinationCategory::NonExistingApi, name};
  }
  if (std::find(targets.begin(), targets.end(), name) == targets.end()) {
    return Verdict{false, VerdictReason::NotATarget, HallucinationCategory::IncorrectExistingApi, name};
  }
  std::optional<Verdict> first_failure;
  for (const ApiSpec* spec : index.lookup(name)) {
    Verdict v = bind(*spec, *call, mode_override.value_or(default_bind_mode(spec->provider)));
    if (v.valid) return v;
    if (!first_failure) first_failure = std::move(v);
  }
  first_failure->category = HallucinationCategory::InvalidUsageOfTarget;
  return *first_failure;
}

nlohmann::json verdict_to_json(const Verdict& verdict, const std::optional<CallCandidate>& call) {
  nlohmann::json j{{"valid", verdict.valid},
                   {"reason", std::string(to_string(verdict.reason))},
                   {"category", std::string(to_string(verdict.category))}};
  if (!verdict.detail.empty()) j["detail"] = verdict.detail;
  if (call) {
    j["callee"] = call->callee_path;
    j["span"] = {call->span.begin, call->span.end};
  } else {
    j["callee"] = nullptr;
    j["span"] = nullptr;
  }
  return j;
}

}  // namespace dagkit

#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dagkit/api_index.hpp"
#include "json.hpp"

namespace dagkit {

struct CharSpan {
  std::size_t begin = 0;
  std::size_t end = 0;  // exclusive

  bool empty() const { return end <= begin; }
  std::size_t size() const { return end - begin; }
  friend bool operator==(const CharSpan&, const CharSpan&) = default;
};

// Keyword placeholder recorded for a `**mapping` argument; never a real name,
// so binding always reports it as UnknownKeyword.
inline constexpr std::string_view kKeywordSplat = "**";

struct CallCandidate {
  std::string callee_path;                 // "client.delete_message"
  std::size_t positional_count = 0;
  std::vector<std::string> keyword_names;  // as written, duplicates kept
  CharSpan span;                           // callee path in the source text
  CharSpan name_span;                      // terminal segment only
  std::size_t call_end = 0;                // one past the closing ')'

  friend bool operator==(const CallCandidate&, const CallCandidate&) = default;
};

struct ExtractOptions {
  // Callees never treated as the judged invocation; the scan continues inside
  // their arguments. Defaults to common Python builtins.
  std::set<std::string, std::less<>> ignored_callees = default_ignored_callees();

  static std::set<std::string, std::less<>> default_ignored_callees();
};

// First complete call in `text`, ordered by where the callee starts.
std::optional<CallCandidate> extract_first_call(std::string_view text, const ExtractOptions& options = {});

enum class BindMode { KeywordOnly, PositionalOrKeyword };
std::string_view to_string(BindMode mode);
BindMode parse_bind_mode(std::string_view text);
// Provider SDK convention: AWS client methods are keyword-only.
BindMode default_bind_mode(Provider provider);

enum class VerdictReason {
  Ok,
  MissingRequired,
  UnknownKeyword,
  DuplicateKeyword,
  TooManyPositional,
  NoCallFound,
  NotInIndex,
  NotATarget,
};

enum class HallucinationCategory { None, NonExistingApi, IncorrectExistingApi, InvalidUsageOfTarget };

std::string_view to_string(VerdictReason reason);
std::string_view to_string(HallucinationCategory category);
VerdictReason parse_verdict_reason(std::string_view text);
HallucinationCategory parse_hallucination_category(std::string_view text);

struct Verdict {
  bool valid = false;
  VerdictReason reason = VerdictReason::NoCallFound;
  HallucinationCategory category = HallucinationCategory::None;
  std::string detail;  // offending parameter or callee, when there is one

  static Verdict ok() { return {true, VerdictReason::Ok, HallucinationCategory::None, {}}; }
  friend bool operator==(const Verdict&, const Verdict&) = default;
};

// Binds `call` against the stub of `spec`. Formals are required params then
// optional params. Checks run in a fixed order and the first failure wins:
// too many positionals, unknown keyword, keyword bound twice, missing required.
// Throws ContractError if the call does not name `spec`.
Verdict bind(const ApiSpec& spec, const CallCandidate& call, BindMode mode);

// Judges a generation's first call against the task's targets. `mode_override`
// replaces the per-provider default binding mode. Throws ConfigError for
// targets missing from the index.
Verdict validate(const std::optional<CallCandidate>& call, std::span<const std::string> targets,
                 const ApiIndex& index, std::optional<BindMode> mode_override = std::nullopt);

nlohmann::json verdict_to_json(const Verdict& verdict, const std::optional<CallCandidate>& call);

}  // namespace dagkit

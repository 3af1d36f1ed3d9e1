#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dagkit/api_index.hpp"

namespace dagkit {

// Decides which corpus files count toward a provider's API frequencies.
struct ProviderFilter {
  Provider provider = Provider::AWS;
  std::set<std::string> import_names;
  std::set<std::string> path_substrings;

  static ProviderFilter aws();
  static ProviderFilter azure();
};

enum class FrequencyClass { Low, Medium, High };

std::string_view to_string(FrequencyClass cls);
FrequencyClass parse_frequency_class(std::string_view text);

// Low: 0-10, Medium: 11-100, High: >= 101.
FrequencyClass classify_frequency(std::uint64_t count);

struct FrequencyRecord {
  std::string api_name;
  std::uint64_t count = 0;
  FrequencyClass cls = FrequencyClass::Low;

  friend bool operator==(const FrequencyRecord&, const FrequencyRecord&) = default;
};

bool file_relevant(std::string_view path, std::string_view file_text, const ProviderFilter& filter);

// Counts call sites (`x.name(`, `name(` after whitespace, `=`, `(`, `,` or at
// line start) and definitions (`def name(`). Strings and comments are skipped.
std::map<std::string, std::uint64_t> count_occurrences(std::string_view file_text,
                                                       const std::set<std::string>& names);

using WarningSink = std::function<void(const std::string&)>;

// Walks `corpus_root` (".py" files only, lexicographic path order) and returns
// one record per API name whose provider has a filter, sorted by name.
// Unreadable files are reported to `warn` and skipped.
std::vector<FrequencyRecord> mine(const std::filesystem::path& corpus_root, const ApiIndex& index,
                                  std::span<const ProviderFilter> filters,
                                  const WarningSink& warn = {});

std::string to_jsonl(std::span<const FrequencyRecord> records);

}  // namespace dagkit

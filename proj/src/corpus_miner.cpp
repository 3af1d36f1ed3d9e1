#include "dagkit/corpus_miner.hpp"

#include <algorithm>
#include <cctype>
#include <system_error>

#include "dagkit/errors.hpp"
#include "dagkit/io.hpp"
#include "dagkit/python_lexer.hpp"
#include "json.hpp"

namespace dagkit {

namespace fs = std::filesystem;

ProviderFilter ProviderFilter::aws() {
  return {Provider::AWS, {"boto3", "botocore"}, {"aws", "boto", "amazon"}};
}

ProviderFilter ProviderFilter::azure() { return {Provider::Azure, {"azure"}, {"azure"}}; }

std::string_view to_string(FrequencyClass cls) {
  switch (cls) {
    case FrequencyClass::Low:
      return "low";
    case FrequencyClass::Medium:
      return "medium";
    case FrequencyClass::High:
      return "high";
  }
  return "?";
}

FrequencyClass parse_frequency_class(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "low") return FrequencyClass::Low;
  if (lower == "medium") return FrequencyClass::Medium;
  if (lower == "high") return FrequencyClass::High;
  throw ConfigError("unknown frequency class '" + std::string(text) + "'");
}

FrequencyClass classify_frequency(std::uint64_t count) {
  if (count <= 10) return FrequencyClass::Low;
  if (count <= 100) return FrequencyClass::Medium;
  return FrequencyClass::High;
}

namespace {

std::string lowercase(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string_view first_segment(std::string_view dotted) {
  return dotted.substr(0, dotted.find('.'));
}

std::string_view trim_left(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  return s;
}

// Module names imported by one line: `import a.b, c as d` or `from a.b import x`.
std::vector<std::string_view> imported_modules(std::string_view line) {
  std::vector<std::string_view> modules;
  line = trim_left(line);
  auto take_word = [](std::string_view& s) {
    s = trim_left(s);
    std::size_t j = 0;
    while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_' || s[j] == '.')) ++j;
    std::string_view word = s.substr(0, j);
    s.remove_prefix(j);
    return word;
  };
  if (line.starts_with("from ") || line.starts_with("from\t")) {
    line.remove_prefix(5);
    const std::string_view module = take_word(line);
    if (!module.empty() && module.front() != '.') modules.push_back(module);
  } else if (line.starts_with("import ") || line.starts_with("import\t")) {
    line.remove_prefix(7);
    while (!line.empty()) {
      const std::string_view module = take_word(line);
      if (module.empty()) break;
      modules.push_back(module);
      const std::size_t comma = line.find(',');
      if (comma == std::string_view::npos) break;
      line.remove_prefix(comma + 1);
    }
  }
  return modules;
}

}  // namespace

bool file_relevant(std::string_view path, std::string_view file_text, const ProviderFilter& filter) {
  const std::string lower_path = lowercase(path);
  for (const auto& needle : filter.path_substrings) {
    if (lower_path.find(lowercase(needle)) != std::string::npos) return true;
  }
  for (const auto& line : split_lines(file_text)) {
    for (std::string_view module : imported_modules(line)) {
      if (filter.import_names.count(std::string(first_segment(module))) != 0) return true;
    }
  }
  return false;
}

std::map<std::string, std::uint64_t> count_occurrences(std::string_view file_text,
                                                       const std::set<std::string>& names) {
  std::map<std::string, std::uint64_t> counts;
  for (const auto& name : names) counts[name] = 0;
  const std::vector<PyToken> tokens = lex_python(file_text);
  for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
    const PyToken& tok = tokens[i];
    if (tok.kind != PyTokenKind::Name) continue;
    const PyToken& next = tokens[i + 1];
    if (next.kind != PyTokenKind::Op || next.begin != tok.end || file_text[next.begin] != '(') continue;
    auto it = counts.find(std::string(tok.text(file_text)));
    if (it == counts.end()) continue;
    bool position_ok = tok.begin == 0;
    if (!position_ok) {
      const char prev = file_text[tok.begin - 1];
      position_ok = prev == '.' || prev == ' ' || prev == '\t' || prev == '\n' || prev == '\r' ||
                    prev == '=' || prev == '(' || prev == ',';
    }
    if (position_ok) ++it->second;
  }
  return counts;
}

std::vector<FrequencyRecord> mine(const fs::path& corpus_root, const ApiIndex& index,
                                  std::span<const ProviderFilter> filters, const WarningSink& warn) {
  auto report = [&](const std::string& message) {
    if (warn) warn(message);
  };

  // name -> providers (among the filtered ones) that define it
  std::map<std::string, std::set<Provider>> name_providers;
  std::set<Provider> filtered;
  for (const auto& f : filters) filtered.insert(f.provider);
  for (const auto& spec : index.specs()) {
    if (filtered.count(spec.provider) != 0) name_providers[spec.name].insert(spec.provider);
  }
  std::set<std::string> names;
  for (const auto& [name, _] : name_providers) names.insert(name);

  std::map<std::string, std::uint64_t> totals;
  for (const auto& name : names) totals[name] = 0;

  std::vector<fs::path> files;
  std::error_code ec;
  if (!fs::is_directory(corpus_root, ec)) {
    throw IoError("corpus root is not a readable directory: " + corpus_root.string());
  }
  for (fs::recursive_directory_iterator it(corpus_root, fs::directory_options::skip_permission_denied, ec), end;
       !ec && it != end; it.increment(ec)) {
    std::error_code type_ec;
    if (it->is_regular_file(type_ec) && it->path().extension() == ".py") files.push_back(it->path());
  }
  if (ec) report("directory walk stopped early: " + ec.message());
  std::sort(files.begin(), files.end());

  for (const auto& file : files) {
    std::string text;
    try {
      text = read_text_file(file);
    } catch (const IoError& e) {
      report(std::string("skipping unreadable file: ") + e.what());
      continue;
    }
    const std::string rel = file.lexically_relative(corpus_root).generic_string();
    std::set<Provider> relevant;
    for (const auto& f : filters) {
      if (file_relevant(rel, text, f)) relevant.insert(f.provider);
    }
    if (relevant.empty()) continue;
    std::set<std::string> wanted;
    for (const auto& [name, providers] : name_providers) {
      for (Provider p : providers) {
        if (relevant.count(p) != 0) {
          wanted.insert(name);
          break;
        }
      }
    }
    if (wanted.empty()) continue;
    for (const auto& [name, count] : count_occurrences(text, wanted)) totals[name] += count;
  }

  std::vector<FrequencyRecord> records;
  records.reserve(totals.size());
  for (const auto& [name, count] : totals) records.push_back({name, count, classify_frequency(count)});
  return records;
}

std::string to_jsonl(std::span<const FrequencyRecord> records) {
  std::string out;
  for (const auto& r : records) {
    nlohmann::json j{{"api_name", r.api_name}, {"count", r.count}, {"class", std::string(to_string(r.cls))}};
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace dagkit

#include "dagkit/api_index.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <tuple>

#include "dagkit/errors.hpp"
#include "dagkit/io.hpp"
#include "dagkit/tokenize.hpp"

namespace dagkit {

std::string_view to_string(Provider provider) {
  switch (provider) {
    case Provider::AWS:
      return "AWS";
    case Provider::Azure:
      return "Azure";
  }
  return "?";
}

Provider parse_provider(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "aws") return Provider::AWS;
  if (lower == "azure") return Provider::Azure;
  throw ConfigError("unknown provider '" + std::string(text) + "' (expected AWS or Azure)");
}

bool is_identifier(std::string_view text) {
  if (text.empty()) return false;
  auto word = [](unsigned char c) { return std::isalnum(c) || c == '_'; };
  if (std::isdigit(static_cast<unsigned char>(text.front()))) return false;
  return std::all_of(text.begin(), text.end(), word);
}

void check_spec(const ApiSpec& spec, std::string_view path) {
  const std::string base(path);
  if (!is_identifier(spec.name)) {
    throw ConfigError(base + ".name: '" + spec.name + "' is not an identifier");
  }
  auto check_list = [&](const std::vector<std::string>& params, const char* field) {
    std::set<std::string_view> seen;
    for (std::size_t i = 0; i < params.size(); ++i) {
      const std::string where = base + "." + field + "[" + std::to_string(i) + "]";
      if (!is_identifier(params[i])) {
        throw ConfigError(where + ": '" + params[i] + "' is not an identifier");
      }
      if (!seen.insert(params[i]).second) {
        throw ConfigError(where + ": duplicate parameter '" + params[i] + "'");
      }
    }
  };
  check_list(spec.required_params, "required_params");
  check_list(spec.optional_params, "optional_params");
  for (std::size_t i = 0; i < spec.optional_params.size(); ++i) {
    const auto& p = spec.optional_params[i];
    if (std::find(spec.required_params.begin(), spec.required_params.end(), p) !=
        spec.required_params.end()) {
      throw ConfigError(base + ".optional_params[" + std::to_string(i) + "]: '" + p +
                        "' is also a required parameter");
    }
  }
}

void to_json(nlohmann::json& j, const ApiSpec& spec) {
  j = nlohmann::json{{"provider", std::string(to_string(spec.provider))},
                     {"service", spec.service},
                     {"name", spec.name},
                     {"required_params", spec.required_params},
                     {"optional_params", spec.optional_params},
                     {"description", spec.description},
                     {"full_doc", spec.full_doc}};
}

void from_json(const nlohmann::json& j, ApiSpec& spec) {
  if (!j.is_object()) throw ConfigError("spec must be a JSON object");
  try {
    spec.provider = parse_provider(j.at("provider").get<std::string>());
    spec.service = j.value("service", std::string{});
    spec.name = j.at("name").get<std::string>();
    spec.required_params = j.value("required_params", std::vector<std::string>{});
    spec.optional_params = j.value("optional_params", std::vector<std::string>{});
    spec.description = j.value("description", std::string{});
    spec.full_doc = j.value("full_doc", std::string{});
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed spec: ") + e.what());
  }
}

ApiIndex ApiIndex::build(std::vector<ApiSpec> specs) {
  if (specs.empty()) throw ConfigError("cannot build an index from zero specs");
  ApiIndex index;
  std::set<std::tuple<Provider, std::string, std::string>> triples;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const ApiSpec& s = specs[i];
    check_spec(s, "specs[" + std::to_string(i) + "]");
    if (!triples.emplace(s.provider, s.service, s.name).second) {
      throw ConfigError("duplicate API (" + std::string(to_string(s.provider)) + ", " + s.service +
                        ", " + s.name + ")");
    }
    index.by_name_[s.name].push_back(i);
    ++index.provider_counts_[static_cast<std::size_t>(s.provider)];
  }
  index.specs_ = std::move(specs);
  return index;
}

bool ApiIndex::contains(std::string_view name) const {
  if (name.empty()) return false;
  return by_name_.find(std::string(name)) != by_name_.end();
}

std::span<const std::size_t> ApiIndex::lookup_ids(std::string_view name) const {
  auto it = by_name_.find(std::string(name));
  if (it == by_name_.end()) return {};
  return it->second;
}

std::vector<const ApiSpec*> ApiIndex::lookup(std::string_view name) const {
  std::vector<const ApiSpec*> out;
  for (std::size_t id : lookup_ids(name)) out.push_back(&specs_[id]);
  return out;
}

nlohmann::json ApiIndex::to_json() const {
  return nlohmann::json{{"version", kFormatVersion}, {"specs", specs_}};
}

ApiIndex ApiIndex::from_json(const nlohmann::json& j) {
  const nlohmann::json* array = &j;
  if (j.is_object()) {
    if (j.value("version", 0) != kFormatVersion) {
      throw ConfigError("unsupported index version (expected 1)");
    }
    if (!j.contains("specs")) throw ConfigError("index file has no 'specs' array");
    array = &j.at("specs");
  }
  if (!array->is_array()) throw ConfigError("specs must be a JSON array");
  std::vector<ApiSpec> specs;
  specs.reserve(array->size());
  for (std::size_t i = 0; i < array->size(); ++i) {
    try {
      specs.push_back((*array)[i].get<ApiSpec>());
    } catch (const ConfigError& e) {
      throw ConfigError("specs[" + std::to_string(i) + "]: " + e.what());
    }
  }
  return build(std::move(specs));
}

std::string terminal_name(std::string_view callee_path) {
  if (callee_path.empty()) throw ContractError("terminal_name: empty callee path");
  std::size_t start = 0;
  std::string_view last;
  while (true) {
    const std::size_t dot = callee_path.find('.', start);
    const std::string_view segment = callee_path.substr(start, dot == std::string_view::npos ? dot : dot - start);
    if (segment.empty()) {
      throw ContractError("terminal_name: empty segment in '" + std::string(callee_path) + "'");
    }
    last = segment;
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  return std::string(last);
}

std::vector<std::string> retrieval_key(const ApiSpec& spec) {
  std::vector<std::string> key = tokenize(spec.name);
  for (auto& token : tokenize(spec.service)) key.push_back(std::move(token));
  return key;
}

std::vector<ApiSpec> load_spec_file(const std::filesystem::path& path) {
  const nlohmann::json j = read_json_file(path);
  if (!j.is_array()) throw ConfigError(path.string() + ": spec file must be a JSON array");
  std::vector<ApiSpec> specs;
  for (std::size_t i = 0; i < j.size(); ++i) {
    try {
      specs.push_back(j[i].get<ApiSpec>());
    } catch (const ConfigError& e) {
      throw ConfigError(path.string() + ": specs[" + std::to_string(i) + "]: " + e.what());
    }
  }
  return specs;
}

ApiIndex load_index_file(const std::filesystem::path& path) {
  try {
    return ApiIndex::from_json(read_json_file(path));
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void save_index_file(const ApiIndex& index, const std::filesystem::path& path) {
  write_text_file(path, index.to_json().dump(2) + "\n");
}

}  // namespace dagkit

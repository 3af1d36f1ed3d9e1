#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"

namespace dagkit {

enum class Provider { AWS, Azure };

std::string_view to_string(Provider provider);
// Accepts "aws"/"AWS"/"azure"/"Azure" and any other casing.
Provider parse_provider(std::string_view text);

// One API's identity plus the material its stub and documentation blocks are
// rendered from.
struct ApiSpec {
  Provider provider = Provider::AWS;
  std::string service;
  std::string name;
  std::vector<std::string> required_params;
  std::vector<std::string> optional_params;
  std::string description;
  std::string full_doc;

  friend bool operator==(const ApiSpec&, const ApiSpec&) = default;
};

bool is_identifier(std::string_view text);

// Throws ConfigError naming the offending field, prefixed with `path`
// (e.g. "specs[3].optional_params[1]").
void check_spec(const ApiSpec& spec, std::string_view path = "spec");

void to_json(nlohmann::json& j, const ApiSpec& spec);
void from_json(const nlohmann::json& j, ApiSpec& spec);

// Immutable after construction; lookups are safe from any number of threads.
class ApiIndex {
 public:
  static constexpr int kFormatVersion = 1;

  // Rejects empty input, invalid specs and duplicate (provider, service, name).
  static ApiIndex build(std::vector<ApiSpec> specs);

  bool contains(std::string_view name) const;
  // All specs carrying exactly `name`, in insertion order.
  std::vector<const ApiSpec*> lookup(std::string_view name) const;
  std::span<const std::size_t> lookup_ids(std::string_view name) const;

  const std::vector<ApiSpec>& specs() const { return specs_; }
  const ApiSpec& spec(std::size_t id) const { return specs_.at(id); }
  std::size_t doc_count() const { return specs_.size(); }
  std::size_t provider_count(Provider provider) const {
    return provider_counts_[static_cast<std::size_t>(provider)];
  }

  nlohmann::json to_json() const;
  static ApiIndex from_json(const nlohmann::json& j);

 private:
  std::vector<ApiSpec> specs_;
  std::unordered_map<std::string, std::vector<std::size_t>> by_name_;
  std::array<std::size_t, 2> provider_counts_{};
};

// "client.delete_message" -> "delete_message". Throws ContractError on empty
// input or an empty segment.
std::string terminal_name(std::string_view callee_path);

// Key bag used to index a spec for BM25: tokens of the name followed by tokens
// of the service, lowercased.
std::vector<std::string> retrieval_key(const ApiSpec& spec);

// Spec file: JSON array of spec objects.
std::vector<ApiSpec> load_spec_file(const std::filesystem::path& path);
// Index file: {"version": 1, "specs": [...]}. A bare spec array is accepted too.
ApiIndex load_index_file(const std::filesystem::path& path);
void save_index_file(const ApiIndex& index, const std::filesystem::path& path);

}  // namespace dagkit

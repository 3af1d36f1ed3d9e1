#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace dagkit {

// All of these throw IoError on file system failure and ConfigError on
// unparseable content.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);
nlohmann::json read_json_file(const std::filesystem::path& path);

// Splits into lines without trailing '\r'; a final newline does not produce an
// empty trailing line.
std::vector<std::string> split_lines(std::string_view text);

}  // namespace dagkit

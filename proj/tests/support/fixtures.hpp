#pragma once

#include <unistd.h>

#include <filesystem>
#include <string>
#include <vector>

#include "dagkit/api_index.hpp"
#include "dagkit/io.hpp"

namespace fixtures {

inline std::filesystem::path data_dir() { return DAGKIT_TEST_DATA_DIR; }
inline std::filesystem::path path(const std::string& rel) { return data_dir() / rel; }

inline dagkit::ApiIndex e2e_index() { return dagkit::load_index_file(path("fixtures/e2e/specs.json")); }

inline dagkit::ApiSpec spec(dagkit::Provider provider, std::string service, std::string name,
                            std::vector<std::string> required = {}, std::vector<std::string> optional = {}) {
  dagkit::ApiSpec s;
  s.provider = provider;
  s.service = std::move(service);
  s.name = std::move(name);
  s.required_params = std::move(required);
  s.optional_params = std::move(optional);
  return s;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    dir_ = std::filesystem::temp_directory_path() /
           ("dagkit-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(dir_);
    std::filesystem::create_directories(dir_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(dir_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return dir_; }
  std::filesystem::path write(const std::string& rel, const std::string& text) const {
    auto p = dir_ / rel;
    std::filesystem::create_directories(p.parent_path());
    dagkit::write_text_file(p, text);
    return p;
  }

 private:
  std::filesystem::path dir_;
};

}  // namespace fixtures

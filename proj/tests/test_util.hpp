#pragma once

#include <filesystem>
#include <string>

namespace lowlight::testutil {

// Scratch directory under the system temp path, removed on destruction.
struct TempDir {
  std::filesystem::path path;

  explicit TempDir(const std::string& tag) {
    path = std::filesystem::temp_directory_path() /
           ("lowlight-test-" + tag + "-" + std::to_string(uintptr_t(this)));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
};

}  // namespace lowlight::testutil

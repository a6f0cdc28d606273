#pragma once

#include <atomic>
#include <filesystem>
#include <string>

#include <unistd.h>

#include <doctest.h>

#include "agingscope/error.hpp"

#define CHECK_CODE(expr, expected)                                 \
  do {                                                             \
    bool thrown_ = false;                                          \
    try {                                                          \
      (void)(expr);                                                \
    } catch (const agingscope::Error& e_) {                        \
      thrown_ = true;                                              \
      CHECK_MESSAGE(e_.code() == (expected), e_.what());           \
    }                                                              \
    CHECK_MESSAGE(thrown_, "expected agingscope::Error: " #expr);   \
  } while (0)

namespace testing {

inline std::string data_path(const std::string& name) { return std::string(AGINGSCOPE_TEST_DATA) + "/" + name; }

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("agingscope_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::string str() const { return path_.string(); }
  std::string operator/(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace testing

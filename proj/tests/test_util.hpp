#ifndef GSRECON_TESTS_TEST_UTIL_HPP
#define GSRECON_TESTS_TEST_UTIL_HPP

#include "gsrecon/core.hpp"

#include <algorithm>
#include <filesystem>
#include <optional>
#include <set>
#include <string>

namespace test_util {

/// Kind of the gsrecon::Error thrown by f, or nullopt if it returns normally.
template <typename F>
std::optional<gsrecon::ErrorKind> error_kind(F&& f) {
  try {
    f();
  } catch (const gsrecon::Error& e) {
    return e.kind();
  }
  return std::nullopt;
}

/// Fresh, empty directory under the system temp path.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("gsrecon_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace test_util

#endif  // GSRECON_TESTS_TEST_UTIL_HPP

/*
 * Copyright 2026 The dynbucket Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Small helpers shared by the unit suites.

#ifndef DYNBUCKET_TESTS_HELPERS_HPP
#define DYNBUCKET_TESTS_HELPERS_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <unistd.h>

#include "dynbucket/datamodel.hpp"

namespace dynbucket::testing {

inline Sample mk(double seconds, std::int64_t tokens, std::string id = "") {
  static std::size_t counter = 0;
  if (id.empty()) id = "t" + std::to_string(counter++);
  return Sample{std::move(id), seconds, tokens};
}

// Fresh path under the system temp directory; removed on destruction.
class TempFile {
 public:
  explicit TempFile(const std::string& stem) {
    static int n = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("dynbucket_test_" + std::to_string(::getpid()) + "_" + stem +
             std::to_string(n++));
  }
  ~TempFile() {
    std::error_code ec;
    std::filesystem::remove(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace dynbucket::testing

#endif  // DYNBUCKET_TESTS_HELPERS_HPP

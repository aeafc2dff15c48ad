// shaasr/error.hpp

// Copyright 2026  The shaasr authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SHAASR_ERROR_HPP_
#define SHAASR_ERROR_HPP_

#include <cstdio>
#include <stdexcept>
#include <string>

namespace shaasr {

/// Coarse error category; the numeric value doubles as the CLI exit code.
enum class ErrKind : int {
  kConfig = 2,   // bad configuration, bad arguments, malformed files
  kData = 3,     // bad or inconsistent data (shapes, labels, corpora)
  kService = 4,  // remote service failure
};

class Error : public std::runtime_error {
 public:
  Error(ErrKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrKind kind() const { return kind_; }
  int exit_code() const { return static_cast<int>(kind_); }

 private:
  ErrKind kind_;
};

namespace detail {
inline std::string format_msg(const char* fmt) { return std::string(fmt); }

template <typename... Args>
std::string format_msg(const char* fmt, Args... args) {
  char buf[1024];
  std::snprintf(buf, sizeof(buf), fmt, args...);
  return std::string(buf);
}
}  // namespace detail

#define SHAASR_THROW(kind, ...) \
  throw ::shaasr::Error((kind), ::shaasr::detail::format_msg(__VA_ARGS__))

/// require-style checks used across the library
#define SHAASR_CHECK(cond, kind, ...)       \
  do {                                      \
    if (!(cond)) SHAASR_THROW(kind, __VA_ARGS__); \
  } while (0)

}  // namespace shaasr

#endif  // SHAASR_ERROR_HPP_

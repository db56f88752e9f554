/*
 * Copyright 2026 The lesiondet Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef LESIONDET_ERROR_HPP_
#define LESIONDET_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace lesiondet {

// Error classes. Values are shared with the C API status codes.
enum class ErrorCode : int {
  kInvalidArgument = 1,
  kIo = 2,
  kMalformed = 3,
  kUnsupported = 4,
  kPayloadMismatch = 5,
  kValidation = 6,
  kGeometryMismatch = 7,
  kEmpty = 8,
  kUndefinedMetric = 9,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void Fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace lesiondet

#endif  // LESIONDET_ERROR_HPP_

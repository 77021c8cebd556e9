// Copyright 2026 The lowres-tts authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

#include "lowres_tts/lowres_tts.h"

namespace lrt {

// Core-side error; the C layer converts it to a status + message.
class Error : public std::runtime_error {
 public:
  Error(lrt_status code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  lrt_status code() const { return code_; }

 private:
  lrt_status code_;
};

[[noreturn]] inline void fail(lrt_status code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool ok, lrt_status code, const std::string& message) {
  if (!ok) fail(code, message);
}

}  // namespace lrt

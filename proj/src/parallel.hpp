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

#include <cstddef>
#include <functional>

namespace lrt {

// Worker count: `requested` when positive, otherwise hardware concurrency,
// always capped by the LOWRES_TTS_THREADS environment variable.
std::size_t effective_threads(int requested);

// Runs fn(i) for i in [0, n). Work is chunked over the workers; outputs must
// be written to per-index slots so results stay deterministic. The first
// exception thrown by any worker is rethrown on the caller.
void parallel_for(std::size_t n, int requested_threads,
                  const std::function<void(std::size_t)>& fn);

}  // namespace lrt

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

#include <complex>
#include <vector>

namespace lrt {

// In-place complex DFT. Radix-2 when the size is a power of two (the default
// analysis sizes), otherwise a direct O(n^2) transform.
void fft_forward(std::vector<std::complex<double>>& x);
void fft_inverse(std::vector<std::complex<double>>& x);

}  // namespace lrt

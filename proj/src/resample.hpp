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

#include "audio.hpp"

namespace lrt {

// Polyphase windowed-sinc resampler (Kaiser window, beta = 8.6, 48 taps per
// phase, cutoff 0.45 x the lower of the two rates). Output length is
// round(n * target / source); samples are clamped to [-1, 1].
AudioClip resample(const AudioClip& clip, int target_rate_hz);

}  // namespace lrt

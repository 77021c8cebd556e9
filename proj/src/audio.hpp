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

#include <string>
#include <vector>

namespace lrt {

// Mono waveform, amplitudes in [-1, 1].
struct AudioClip {
  std::vector<double> samples;
  int sample_rate_hz = 0;

  double duration_sec() const {
    return sample_rate_hz > 0
               ? static_cast<double>(samples.size()) / sample_rate_hz
               : 0.0;
  }
};

// Throws InvalidAudio when the clip violates its invariants
// (non-empty, positive rate, |sample| <= 1).
void validate_audio(const AudioClip& clip);

// RIFF/WAVE, 16-bit signed PCM little-endian, mono.
// Samples map to [-1, 1] by division by 32768.
AudioClip load_wav(const std::string& path);
void save_wav(const AudioClip& clip, const std::string& path);

}  // namespace lrt

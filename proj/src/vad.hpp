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
#include <string>
#include <vector>

#include "audio.hpp"

namespace lrt {

struct VadConfig {
  double frame_ms = 25.0;
  double hop_ms = 10.0;
  double threshold_db = -40.0;  // relative to the loudest frame
  double max_internal_silence_sec = 0.5;
  double min_silence_run_sec = 0.2;
};

void validate_vad_config(const VadConfig& cfg);

// Sample interval [begin, end).
struct SampleSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t length() const { return end - begin; }
};

// Silent runs by short-time energy relative to the clip's loudest frame.
// Runs shorter than min_silence_run_sec are not reported.
std::vector<SampleSpan> detect_silences(const AudioClip& clip,
                                        const VadConfig& cfg);

// Removes leading/trailing silence entirely and caps every interior silent
// run at max_internal_silence_sec. Voiced samples are copied untouched.
AudioClip trim_silences(const AudioClip& clip, const VadConfig& cfg);

// One audio chunk paired with its transcript piece.
struct Segment {
  AudioClip audio;
  std::string text;
};

// Cuts an already-trimmed clip at interior silences and pairs the pieces
// with danda-delimited transcript pieces, 1:1 and in order. Every chunk must
// fit max_chunk_sec.
std::vector<Segment> segment(const AudioClip& clip, const std::string& raw_text,
                             double max_chunk_sec, const VadConfig& cfg);

// Transcript pieces split at danda / double-danda boundaries, whitespace
// trimmed, empties dropped.
std::vector<std::string> split_text_at_dandas(const std::string& raw_text);

}  // namespace lrt

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

#include <cstdint>
#include <string>
#include <vector>

#include "vad.hpp"

namespace lrt {

struct ManifestEntry {
  std::string audio_path;  // relative to the manifest's directory
  std::string text;        // normalized transcript
  double duration_sec = 0.0;
};

struct CorpusStats {
  uint64_t num_utterances = 0;
  double total_duration_sec = 0.0;
  uint64_t word_vocab_size = 0;  // distinct whitespace-separated tokens
  double min_utterance_sec = 0.0;
  double max_utterance_sec = 0.0;
  double avg_utterance_sec = 0.0;
};

CorpusStats corpus_stats(const std::vector<ManifestEntry>& entries);

// Manifest file: one "<relative-audio-path>\t<text>" line per entry, UTF-8,
// LF endings, no header. Durations come from the referenced WAVs.
void save_manifest(const std::vector<ManifestEntry>& entries, const std::string& path);
std::vector<ManifestEntry> load_manifest(const std::string& path);

struct PrepOptions {
  int target_rate_hz = 22050;
  double max_internal_silence_sec = 0.5;
  double max_chunk_sec = 10.0;
  int threads = 0;  // 0 = auto
  VadConfig vad;
};

struct PrepResult {
  std::vector<ManifestEntry> entries;
  CorpusStats stats;
};

// Full preparation pass over every <stem>.wav + <stem>.txt pair in in_dir:
// resample, trim silences, segment against danda boundaries, normalize text,
// then write out_dir/wavs/*, out_dir/manifest.tsv and out_dir/symbols.txt.
PrepResult prep_run(const std::string& in_dir, const std::string& out_dir,
                    const PrepOptions& options);

std::string format_stats_text(const CorpusStats& s);
std::string format_stats_keyvalue(const CorpusStats& s);

}  // namespace lrt

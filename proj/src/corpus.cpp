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

#include "corpus.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <set>
#include <sstream>

#include "audio.hpp"
#include "error.hpp"
#include "io_util.hpp"
#include "parallel.hpp"
#include "resample.hpp"
#include "text.hpp"

namespace fs = std::filesystem;

namespace lrt {

CorpusStats corpus_stats(const std::vector<ManifestEntry>& entries) {
  require(!entries.empty(), LRT_E_EMPTY_MANIFEST, "manifest has no entries");

  CorpusStats s;
  s.num_utterances = entries.size();
  s.min_utterance_sec = entries.front().duration_sec;
  s.max_utterance_sec = entries.front().duration_sec;

  std::set<std::string> words;
  for (const auto& e : entries) {
    s.total_duration_sec += e.duration_sec;
    s.min_utterance_sec = std::min(s.min_utterance_sec, e.duration_sec);
    s.max_utterance_sec = std::max(s.max_utterance_sec, e.duration_sec);
    std::istringstream in(e.text);
    std::string word;
    while (in >> word) words.insert(word);
  }
  s.word_vocab_size = words.size();
  s.avg_utterance_sec = s.total_duration_sec / static_cast<double>(entries.size());
  return s;
}

void save_manifest(const std::vector<ManifestEntry>& entries, const std::string& path) {
  std::string out;
  for (const auto& e : entries) {
    out += e.audio_path;
    out += '\t';
    out += e.text;
    out += '\n';
  }
  write_file(path, out);
}

std::vector<ManifestEntry> load_manifest(const std::string& path) {
  const std::string text = read_text_file(path);
  const fs::path base = fs::path(path).parent_path();

  std::vector<ManifestEntry> entries;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    require(tab != std::string::npos, LRT_E_IO,
            path + ":" + std::to_string(line_no) + ": expected <path>\\t<text>");
    ManifestEntry e;
    e.audio_path = line.substr(0, tab);
    e.text = line.substr(tab + 1);
    require(!e.text.empty(), LRT_E_IO,
            path + ":" + std::to_string(line_no) + ": empty transcript");
    const AudioClip clip = load_wav((base / e.audio_path).string());
    e.duration_sec = clip.duration_sec();
    entries.push_back(std::move(e));
  }
  require(!entries.empty(), LRT_E_EMPTY_MANIFEST, path + " has no entries");
  return entries;
}

PrepResult prep_run(const std::string& in_dir, const std::string& out_dir,
                    const PrepOptions& options) {
  require(options.target_rate_hz > 0, LRT_E_CONFIG, "target rate must be positive");
  require(options.max_chunk_sec > 0, LRT_E_CONFIG, "max_chunk_sec must be positive");

  std::vector<fs::path> wavs;
  {
    std::error_code ec;
    fs::directory_iterator it(in_dir, ec);
    require(!ec, LRT_E_IO, "cannot open input directory " + in_dir);
    for (const auto& entry : fs::directory_iterator(in_dir)) {
      if (entry.is_regular_file() && entry.path().extension() == ".wav") {
        wavs.push_back(entry.path());
      }
    }
  }
  std::sort(wavs.begin(), wavs.end());
  require(!wavs.empty(), LRT_E_EMPTY_MANIFEST, "no .wav files under " + in_dir);

  VadConfig vad = options.vad;
  vad.max_internal_silence_sec = options.max_internal_silence_sec;

  make_dirs((fs::path(out_dir) / "wavs").string());

  struct FileOutput {
    std::vector<ManifestEntry> entries;
    std::vector<AudioClip> clips;
  };
  std::vector<FileOutput> outputs(wavs.size());

  parallel_for(wavs.size(), options.threads, [&](std::size_t i) {
    const fs::path& wav_path = wavs[i];
    fs::path txt_path = wav_path;
    txt_path.replace_extension(".txt");
    require(fs::exists(txt_path), LRT_E_IO,
            wav_path.string() + " has no matching transcript " + txt_path.string());

    const std::string raw_text = read_text_file(txt_path.string());
    AudioClip clip = load_wav(wav_path.string());
    clip = resample(clip, options.target_rate_hz);
    try {
      clip = trim_silences(clip, vad);
    } catch (const Error& e) {
      fail(e.code(), wav_path.string() + ": " + e.what());
    }

    std::vector<Segment> segments;
    try {
      segments = segment(clip, raw_text, options.max_chunk_sec, vad);
    } catch (const Error& e) {
      fail(e.code(), wav_path.string() + ": " + e.what());
    }

    const std::string stem = wav_path.stem().string();
    for (std::size_t k = 0; k < segments.size(); ++k) {
      const std::string normalized = normalize_text_string(segments[k].text);
      require(!normalized.empty(), LRT_E_EMPTY_TEXT,
              wav_path.string() + ": chunk " + std::to_string(k) +
                  " has an empty transcript after normalization");
      char name[64];
      std::snprintf(name, sizeof name, "%s_%03zu.wav", stem.c_str(), k);
      ManifestEntry e;
      e.audio_path = std::string("wavs/") + name;
      e.text = normalized;
      e.duration_sec = segments[k].audio.duration_sec();
      outputs[i].entries.push_back(std::move(e));
      outputs[i].clips.push_back(std::move(segments[k].audio));
    }
  });

  PrepResult result;
  std::vector<std::string> texts;
  for (auto& out : outputs) {
    for (std::size_t k = 0; k < out.entries.size(); ++k) {
      save_wav(out.clips[k], (fs::path(out_dir) / out.entries[k].audio_path).string());
      texts.push_back(out.entries[k].text);
      result.entries.push_back(std::move(out.entries[k]));
    }
  }

  const SymbolTable table = SymbolTable::build_from_texts(texts);
  table.save((fs::path(out_dir) / "symbols.txt").string());
  save_manifest(result.entries, (fs::path(out_dir) / "manifest.tsv").string());
  result.stats = corpus_stats(result.entries);
  return result;
}

std::string format_stats_text(const CorpusStats& s) {
  const auto fmt_duration = [](double sec) {
    const int h = static_cast<int>(sec) / 3600;
    const int m = (static_cast<int>(sec) % 3600) / 60;
    const double r = sec - h * 3600 - m * 60;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%dh %dmin %.0fsec", h, m, r);
    return std::string(buf);
  };
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "Number of utterances          %llu\n"
                "Total duration                %s (%.2f s)\n"
                "Vocabulary size               %llu\n"
                "Minimum length of utterance   %.2f sec\n"
                "Maximum length of utterance   %.2f sec\n"
                "Average length of utterance   %.2f sec\n",
                static_cast<unsigned long long>(s.num_utterances),
                fmt_duration(s.total_duration_sec).c_str(), s.total_duration_sec,
                static_cast<unsigned long long>(s.word_vocab_size), s.min_utterance_sec,
                s.max_utterance_sec, s.avg_utterance_sec);
  return buf;
}

std::string format_stats_keyvalue(const CorpusStats& s) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "num_utterances=%llu\n"
                "total_duration_sec=%.6f\n"
                "word_vocab_size=%llu\n"
                "min_utterance_sec=%.6f\n"
                "max_utterance_sec=%.6f\n"
                "avg_utterance_sec=%.6f\n",
                static_cast<unsigned long long>(s.num_utterances), s.total_duration_sec,
                static_cast<unsigned long long>(s.word_vocab_size), s.min_utterance_sec,
                s.max_utterance_sec, s.avg_utterance_sec);
  return buf;
}

}  // namespace lrt

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

#include "vad.hpp"

#include <algorithm>
#include <cmath>

#include "error.hpp"

namespace lrt {
namespace {

// Below this peak the clip is treated as digital silence.
constexpr double kSilenceFloor = 1e-5;

struct FrameGrid {
  std::size_t frame_len;
  std::size_t hop_len;
  std::vector<bool> silent;  // per frame
};

FrameGrid frame_silence(const AudioClip& clip, const VadConfig& cfg) {
  FrameGrid grid;
  grid.frame_len = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::lround(cfg.frame_ms * clip.sample_rate_hz / 1000.0)));
  grid.hop_len = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::lround(cfg.hop_ms * clip.sample_rate_hz / 1000.0)));

  const std::size_t n = clip.samples.size();
  const std::size_t n_frames = n < grid.frame_len ? 1 : 1 + (n - grid.frame_len) / grid.hop_len;

  std::vector<double> energy(n_frames, 0.0);
  double peak = 0.0;
  for (std::size_t f = 0; f < n_frames; ++f) {
    const std::size_t begin = f * grid.hop_len;
    const std::size_t end = std::min(n, begin + grid.frame_len);
    double sum_sq = 0.0;
    for (std::size_t i = begin; i < end; ++i) sum_sq += clip.samples[i] * clip.samples[i];
    energy[f] = sum_sq / static_cast<double>(end - begin);
    peak = std::max(peak, energy[f]);
  }

  grid.silent.assign(n_frames, false);
  if (peak < kSilenceFloor * kSilenceFloor) {
    grid.silent.assign(n_frames, true);
    return grid;
  }
  const double threshold = peak * std::pow(10.0, cfg.threshold_db / 10.0);
  for (std::size_t f = 0; f < n_frames; ++f) grid.silent[f] = energy[f] < threshold;
  return grid;
}

}  // namespace

void validate_vad_config(const VadConfig& cfg) {
  require(cfg.hop_ms > 0 && cfg.frame_ms >= cfg.hop_ms, LRT_E_CONFIG,
          "VAD requires frame_ms >= hop_ms > 0");
  require(cfg.max_internal_silence_sec > 0, LRT_E_CONFIG,
          "max_internal_silence_sec must be positive");
  require(cfg.min_silence_run_sec >= 0, LRT_E_CONFIG,
          "min_silence_run_sec must be non-negative");
}

std::vector<SampleSpan> detect_silences(const AudioClip& clip, const VadConfig& cfg) {
  validate_audio(clip);
  validate_vad_config(cfg);

  const FrameGrid grid = frame_silence(clip, cfg);
  const std::size_t n = clip.samples.size();
  const std::size_t n_frames = grid.silent.size();

  std::vector<SampleSpan> runs;
  std::size_t f = 0;
  while (f < n_frames) {
    if (!grid.silent[f]) {
      ++f;
      continue;
    }
    std::size_t last = f;
    while (last + 1 < n_frames && grid.silent[last + 1]) ++last;
    SampleSpan span;
    span.begin = f * grid.hop_len;
    // A silent run extends to the start of the next voiced frame, or to the
    // end of the clip when it is trailing.
    span.end = last + 1 < n_frames ? (last + 1) * grid.hop_len : n;
    runs.push_back(span);
    f = last + 1;
  }

  // Frame-level boundaries overshoot by up to a frame at onsets; refine each
  // edge with a bounded sample-level scan. A short lookahead window keeps the
  // scan from nibbling zero crossings inside the voiced region.
  double peak_amp = 0.0;
  for (double s : clip.samples) peak_amp = std::max(peak_amp, std::abs(s));
  const double amp_threshold = peak_amp * std::pow(10.0, cfg.threshold_db / 20.0);
  const std::size_t scan_limit = grid.frame_len;
  const std::size_t lookahead =
      std::max<std::size_t>(1, static_cast<std::size_t>(clip.sample_rate_hz / 1000));
  const auto window_quiet = [&](std::size_t begin, std::size_t count) {
    for (std::size_t i = begin; i < std::min(n, begin + count); ++i) {
      if (std::abs(clip.samples[i]) >= amp_threshold) return false;
    }
    return true;
  };
  for (auto& r : runs) {
    std::size_t extended = 0;
    while (r.end < n && extended < scan_limit && window_quiet(r.end, lookahead)) {
      ++r.end;
      ++extended;
    }
    extended = 0;
    while (r.begin > 0 && extended < scan_limit &&
           window_quiet(r.begin >= lookahead ? r.begin - lookahead : 0,
                        std::min(lookahead, r.begin))) {
      --r.begin;
      ++extended;
    }
  }

  // Runs shorter than min_silence_run_sec stay voiced (stop consonants,
  // breaths) rather than becoming cut points.
  const double min_run_samples = cfg.min_silence_run_sec * clip.sample_rate_hz;
  std::vector<SampleSpan> kept;
  for (const auto& r : runs) {
    if (static_cast<double>(r.length()) >= min_run_samples) kept.push_back(r);
  }
  return kept;
}

AudioClip trim_silences(const AudioClip& clip, const VadConfig& cfg) {
  validate_audio(clip);
  validate_vad_config(cfg);
  {
    const std::size_t frame_len = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::lround(cfg.frame_ms * clip.sample_rate_hz / 1000.0)));
    require(clip.samples.size() > frame_len, LRT_E_INVALID_AUDIO,
            "clip shorter than one VAD frame");
  }

  const auto runs = detect_silences(clip, cfg);
  const std::size_t n = clip.samples.size();

  // Entirely silent?
  if (runs.size() == 1 && runs[0].begin == 0 && runs[0].end == n) {
    fail(LRT_E_EMPTY_AFTER_TRIM, "clip is entirely silent under the threshold");
  }

  const std::size_t cap =
      static_cast<std::size_t>(std::lround(cfg.max_internal_silence_sec * clip.sample_rate_hz));

  AudioClip out;
  out.sample_rate_hz = clip.sample_rate_hz;
  out.samples.reserve(n);

  std::size_t cursor = 0;
  for (const auto& r : runs) {
    // Voiced span before this run.
    for (std::size_t i = cursor; i < r.begin; ++i) out.samples.push_back(clip.samples[i]);
    const bool leading = r.begin == 0;
    const bool trailing = r.end == n;
    if (!leading && !trailing && r.length() > cap) {
      // Keep the first and last half of the allowance so attack/decay
      // transitions survive.
      const std::size_t head = cap / 2;
      const std::size_t tail = cap - head;
      for (std::size_t i = r.begin; i < r.begin + head; ++i) out.samples.push_back(clip.samples[i]);
      for (std::size_t i = r.end - tail; i < r.end; ++i) out.samples.push_back(clip.samples[i]);
    } else if (!leading && !trailing) {
      for (std::size_t i = r.begin; i < r.end; ++i) out.samples.push_back(clip.samples[i]);
    }
    cursor = r.end;
  }
  for (std::size_t i = cursor; i < n; ++i) out.samples.push_back(clip.samples[i]);

  require(!out.samples.empty(), LRT_E_EMPTY_AFTER_TRIM, "nothing voiced remains");
  return out;
}

std::vector<std::string> split_text_at_dandas(const std::string& raw_text) {
  // danda U+0964 = E0 A5 A4, double danda U+0965 = E0 A5 A5 in UTF-8.
  std::vector<std::string> pieces;
  std::string current;
  std::size_t i = 0;
  while (i < raw_text.size()) {
    if (i + 2 < raw_text.size() && static_cast<unsigned char>(raw_text[i]) == 0xE0 &&
        static_cast<unsigned char>(raw_text[i + 1]) == 0xA5 &&
        (static_cast<unsigned char>(raw_text[i + 2]) == 0xA4 ||
         static_cast<unsigned char>(raw_text[i + 2]) == 0xA5)) {
      pieces.push_back(current);
      current.clear();
      i += 3;
    } else {
      current.push_back(raw_text[i]);
      ++i;
    }
  }
  pieces.push_back(current);

  std::vector<std::string> kept;
  for (auto& p : pieces) {
    const auto first = p.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) continue;
    const auto last = p.find_last_not_of(" \t\r\n");
    kept.push_back(p.substr(first, last - first + 1));
  }
  return kept;
}

std::vector<Segment> segment(const AudioClip& clip, const std::string& raw_text,
                             double max_chunk_sec, const VadConfig& cfg) {
  validate_audio(clip);
  require(max_chunk_sec > 0, LRT_E_CONFIG, "max_chunk_sec must be positive");

  const std::size_t n = clip.samples.size();
  const auto runs = detect_silences(clip, cfg);

  // Interior cut points at silent-run midpoints; the clip arrives trimmed, so
  // edge runs should not exist, but tolerate them by ignoring.
  std::vector<std::size_t> cuts;
  for (const auto& r : runs) {
    if (r.begin == 0 || r.end == n) continue;
    cuts.push_back(r.begin + r.length() / 2);
  }

  const auto text_pieces = split_text_at_dandas(raw_text);
  const std::size_t audio_count = cuts.size() + 1;
  if (audio_count != text_pieces.size()) {
    fail(LRT_E_ALIGNMENT_MISMATCH,
         "silence-separated audio pieces (" + std::to_string(audio_count) +
             ") != danda-separated text pieces (" + std::to_string(text_pieces.size()) + ")");
  }

  std::vector<Segment> out;
  std::size_t begin = 0;
  for (std::size_t k = 0; k < audio_count; ++k) {
    const std::size_t end = k < cuts.size() ? cuts[k] : n;
    Segment seg;
    seg.audio.sample_rate_hz = clip.sample_rate_hz;
    seg.audio.samples.assign(clip.samples.begin() + static_cast<std::ptrdiff_t>(begin),
                             clip.samples.begin() + static_cast<std::ptrdiff_t>(end));
    seg.text = text_pieces[k];
    const double dur = seg.audio.duration_sec();
    if (dur > max_chunk_sec) {
      fail(LRT_E_UNSPLITTABLE_SPAN,
           "voiced span of " + std::to_string(dur) + " s exceeds the " +
               std::to_string(max_chunk_sec) + " s chunk cap");
    }
    out.push_back(std::move(seg));
    begin = end;
  }
  return out;
}

}  // namespace lrt

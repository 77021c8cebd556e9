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

#include "audio.hpp"

#include <algorithm>
#include <cmath>

#include "error.hpp"
#include "io_util.hpp"

namespace lrt {

void validate_audio(const AudioClip& clip) {
  require(!clip.samples.empty(), LRT_E_INVALID_AUDIO, "zero-length clip");
  require(clip.sample_rate_hz > 0, LRT_E_INVALID_AUDIO,
          "sample rate must be positive");
  for (double s : clip.samples) {
    require(std::isfinite(s) && std::abs(s) <= 1.0, LRT_E_INVALID_AUDIO,
            "sample out of [-1, 1]");
  }
}

AudioClip load_wav(const std::string& path) {
  const auto bytes = read_file(path);
  require(bytes.size() >= 44, LRT_E_INVALID_AUDIO, path + ": truncated WAV");
  require(std::memcmp(bytes.data(), "RIFF", 4) == 0 &&
              std::memcmp(bytes.data() + 8, "WAVE", 4) == 0,
          LRT_E_INVALID_AUDIO, path + ": not a RIFF/WAVE file");

  int channels = 0;
  int rate = 0;
  int bits = 0;
  int format = 0;
  std::size_t data_off = 0;
  std::size_t data_len = 0;

  std::size_t off = 12;
  while (off + 8 <= bytes.size()) {
    const char* id = reinterpret_cast<const char*>(bytes.data() + off);
    const uint32_t size = get_u32(bytes.data() + off + 4);
    const std::size_t body = off + 8;
    if (std::memcmp(id, "fmt ", 4) == 0 && body + 16 <= bytes.size()) {
      format = get_u16(bytes.data() + body);
      channels = get_u16(bytes.data() + body + 2);
      rate = static_cast<int>(get_u32(bytes.data() + body + 4));
      bits = get_u16(bytes.data() + body + 14);
    } else if (std::memcmp(id, "data", 4) == 0) {
      data_off = body;
      data_len = std::min<std::size_t>(size, bytes.size() - body);
    }
    off = body + size + (size & 1);  // chunks are word-aligned
  }

  require(format == 1, LRT_E_INVALID_AUDIO, path + ": only PCM supported");
  require(channels == 1, LRT_E_INVALID_AUDIO, path + ": only mono supported");
  require(bits == 16, LRT_E_INVALID_AUDIO, path + ": only 16-bit supported");
  require(rate > 0, LRT_E_INVALID_AUDIO, path + ": bad sample rate");
  require(data_off != 0 && data_len >= 2, LRT_E_INVALID_AUDIO,
          path + ": missing data chunk");

  AudioClip clip;
  clip.sample_rate_hz = rate;
  const std::size_t n = data_len / 2;
  clip.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int16_t s = static_cast<int16_t>(get_u16(bytes.data() + data_off + 2 * i));
    clip.samples[i] = static_cast<double>(s) / 32768.0;
  }
  return clip;
}

void save_wav(const AudioClip& clip, const std::string& path) {
  validate_audio(clip);
  const uint32_t n = static_cast<uint32_t>(clip.samples.size());
  const uint32_t data_bytes = n * 2;

  std::string out;
  out.reserve(44 + data_bytes);
  out += "RIFF";
  put_u32(out, 36 + data_bytes);
  out += "WAVE";
  out += "fmt ";
  put_u32(out, 16);
  put_u16(out, 1);  // PCM
  put_u16(out, 1);  // mono
  put_u32(out, static_cast<uint32_t>(clip.sample_rate_hz));
  put_u32(out, static_cast<uint32_t>(clip.sample_rate_hz) * 2);
  put_u16(out, 2);   // block align
  put_u16(out, 16);  // bits
  out += "data";
  put_u32(out, data_bytes);
  for (double s : clip.samples) {
    double v = std::lround(s * 32768.0);
    v = std::clamp(v, -32768.0, 32767.0);
    put_u16(out, static_cast<uint16_t>(static_cast<int16_t>(v)));
  }
  write_file(path, out);
}

}  // namespace lrt

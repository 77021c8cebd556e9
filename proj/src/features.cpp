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

#include "features.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "error.hpp"
#include "fft.hpp"
#include "io_util.hpp"

namespace lrt {
namespace {

// Mirror into [0, n) without repeating the edge sample; constant for n == 1.
std::size_t reflect(long long i, std::size_t n) {
  if (n == 1) return 0;
  const long long period = 2 * static_cast<long long>(n) - 2;
  long long j = i % period;
  if (j < 0) j += period;
  if (j >= static_cast<long long>(n)) j = period - j;
  return static_cast<std::size_t>(j);
}

// Periodic Hann of win_length, zero-padded and centered in fft_size.
std::vector<double> make_window(const FeatureConfig& cfg) {
  std::vector<double> w(static_cast<std::size_t>(cfg.fft_size), 0.0);
  const int offset = (cfg.fft_size - cfg.win_length) / 2;
  for (int i = 0; i < cfg.win_length; ++i) {
    w[static_cast<std::size_t>(offset + i)] =
        0.5 * (1.0 - std::cos(2.0 * M_PI * i / static_cast<double>(cfg.win_length)));
  }
  return w;
}

std::vector<std::complex<double>> windowed_frame(const std::vector<double>& samples,
                                                 std::size_t frame_index,
                                                 const std::vector<double>& window,
                                                 const FeatureConfig& cfg) {
  const long long pad = cfg.fft_size / 2;
  const long long start = static_cast<long long>(frame_index) * cfg.hop - pad;
  std::vector<std::complex<double>> frame(static_cast<std::size_t>(cfg.fft_size));
  for (int i = 0; i < cfg.fft_size; ++i) {
    const double s = samples[reflect(start + i, samples.size())];
    frame[static_cast<std::size_t>(i)] = s * window[static_cast<std::size_t>(i)];
  }
  return frame;
}

}  // namespace

void validate_feature_config(const FeatureConfig& cfg) {
  require(cfg.hop > 0 && cfg.hop <= cfg.win_length && cfg.win_length <= cfg.fft_size,
          LRT_E_CONFIG, "need hop <= win_length <= fft_size, all positive");
  require(cfg.sample_rate_hz > 0, LRT_E_CONFIG, "sample rate must be positive");
  require(cfg.fmin_hz >= 0 && cfg.fmin_hz < cfg.fmax_hz &&
              cfg.fmax_hz <= cfg.sample_rate_hz / 2.0,
          LRT_E_CONFIG, "need 0 <= fmin < fmax <= sample_rate/2");
  require(cfg.n_mels >= 1, LRT_E_CONFIG, "n_mels must be >= 1");
  require(cfg.log_floor > 0, LRT_E_CONFIG, "log_floor must be positive");
}

std::size_t stft_frame_count(std::size_t n_samples, const FeatureConfig& cfg) {
  // Padded length is n + fft_size, frames start every hop samples.
  return 1 + n_samples / static_cast<std::size_t>(cfg.hop);
}

Tensor stft_magnitude(const AudioClip& clip, const FeatureConfig& cfg) {
  validate_audio(clip);
  validate_feature_config(cfg);
  require(clip.sample_rate_hz == cfg.sample_rate_hz, LRT_E_RATE_MISMATCH,
          "clip rate " + std::to_string(clip.sample_rate_hz) + " != configured " +
              std::to_string(cfg.sample_rate_hz));

  const std::size_t n_frames = stft_frame_count(clip.samples.size(), cfg);
  const std::size_t n_bins = static_cast<std::size_t>(cfg.fft_size) / 2 + 1;
  const auto window = make_window(cfg);

  Tensor mag({n_frames, n_bins});
  for (std::size_t f = 0; f < n_frames; ++f) {
    auto frame = windowed_frame(clip.samples, f, window, cfg);
    fft_forward(frame);
    for (std::size_t k = 0; k < n_bins; ++k) mag.at(f, k) = std::abs(frame[k]);
  }
  return mag;
}

std::vector<std::vector<std::complex<double>>> stft_complex(
    const std::vector<double>& samples, const FeatureConfig& cfg) {
  const std::size_t n_frames = stft_frame_count(samples.size(), cfg);
  const std::size_t n_bins = static_cast<std::size_t>(cfg.fft_size) / 2 + 1;
  const auto window = make_window(cfg);

  std::vector<std::vector<std::complex<double>>> out(n_frames);
  for (std::size_t f = 0; f < n_frames; ++f) {
    auto frame = windowed_frame(samples, f, window, cfg);
    fft_forward(frame);
    frame.resize(n_bins);
    out[f] = std::move(frame);
  }
  return out;
}

std::vector<double> istft(const std::vector<std::vector<std::complex<double>>>& frames,
                          std::size_t n_samples, const FeatureConfig& cfg) {
  const auto window = make_window(cfg);
  const std::size_t fft_size = static_cast<std::size_t>(cfg.fft_size);
  const std::size_t n_bins = fft_size / 2 + 1;
  const long long pad = cfg.fft_size / 2;

  std::vector<double> acc(n_samples, 0.0);
  std::vector<double> norm(n_samples, 0.0);

  std::vector<std::complex<double>> full(fft_size);
  for (std::size_t f = 0; f < frames.size(); ++f) {
    require(frames[f].size() == n_bins, LRT_E_INVALID_ARGUMENT, "bad frame width");
    for (std::size_t k = 0; k < n_bins; ++k) full[k] = frames[f][k];
    for (std::size_t k = n_bins; k < fft_size; ++k) full[k] = std::conj(frames[f][fft_size - k]);
    fft_inverse(full);
    const long long start = static_cast<long long>(f) * cfg.hop - pad;
    for (std::size_t i = 0; i < fft_size; ++i) {
      const long long t = start + static_cast<long long>(i);
      if (t < 0 || t >= static_cast<long long>(n_samples)) continue;
      acc[static_cast<std::size_t>(t)] += full[i].real() * window[i];
      norm[static_cast<std::size_t>(t)] += window[i] * window[i];
    }
  }
  for (std::size_t t = 0; t < n_samples; ++t) {
    if (norm[t] > 1e-12) acc[t] /= norm[t];
  }
  return acc;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

Tensor mel_filterbank(const FeatureConfig& cfg) {
  validate_feature_config(cfg);
  const std::size_t n_bins = static_cast<std::size_t>(cfg.fft_size) / 2 + 1;
  const std::size_t n_mels = static_cast<std::size_t>(cfg.n_mels);

  // n_mels + 2 edge points uniform on the mel scale.
  const double mel_lo = hz_to_mel(cfg.fmin_hz);
  const double mel_hi = hz_to_mel(cfg.fmax_hz);
  std::vector<double> edges_hz(n_mels + 2);
  for (std::size_t i = 0; i < edges_hz.size(); ++i) {
    edges_hz[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) /
                                         static_cast<double>(n_mels + 1));
  }

  Tensor fb({n_mels, n_bins});
  for (std::size_t m = 0; m < n_mels; ++m) {
    const double left = edges_hz[m];
    const double center = edges_hz[m + 1];
    const double right = edges_hz[m + 2];
    for (std::size_t k = 0; k < n_bins; ++k) {
      const double f = static_cast<double>(k) * cfg.sample_rate_hz / cfg.fft_size;
      double w = 0.0;
      if (f > left && f < center) {
        w = (f - left) / (center - left);
      } else if (f >= center && f < right) {
        w = (right - f) / (right - center);
      }
      fb.at(m, k) = w;
    }
  }
  return fb;
}

MelSpectrogram mel_spectrogram(const AudioClip& clip, const FeatureConfig& cfg) {
  const Tensor mag = stft_magnitude(clip, cfg);
  const Tensor fb = mel_filterbank(cfg);
  const std::size_t n_frames = mag.rows();
  const std::size_t n_bins = mag.cols();
  const std::size_t n_mels = fb.rows();

  MelSpectrogram mel;
  mel.config = cfg;
  mel.values = Tensor({n_frames, n_mels});
  for (std::size_t f = 0; f < n_frames; ++f) {
    for (std::size_t m = 0; m < n_mels; ++m) {
      double acc = 0.0;
      for (std::size_t k = 0; k < n_bins; ++k) acc += fb.at(m, k) * mag.at(f, k);
      mel.values.at(f, m) = std::log(std::max(acc, cfg.log_floor));
    }
  }
  return mel;
}

void save_mel(const MelSpectrogram& mel, const std::string& path) {
  std::string out;
  out.reserve(16 + mel.values.numel() * 4);
  out += "MELS";
  put_u32(out, static_cast<uint32_t>(mel.n_frames()));
  put_u32(out, static_cast<uint32_t>(mel.n_mels()));
  put_u32(out, 0);
  for (double v : mel.values.data) put_f32(out, static_cast<float>(v));
  write_file(path, out);
}

MelSpectrogram load_mel(const std::string& path, const FeatureConfig& cfg) {
  const auto bytes = read_file(path);
  require(bytes.size() >= 16 && std::memcmp(bytes.data(), "MELS", 4) == 0, LRT_E_IO,
          path + ": not a MELS feature cache");
  const uint32_t n_frames = get_u32(bytes.data() + 4);
  const uint32_t n_mels = get_u32(bytes.data() + 8);
  require(bytes.size() >= 16 + static_cast<std::size_t>(n_frames) * n_mels * 4, LRT_E_IO,
          path + ": truncated feature cache");

  MelSpectrogram mel;
  mel.config = cfg;
  mel.values = Tensor({n_frames, n_mels});
  for (std::size_t i = 0; i < mel.values.numel(); ++i) {
    mel.values.data[i] = static_cast<double>(get_f32(bytes.data() + 16 + i * 4));
  }
  return mel;
}

}  // namespace lrt

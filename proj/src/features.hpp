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
#include <string>
#include <vector>

#include "audio.hpp"
#include "tensor.hpp"

namespace lrt {

struct FeatureConfig {
  int fft_size = 1024;
  int hop = 256;
  int win_length = 1024;
  int n_mels = 80;
  double fmin_hz = 0.0;
  double fmax_hz = 8000.0;
  double log_floor = 1e-5;
  int sample_rate_hz = 22050;
};

void validate_feature_config(const FeatureConfig& cfg);

// Frames x mel bands, natural-log magnitude, floored at ln(log_floor).
struct MelSpectrogram {
  Tensor values;  // [n_frames, n_mels]
  FeatureConfig config;

  std::size_t n_frames() const { return values.rows(); }
  std::size_t n_mels() const { return values.cols(); }
};

// Number of analysis frames for a given sample count: reflection padding of
// fft_size/2 on both ends makes this 1 + floor(len / hop).
std::size_t stft_frame_count(std::size_t n_samples, const FeatureConfig& cfg);

// Hann-windowed magnitude STFT, [n_frames, fft_size/2 + 1].
Tensor stft_magnitude(const AudioClip& clip, const FeatureConfig& cfg);

// Complex STFT / weighted overlap-add inverse, used by the vocoder.
std::vector<std::vector<std::complex<double>>> stft_complex(
    const std::vector<double>& samples, const FeatureConfig& cfg);
std::vector<double> istft(const std::vector<std::vector<std::complex<double>>>& frames,
                          std::size_t n_samples, const FeatureConfig& cfg);

// Triangular filters, centers uniform on mel(f) = 2595 log10(1 + f/700);
// [n_mels, fft_size/2 + 1].
Tensor mel_filterbank(const FeatureConfig& cfg);

MelSpectrogram mel_spectrogram(const AudioClip& clip, const FeatureConfig& cfg);

double hz_to_mel(double hz);
double mel_to_hz(double mel);

// Feature cache file: magic "MELS", u32 n_frames, u32 n_mels, u32 reserved,
// then row-major little-endian f32.
void save_mel(const MelSpectrogram& mel, const std::string& path);
MelSpectrogram load_mel(const std::string& path, const FeatureConfig& cfg);

}  // namespace lrt

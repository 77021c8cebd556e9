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

#include "resample.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "error.hpp"

namespace lrt {
namespace {

constexpr int kTapsPerPhase = 48;
constexpr double kKaiserBeta = 8.6;
constexpr double kCutoffFraction = 0.45;

double bessel_i0(double x) {
  // Series converges quickly for the argument range the window uses.
  double sum = 1.0;
  double term = 1.0;
  for (int k = 1; k < 64; ++k) {
    term *= (x / (2.0 * k)) * (x / (2.0 * k));
    sum += term;
    if (term < 1e-18 * sum) break;
  }
  return sum;
}

double sinc(double x) {
  if (std::abs(x) < 1e-12) return 1.0;
  const double px = M_PI * x;
  return std::sin(px) / px;
}

// Mirror index into [0, n) without repeating the edge sample.
std::size_t reflect_index(long long i, std::size_t n) {
  if (n == 1) return 0;
  const long long period = 2 * static_cast<long long>(n) - 2;
  long long j = i % period;
  if (j < 0) j += period;
  if (j >= static_cast<long long>(n)) j = period - j;
  return static_cast<std::size_t>(j);
}

}  // namespace

AudioClip resample(const AudioClip& clip, int target_rate_hz) {
  validate_audio(clip);
  require(target_rate_hz > 0, LRT_E_INVALID_AUDIO,
          "target rate must be positive");

  const int source_rate = clip.sample_rate_hz;
  if (target_rate_hz == source_rate) return clip;

  const int g = std::gcd(source_rate, target_rate_hz);
  const long long up = target_rate_hz / g;    // L
  const long long down = source_rate / g;     // M

  // Zero-phase kernel with an integer center; one polyphase branch per
  // upsample offset, 48 taps each.
  const long long half = kTapsPerPhase * up / 2;
  const long long taps = 2 * half + 1;
  const double cutoff_hz =
      kCutoffFraction * static_cast<double>(std::min(source_rate, target_rate_hz));
  const double fn = cutoff_hz / (static_cast<double>(source_rate) * up);

  std::vector<double> kernel(static_cast<std::size_t>(taps));
  const double i0_beta = bessel_i0(kKaiserBeta);
  for (long long i = 0; i < taps; ++i) {
    const double d = static_cast<double>(i - half);
    const double frac = d / static_cast<double>(half);
    const double window = bessel_i0(kKaiserBeta * std::sqrt(std::max(0.0, 1.0 - frac * frac))) / i0_beta;
    kernel[static_cast<std::size_t>(i)] = 2.0 * fn * sinc(2.0 * fn * d) * window;
  }

  // Per-phase DC normalization keeps constant signals exact.
  std::vector<double> phase_gain(static_cast<std::size_t>(up), 0.0);
  for (long long i = 0; i < taps; ++i) {
    phase_gain[static_cast<std::size_t>(i % up)] += kernel[static_cast<std::size_t>(i)];
  }

  const long long n_in = static_cast<long long>(clip.samples.size());
  const long long n_out = std::llround(static_cast<double>(n_in) *
                                       target_rate_hz / source_rate);

  AudioClip out;
  out.sample_rate_hz = target_rate_hz;
  out.samples.resize(static_cast<std::size_t>(std::max(1LL, n_out)));

  for (long long m = 0; m < std::max(1LL, n_out); ++m) {
    const long long pos = m * down;  // position on the upsampled grid
    // Contributing inputs j satisfy |pos - j*up| <= half.
    long long j0 = (pos - half) / up - 2;
    while (j0 * up < pos - half) ++j0;
    double acc = 0.0;
    long long phase = -1;
    for (long long j = j0; j * up <= pos + half; ++j) {
      const long long idx = half + pos - j * up;
      if (phase < 0) phase = idx % up;
      acc += clip.samples[reflect_index(j, clip.samples.size())] *
             kernel[static_cast<std::size_t>(idx)];
    }
    const double gain = phase >= 0 ? phase_gain[static_cast<std::size_t>(phase)] : 1.0;
    double v = gain != 0.0 ? acc / gain : acc;
    out.samples[static_cast<std::size_t>(m)] = std::clamp(v, -1.0, 1.0);
  }
  return out;
}

}  // namespace lrt

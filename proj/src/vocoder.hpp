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
#include <utility>
#include <vector>

#include "audio.hpp"
#include "features.hpp"
#include "tensor.hpp"

namespace lrt {

// ------------------------------------------------------------------------
// Griffin-Lim: deterministic mel -> waveform path. The mel is inverted to a
// linear magnitude spectrogram through a clamped pseudo-inverse of the
// filterbank, then the phase is estimated iteratively.
// ------------------------------------------------------------------------

struct GriffinLimResult {
  AudioClip audio;
  bool silent_input = false;  // the mel was entirely at the log floor
  // Per-iteration relative distance between |STFT(x_k)| and the target
  // magnitude; non-increasing under the weighted overlap-add synthesis.
  std::vector<double> spectral_errors;
};

GriffinLimResult griffin_lim(const MelSpectrogram& mel, int n_iters,
                             const FeatureConfig& cfg);

// ------------------------------------------------------------------------
// Toy normalizing-flow vocoder: alternating invertible mixing matrices and
// mel-conditioned affine couplings over sample groups, exactly invertible.
// ------------------------------------------------------------------------

struct FlowConfig {
  std::size_t n_flows = 4;
  std::size_t group_size = 8;
  std::size_t coupling_hidden = 32;
  std::size_t mel_cond_dim = 80;
  double sigma = 1.0;
};

void validate_flow_config(const FlowConfig& cfg);

struct FlowParams {
  NamedTensors tensors;  // flow{i}.mixing, flow{i}.coupling.fc{0,1}.{weight,bias}
};

// Mixing matrices start as random rotations (det +1); the final coupling
// layer starts at zero so every flow begins as the identity map.
FlowParams init_flow_params(const FlowConfig& cfg, uint64_t seed);
FlowParams identity_flow_params(const FlowConfig& cfg);

// Samples packed into rows of group_size, trailing zeros as padding.
Tensor make_groups(const std::vector<double>& samples, std::size_t group_size);
std::vector<double> ungroup(const Tensor& groups, std::size_t n_samples);

// One conditioning row per group: the mel frame covering the group's first
// sample (frame repetition upsampling).
Tensor flow_conditioning(const MelSpectrogram& mel, std::size_t n_groups,
                         std::size_t group_size);

struct FlowForwardResult {
  Tensor z;  // same shape as the input groups
  double log_det_total = 0.0;
};

FlowForwardResult flow_forward(const Tensor& audio_groups, const Tensor& cond,
                               const FlowParams& params, const FlowConfig& cfg);

// Exact algebraic inverse of flow_forward.
Tensor flow_inverse(const Tensor& z, const Tensor& cond, const FlowParams& params,
                    const FlowConfig& cfg);

// ||z||^2 / (2 sigma^2) - log_det_total, normalized per sample.
double flow_nll(const Tensor& audio_groups, const Tensor& cond, const FlowParams& params,
                const FlowConfig& cfg);

// nll plus gradients for every flow tensor, for training the toy vocoder.
std::pair<double, NamedTensors> flow_nll_backward(const Tensor& audio_groups,
                                                  const Tensor& cond,
                                                  const FlowParams& params,
                                                  const FlowConfig& cfg);

// Synthesis: draw z ~ N(0, sigma^2), condition on the mel, run the inverse.
AudioClip flow_synthesize(const MelSpectrogram& mel, const FlowParams& params,
                          const FlowConfig& cfg, uint64_t seed);

// Flow weights ride in the same tensor container as model checkpoints,
// tagged "lrtt-flow".
void save_flow_checkpoint(const FlowParams& params, const FlowConfig& cfg,
                          const std::string& path);
std::pair<FlowParams, FlowConfig> load_flow_checkpoint(const std::string& path);

}  // namespace lrt

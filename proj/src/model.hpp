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
#include <utility>
#include <vector>

#include "tensor.hpp"
#include "text.hpp"

namespace lrt {

// Sequence-to-sequence spectrogram predictor: embedding -> conv stack ->
// bidirectional LSTM encoder; location-sensitive attention; two-LSTM decoder
// with prenet, mel/gate projections and a convolutional postnet.
struct ModelConfig {
  std::size_t vocab_size = 0;  // includes padding and EOS ids
  std::size_t embed_dim = 64;
  std::size_t encoder_conv_layers = 3;
  std::size_t encoder_kernel = 5;
  std::size_t encoder_rnn_dim = 64;  // per direction; memory is twice this
  std::size_t attention_dim = 32;
  std::size_t location_filters = 8;
  std::size_t location_kernel = 15;
  std::size_t decoder_rnn_dim = 128;
  std::size_t prenet_dim = 64;
  std::size_t n_mels = 80;
  std::size_t postnet_layers = 5;
  std::size_t postnet_kernel = 5;
  double gate_threshold = 0.4;
  double decoder_dropout = 0.4;
  double attention_dropout = 0.4;
  std::size_t max_decoder_steps = 1000;

  std::size_t memory_dim() const { return 2 * encoder_rnn_dim; }
  std::size_t postnet_channels() const { return embed_dim; }
};

void validate_model_config(const ModelConfig& cfg);

// Canonical (name, shape) listing of every trainable tensor.
std::vector<std::pair<std::string, std::vector<std::size_t>>> parameter_manifest(
    const ModelConfig& cfg);

// Xavier-uniform weights, zero biases (LSTM forget-gate bias 1), embedding
// uniform(-0.1, 0.1). Values are f32-representable so checkpoints round-trip
// bit-exactly.
NamedTensors init_parameters(const ModelConfig& cfg, uint64_t seed);

// Shape/name check against the manifest; missing tensors raise MissingTensor.
void validate_parameters(const NamedTensors& params, const ModelConfig& cfg);

struct AttentionState {
  std::vector<double> prev_weights;
  std::vector<double> cum_weights;
};

// Single attention evaluation: energies v . tanh(Wq q + Vm m_i + P f_i + b)
// with f = location conv over [prev; cum]. Returns (context, weights).
std::pair<std::vector<double>, std::vector<double>> attention_step(
    const std::vector<double>& query, const Tensor& memory,
    const AttentionState& state, const NamedTensors& params,
    const ModelConfig& cfg);

enum class StopReason { kGateFired, kMaxSteps, kTeacherForced };

struct DecoderOutput {
  Tensor mel_before;  // [n_dec_frames, n_mels]
  Tensor mel_after;   // mel_before + postnet residual
  std::vector<double> gate_logits;
  Tensor alignment;  // [n_dec_frames, n_enc_steps]
  StopReason stop_reason = StopReason::kTeacherForced;
};

struct LossBreakdown {
  double mse_before = 0.0;
  double mse_after = 0.0;
  double gate_bce = 0.0;
  double total = 0.0;
};

struct ForwardOptions {
  bool train_mode = false;    // enables conv/attention/decoder dropout
  uint64_t dropout_seed = 0;  // prenet dropout stream (always active)
};

// Encoder only: memory matrix [n_enc_steps, memory_dim].
Tensor encode(const SymbolSequence& symbols, const NamedTensors& params,
              const ModelConfig& cfg, bool train_mode, uint64_t dropout_seed = 0);

struct TeacherForcedResult {
  DecoderOutput output;
  LossBreakdown loss;
};

// Teacher-forced pass; gate target is 1 exactly at the final frame.
TeacherForcedResult forward_teacher_forced(const SymbolSequence& symbols,
                                           const Tensor& target_mel,
                                           const NamedTensors& params,
                                           const ModelConfig& cfg,
                                           const ForwardOptions& options);

// Teacher-forced pass plus d(total)/d(params) for every trainable tensor.
std::pair<TeacherForcedResult, NamedTensors> backward(const SymbolSequence& symbols,
                                                      const Tensor& target_mel,
                                                      const NamedTensors& params,
                                                      const ModelConfig& cfg,
                                                      const ForwardOptions& options);

// Autoregressive decoding; stops when sigmoid(gate) >= gate_threshold or at
// max_decoder_steps. Prenet dropout stays active, seeded for determinism.
DecoderOutput infer(const SymbolSequence& symbols, const NamedTensors& params,
                    const ModelConfig& cfg, uint64_t dropout_seed = 0);

}  // namespace lrt

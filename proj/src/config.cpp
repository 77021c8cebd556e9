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

#include "config.hpp"

#include <sstream>

#include "error.hpp"
#include "io_util.hpp"

namespace lrt {
namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

uint64_t take_u64(KeyValues& kv, const std::string& key, uint64_t fallback) {
  const auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  const std::string value = it->second;
  kv.erase(it);
  try {
    return std::stoull(value);
  } catch (...) {
    fail(LRT_E_CONFIG, key + ": expected an integer, got '" + value + "'");
  }
}

double take_f64(KeyValues& kv, const std::string& key, double fallback) {
  const auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  const std::string value = it->second;
  kv.erase(it);
  try {
    return std::stod(value);
  } catch (...) {
    fail(LRT_E_CONFIG, key + ": expected a number, got '" + value + "'");
  }
}

}  // namespace

KeyValues parse_keyvalues(const std::string& text) {
  KeyValues kv;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    require(eq != std::string::npos, LRT_E_CONFIG,
            "config line " + std::to_string(line_no) + ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    require(!key.empty(), LRT_E_CONFIG,
            "config line " + std::to_string(line_no) + ": empty key");
    kv[key] = trim(line.substr(eq + 1));
  }
  return kv;
}

KeyValues load_config_file(const std::string& path) {
  return parse_keyvalues(read_text_file(path));
}

void apply_overrides(KeyValues& kv, const std::vector<std::string>& overrides) {
  for (const auto& entry : overrides) {
    const auto eq = entry.find('=');
    require(eq != std::string::npos, LRT_E_CONFIG, "override must be key=value: " + entry);
    kv[trim(entry.substr(0, eq))] = trim(entry.substr(eq + 1));
  }
}

void apply_model_keys(KeyValues& kv, ModelConfig& cfg) {
  cfg.embed_dim = take_u64(kv, "model.embed_dim", cfg.embed_dim);
  cfg.encoder_conv_layers = take_u64(kv, "model.encoder_conv_layers", cfg.encoder_conv_layers);
  cfg.encoder_kernel = take_u64(kv, "model.encoder_kernel", cfg.encoder_kernel);
  cfg.encoder_rnn_dim = take_u64(kv, "model.encoder_rnn_dim", cfg.encoder_rnn_dim);
  cfg.attention_dim = take_u64(kv, "model.attention_dim", cfg.attention_dim);
  cfg.location_filters = take_u64(kv, "model.location_filters", cfg.location_filters);
  cfg.location_kernel = take_u64(kv, "model.location_kernel", cfg.location_kernel);
  cfg.decoder_rnn_dim = take_u64(kv, "model.decoder_rnn_dim", cfg.decoder_rnn_dim);
  cfg.prenet_dim = take_u64(kv, "model.prenet_dim", cfg.prenet_dim);
  cfg.n_mels = take_u64(kv, "model.n_mels", cfg.n_mels);
  cfg.postnet_layers = take_u64(kv, "model.postnet_layers", cfg.postnet_layers);
  cfg.postnet_kernel = take_u64(kv, "model.postnet_kernel", cfg.postnet_kernel);
  cfg.gate_threshold = take_f64(kv, "model.gate_threshold", cfg.gate_threshold);
  cfg.decoder_dropout = take_f64(kv, "model.decoder_dropout", cfg.decoder_dropout);
  cfg.attention_dropout = take_f64(kv, "model.attention_dropout", cfg.attention_dropout);
  cfg.max_decoder_steps = take_u64(kv, "model.max_decoder_steps", cfg.max_decoder_steps);
}

void apply_feature_keys(KeyValues& kv, FeatureConfig& cfg) {
  cfg.fft_size = static_cast<int>(take_u64(kv, "features.fft_size", cfg.fft_size));
  cfg.hop = static_cast<int>(take_u64(kv, "features.hop", cfg.hop));
  cfg.win_length = static_cast<int>(take_u64(kv, "features.win_length", cfg.win_length));
  cfg.n_mels = static_cast<int>(take_u64(kv, "features.n_mels", cfg.n_mels));
  cfg.fmin_hz = take_f64(kv, "features.fmin_hz", cfg.fmin_hz);
  cfg.fmax_hz = take_f64(kv, "features.fmax_hz", cfg.fmax_hz);
  cfg.log_floor = take_f64(kv, "features.log_floor", cfg.log_floor);
  cfg.sample_rate_hz =
      static_cast<int>(take_u64(kv, "features.sample_rate_hz", cfg.sample_rate_hz));
}

void apply_train_keys(KeyValues& kv, TrainConfig& train, AdamConfig& adam) {
  train.epochs = take_u64(kv, "train.epochs", train.epochs);
  train.batch_size = take_u64(kv, "train.batch_size", train.batch_size);
  train.grad_clip_norm = take_f64(kv, "train.grad_clip_norm", train.grad_clip_norm);
  train.anneal.factor = take_f64(kv, "train.anneal_factor", train.anneal.factor);
  train.anneal.patience_validations =
      take_u64(kv, "train.anneal_patience", train.anneal.patience_validations);
  train.validation_interval_iters =
      take_u64(kv, "train.validation_interval", train.validation_interval_iters);
  train.max_iters = take_u64(kv, "train.max_iters", train.max_iters);
  train.threads = static_cast<int>(take_u64(kv, "train.threads", 1));

  adam.lr = take_f64(kv, "adam.lr", adam.lr);
  adam.beta1 = take_f64(kv, "adam.beta1", adam.beta1);
  adam.beta2 = take_f64(kv, "adam.beta2", adam.beta2);
  adam.weight_decay = take_f64(kv, "adam.weight_decay", adam.weight_decay);
  adam.numerical_eps = take_f64(kv, "adam.numerical_eps", adam.numerical_eps);
}

void apply_flow_keys(KeyValues& kv, FlowConfig& cfg) {
  cfg.n_flows = take_u64(kv, "flow.n_flows", cfg.n_flows);
  cfg.group_size = take_u64(kv, "flow.group_size", cfg.group_size);
  cfg.coupling_hidden = take_u64(kv, "flow.coupling_hidden", cfg.coupling_hidden);
  cfg.mel_cond_dim = take_u64(kv, "flow.mel_cond_dim", cfg.mel_cond_dim);
  cfg.sigma = take_f64(kv, "flow.sigma", cfg.sigma);
}

void reject_unknown(const KeyValues& kv) {
  if (kv.empty()) return;
  std::string msg = "unknown configuration keys:";
  for (const auto& [key, value] : kv) {
    (void)value;
    msg += ' ' + key;
  }
  fail(LRT_E_CONFIG, msg);
}

}  // namespace lrt

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

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "checkpoint.hpp"
#include "model.hpp"
#include "tensor.hpp"

namespace lrt {

struct AdamConfig {
  double lr = 4e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double weight_decay = 1e-5;  // decoupled decay coefficient
  double numerical_eps = 1e-8;
};

void validate_adam_config(const AdamConfig& cfg);

struct OptimizerState {
  NamedTensors first_moment;
  NamedTensors second_moment;
  uint64_t step = 0;
};

OptimizerState init_optimizer_state(const NamedTensors& params);

// Decoupled weight decay (p -= lr * wd * p) followed by the bias-corrected
// Adam update. Raises NumericalDivergence on non-finite gradients.
void adam_step(NamedTensors& params, const NamedTensors& grads, OptimizerState& state,
               const AdamConfig& cfg);

// Scales all gradients so the global norm is at most max_norm. Returns the
// pre-clip norm.
double clip_gradients(NamedTensors& grads, double max_norm);

struct AnnealConfig {
  double factor = 0.5;
  std::size_t patience_validations = 5;
};

constexpr double kMinLearningRate = 1e-7;

// Replays the validation-loss history through the plateau rule and returns
// the annealed learning rate (never below kMinLearningRate).
double anneal_lr(double initial_lr, const std::vector<double>& val_losses,
                 const AnnealConfig& cfg);

struct TrainConfig {
  std::size_t epochs = 430;
  std::size_t batch_size = 8;
  double grad_clip_norm = 1.0;
  AnnealConfig anneal;
  std::size_t validation_interval_iters = 100;
  uint64_t seed = 0;
  std::size_t max_iters = 0;  // 0 = bounded by epochs only
  int threads = 1;
};

void validate_train_config(const TrainConfig& cfg);

struct LossRecord {
  uint64_t iteration = 0;
  double train_loss = 0.0;
  bool has_val = false;
  double val_loss = 0.0;
  double lr = 0.0;
};

// CSV "iteration,train_loss,val_loss,lr" with val_loss empty when absent.
std::string format_loss_log(const std::vector<LossRecord>& records);
std::vector<LossRecord> parse_loss_log(const std::string& csv);

struct TrainItem {
  SymbolSequence symbols;
  Tensor mel;  // [frames, n_mels]
};

struct FitResult {
  Checkpoint checkpoint;  // final parameters + optimizer state
  std::vector<LossRecord> records;
};

using ProgressFn = std::function<void(const LossRecord&)>;

// Full optimization loop: seeded 90/10 train/validation split, per-iteration
// loss records, validation every validation_interval_iters, checkpoints on
// every validation improvement (out_dir/best.lrtt) and at the end
// (out_dir/final.lrtt) when out_dir is non-empty. On divergence the last
// good state is saved to out_dir/last_good.lrtt and the error re-raised.
FitResult fit(const std::vector<TrainItem>& items, NamedTensors params,
              const ModelConfig& model_cfg, const TrainConfig& train_cfg,
              const AdamConfig& adam_cfg, const SymbolTable& vocab,
              const std::string& out_dir, const ProgressFn& progress = nullptr,
              std::optional<OptimizerState> warm_state = std::nullopt);

// Loads (symbols, mel) pairs for every manifest entry from a feature cache
// directory; a missing cache file raises FeaturesMissing.
std::vector<TrainItem> load_training_items(const std::string& manifest_path,
                                           const std::string& features_dir,
                                           const SymbolTable& table,
                                           std::size_t expected_mels);

}  // namespace lrt

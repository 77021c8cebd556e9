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

#include "trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "corpus.hpp"
#include "error.hpp"
#include "features.hpp"
#include "io_util.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace fs = std::filesystem;

namespace lrt {

void validate_adam_config(const AdamConfig& cfg) {
  require(cfg.lr > 0, LRT_E_CONFIG, "learning rate must be positive");
  require(cfg.beta1 >= 0 && cfg.beta1 < 1 && cfg.beta2 >= 0 && cfg.beta2 < 1, LRT_E_CONFIG,
          "betas must lie in [0, 1)");
  require(cfg.weight_decay >= 0, LRT_E_CONFIG, "weight decay must be non-negative");
  require(cfg.numerical_eps > 0, LRT_E_CONFIG, "epsilon must be positive");
}

void validate_train_config(const TrainConfig& cfg) {
  require(cfg.epochs >= 1, LRT_E_CONFIG, "epochs must be >= 1");
  require(cfg.batch_size >= 1, LRT_E_CONFIG, "batch_size must be >= 1");
  require(cfg.grad_clip_norm > 0, LRT_E_CONFIG, "grad_clip_norm must be positive");
  require(cfg.anneal.factor > 0 && cfg.anneal.factor < 1, LRT_E_CONFIG,
          "anneal factor must lie in (0, 1)");
  require(cfg.validation_interval_iters >= 1, LRT_E_CONFIG,
          "validation interval must be >= 1");
}

OptimizerState init_optimizer_state(const NamedTensors& params) {
  OptimizerState s;
  for (const auto& [name, t] : params) {
    s.first_moment.emplace(name, Tensor(t.shape));
    s.second_moment.emplace(name, Tensor(t.shape));
  }
  return s;
}

void adam_step(NamedTensors& params, const NamedTensors& grads, OptimizerState& state,
               const AdamConfig& cfg) {
  validate_adam_config(cfg);
  for (const auto& [name, g] : grads) {
    require(g.all_finite(), LRT_E_NUMERICAL_DIVERGENCE, "non-finite gradient for " + name);
  }

  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double bias1 = 1.0 - std::pow(cfg.beta1, t);
  const double bias2 = 1.0 - std::pow(cfg.beta2, t);

  for (auto& [name, p] : params) {
    const auto git = grads.find(name);
    require(git != grads.end(), LRT_E_MISSING_TENSOR, "no gradient for " + name);
    const Tensor& g = git->second;
    require(g.same_shape(p), LRT_E_STATE_MISMATCH, "gradient shape mismatch for " + name);

    Tensor& m = state.first_moment.at(name);
    Tensor& v = state.second_moment.at(name);
    for (std::size_t i = 0; i < p.numel(); ++i) {
      // Decoupled weight decay first, then the Adam update.
      p.data[i] -= cfg.lr * cfg.weight_decay * p.data[i];
      m.data[i] = cfg.beta1 * m.data[i] + (1.0 - cfg.beta1) * g.data[i];
      v.data[i] = cfg.beta2 * v.data[i] + (1.0 - cfg.beta2) * g.data[i] * g.data[i];
      const double m_hat = m.data[i] / bias1;
      const double v_hat = v.data[i] / bias2;
      p.data[i] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.numerical_eps);
    }
  }
}

double clip_gradients(NamedTensors& grads, double max_norm) {
  const double norm = global_norm(grads);
  if (norm > max_norm && norm > 0.0) {
    const double scale = max_norm / norm;
    for (auto& [name, g] : grads) {
      (void)name;
      for (auto& v : g.data) v *= scale;
    }
  }
  return norm;
}

double anneal_lr(double initial_lr, const std::vector<double>& val_losses,
                 const AnnealConfig& cfg) {
  require(!val_losses.empty(), LRT_E_EMPTY_LOG, "no validation records");
  double lr = initial_lr;
  double best = val_losses.front();
  std::size_t since_improvement = 0;
  for (std::size_t i = 1; i < val_losses.size(); ++i) {
    if (val_losses[i] < best) {
      best = val_losses[i];
      since_improvement = 0;
    } else {
      ++since_improvement;
      if (since_improvement >= cfg.patience_validations) {
        lr = std::max(lr * cfg.factor, kMinLearningRate);
        since_improvement = 0;
      }
    }
  }
  return lr;
}

std::string format_loss_log(const std::vector<LossRecord>& records) {
  std::string out = "iteration,train_loss,val_loss,lr\n";
  char buf[160];
  for (const auto& r : records) {
    if (r.has_val) {
      std::snprintf(buf, sizeof buf, "%llu,%.17g,%.17g,%.17g\n",
                    static_cast<unsigned long long>(r.iteration), r.train_loss, r.val_loss, r.lr);
    } else {
      std::snprintf(buf, sizeof buf, "%llu,%.17g,,%.17g\n",
                    static_cast<unsigned long long>(r.iteration), r.train_loss, r.lr);
    }
    out += buf;
  }
  return out;
}

std::vector<LossRecord> parse_loss_log(const std::string& csv) {
  std::vector<LossRecord> records;
  std::istringstream in(csv);
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (header) {
      header = false;
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::size_t pos = 0;
    while (true) {
      const auto comma = line.find(',', pos);
      if (comma == std::string::npos) {
        cells.push_back(line.substr(pos));
        break;
      }
      cells.push_back(line.substr(pos, comma - pos));
      pos = comma + 1;
    }
    require(cells.size() == 4, LRT_E_IO, "bad loss log line: " + line);
    LossRecord r;
    r.iteration = std::stoull(cells[0]);
    r.train_loss = std::stod(cells[1]);
    if (!cells[2].empty()) {
      r.has_val = true;
      r.val_loss = std::stod(cells[2]);
    }
    r.lr = std::stod(cells[3]);
    records.push_back(r);
  }
  return records;
}

namespace {

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
};

SplitIndices split_train_val(std::size_t n, uint64_t seed) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed ^ 0x5eed5eedULL);
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.next_below(i));
    std::swap(order[i - 1], order[j]);
  }
  SplitIndices split;
  const std::size_t val_count = n >= 2 ? std::max<std::size_t>(1, n / 10) : 0;
  split.val.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(val_count));
  split.train.assign(order.begin() + static_cast<std::ptrdiff_t>(val_count), order.end());
  if (split.train.empty()) split.train = split.val;  // single-item corpora
  return split;
}

Checkpoint make_checkpoint(const NamedTensors& params, const OptimizerState& opt,
                           const ModelConfig& cfg, const SymbolTable& vocab, uint64_t iteration,
                           uint64_t seed, bool with_optimizer) {
  Checkpoint ckpt;
  ckpt.model_cfg = cfg;
  ckpt.vocab = vocab;
  ckpt.iteration = iteration;
  ckpt.seed = seed;
  ckpt.tensors = params;
  if (with_optimizer) {
    for (const auto& [name, t] : opt.first_moment) ckpt.tensors.emplace("optimizer.m." + name, t);
    for (const auto& [name, t] : opt.second_moment) ckpt.tensors.emplace("optimizer.v." + name, t);
    Tensor step({1});
    step.data[0] = static_cast<double>(opt.step);
    ckpt.tensors.emplace("optimizer.step", std::move(step));
  }
  return ckpt;
}

}  // namespace

FitResult fit(const std::vector<TrainItem>& items, NamedTensors params,
              const ModelConfig& model_cfg, const TrainConfig& train_cfg,
              const AdamConfig& adam_cfg, const SymbolTable& vocab, const std::string& out_dir,
              const ProgressFn& progress, std::optional<OptimizerState> warm_state) {
  validate_model_config(model_cfg);
  validate_train_config(train_cfg);
  validate_adam_config(adam_cfg);
  validate_parameters(params, model_cfg);
  require(!items.empty(), LRT_E_EMPTY_MANIFEST, "no training items");

  if (!out_dir.empty()) make_dirs(out_dir);

  const SplitIndices split = split_train_val(items.size(), train_cfg.seed);
  OptimizerState opt = warm_state ? std::move(*warm_state) : init_optimizer_state(params);

  AdamConfig adam = adam_cfg;
  std::vector<LossRecord> records;
  std::vector<double> val_history;
  double best_val = 0.0;
  bool have_best = false;
  std::size_t since_improvement = 0;
  uint64_t iteration = 0;
  NamedTensors last_good = params;
  uint64_t last_good_iter = 0;

  const auto validate_now = [&]() {
    double total = 0.0;
    for (const std::size_t idx : split.val) {
      ForwardOptions fo;
      fo.train_mode = false;
      fo.dropout_seed = 0;  // fixed stream keeps validations comparable
      total += forward_teacher_forced(items[idx].symbols, items[idx].mel, params, model_cfg, fo)
                   .loss.total;
    }
    return total / static_cast<double>(split.val.size());
  };

  const auto save_if = [&](const char* name, uint64_t iter, bool with_opt) {
    if (out_dir.empty()) return;
    save_checkpoint(make_checkpoint(params, opt, model_cfg, vocab, iter, train_cfg.seed, with_opt),
                    (fs::path(out_dir) / name).string());
  };

  bool stop = false;
  try {
    for (std::size_t epoch = 0; epoch < train_cfg.epochs && !stop; ++epoch) {
      // Seeded epoch shuffle.
      std::vector<std::size_t> order = split.train;
      Rng shuffle_rng(train_cfg.seed * 0x9e3779b9ULL + epoch + 1);
      for (std::size_t i = order.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(shuffle_rng.next_below(i));
        std::swap(order[i - 1], order[j]);
      }

      for (std::size_t start = 0; start < order.size() && !stop;
           start += train_cfg.batch_size) {
        const std::size_t batch_n = std::min(train_cfg.batch_size, order.size() - start);
        ++iteration;

        // Retained on divergence: the parameters of the last iteration whose
        // loss evaluated finite.
        const NamedTensors entering = params;

        // Per-item gradients, deterministic index-ordered accumulation.
        std::vector<NamedTensors> item_grads(batch_n);
        std::vector<double> item_losses(batch_n);
        parallel_for(batch_n, train_cfg.threads, [&](std::size_t b) {
          const TrainItem& item = items[order[start + b]];
          ForwardOptions fo;
          fo.train_mode = true;
          fo.dropout_seed = train_cfg.seed * 0x100000001b3ULL + iteration * 8191 + b;
          auto [result, grads] = backward(item.symbols, item.mel, params, model_cfg, fo);
          item_losses[b] = result.loss.total;
          item_grads[b] = std::move(grads);
        });

        NamedTensors batch_grads = std::move(item_grads[0]);
        for (std::size_t b = 1; b < batch_n; ++b) {
          for (auto& [name, g] : batch_grads) {
            const auto& other = item_grads[b].at(name);
            for (std::size_t i = 0; i < g.numel(); ++i) g.data[i] += other.data[i];
          }
        }
        double train_loss = 0.0;
        for (double l : item_losses) train_loss += l;
        train_loss /= static_cast<double>(batch_n);
        require(std::isfinite(train_loss), LRT_E_NUMERICAL_DIVERGENCE,
                "non-finite training loss");
        for (auto& [name, g] : batch_grads) {
          (void)name;
          for (auto& v : g.data) v /= static_cast<double>(batch_n);
        }

        clip_gradients(batch_grads, train_cfg.grad_clip_norm);
        adam_step(params, batch_grads, opt, adam);
        last_good = entering;
        last_good_iter = iteration - 1;

        LossRecord record;
        record.iteration = iteration;
        record.train_loss = train_loss;
        record.lr = adam.lr;

        if (!split.val.empty() && iteration % train_cfg.validation_interval_iters == 0) {
          const double val = validate_now();
          record.has_val = true;
          record.val_loss = val;
          val_history.push_back(val);
          if (!have_best || val < best_val) {
            best_val = val;
            have_best = true;
            since_improvement = 0;
            save_if("best.lrtt", iteration, false);
          } else {
            ++since_improvement;
            if (since_improvement >= train_cfg.anneal.patience_validations) {
              adam.lr = std::max(adam.lr * train_cfg.anneal.factor, kMinLearningRate);
              since_improvement = 0;
            }
          }
          record.lr = adam.lr;
        }

        records.push_back(record);
        if (progress) progress(record);
        if (train_cfg.max_iters > 0 && iteration >= train_cfg.max_iters) stop = true;
      }
    }
  } catch (const Error& e) {
    if (e.code() == LRT_E_NUMERICAL_DIVERGENCE) {
      if (!out_dir.empty()) {
        save_checkpoint(make_checkpoint(last_good, opt, model_cfg, vocab, last_good_iter,
                                        train_cfg.seed, false),
                        (fs::path(out_dir) / "last_good.lrtt").string());
      }
    }
    throw;
  }

  FitResult result;
  result.records = std::move(records);
  result.checkpoint =
      make_checkpoint(params, opt, model_cfg, vocab, iteration, train_cfg.seed, true);
  if (!out_dir.empty()) {
    save_checkpoint(result.checkpoint, (fs::path(out_dir) / "final.lrtt").string());
    write_file((fs::path(out_dir) / "loss_log.csv").string(), format_loss_log(result.records));
  }
  return result;
}

std::vector<TrainItem> load_training_items(const std::string& manifest_path,
                                           const std::string& features_dir,
                                           const SymbolTable& table,
                                           std::size_t expected_mels) {
  const auto entries = load_manifest(manifest_path);
  FeatureConfig dummy;
  dummy.n_mels = static_cast<int>(expected_mels);

  std::vector<TrainItem> items;
  items.reserve(entries.size());
  for (const auto& e : entries) {
    const std::string stem = fs::path(e.audio_path).stem().string();
    const fs::path cache = fs::path(features_dir) / (stem + ".mels");
    require(fs::exists(cache), LRT_E_FEATURES_MISSING, cache.string());

    TrainItem item;
    item.symbols = normalize_text(e.text, table);
    item.mel = load_mel(cache.string(), dummy).values;
    require(item.mel.cols() == expected_mels, LRT_E_FEATURES_MISSING,
            cache.string() + ": has " + std::to_string(item.mel.cols()) +
                " mel bands, model expects " + std::to_string(expected_mels));
    items.push_back(std::move(item));
  }
  return items;
}

}  // namespace lrt

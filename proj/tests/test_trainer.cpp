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

#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "error.hpp"
#include "rng.hpp"
#include "trainer.hpp"

using namespace lrt;

namespace {

NamedTensors scalar_params(double p) {
  NamedTensors t;
  t.emplace("w", Tensor({1}, {p}));
  return t;
}

NamedTensors scalar_grads(double g) {
  NamedTensors t;
  t.emplace("w", Tensor({1}, {g}));
  return t;
}

ModelConfig tiny_cfg(std::size_t vocab) {
  ModelConfig c;
  c.vocab_size = vocab;
  c.embed_dim = 4;
  c.encoder_conv_layers = 1;
  c.encoder_kernel = 3;
  c.encoder_rnn_dim = 3;
  c.attention_dim = 4;
  c.location_filters = 2;
  c.location_kernel = 3;
  c.decoder_rnn_dim = 5;
  c.prenet_dim = 3;
  c.n_mels = 4;
  c.postnet_layers = 2;
  c.postnet_kernel = 3;
  c.decoder_dropout = 0.0;
  c.attention_dropout = 0.0;
  c.max_decoder_steps = 20;
  return c;
}

std::vector<TrainItem> tiny_items(std::size_t count, const ModelConfig& cfg, uint64_t seed) {
  Rng rng(seed);
  std::vector<TrainItem> items;
  for (std::size_t i = 0; i < count; ++i) {
    TrainItem item;
    const std::size_t len = 2 + rng.next_below(3);
    for (std::size_t k = 0; k < len; ++k) {
      item.symbols.ids.push_back(1 + static_cast<uint32_t>(rng.next_below(cfg.vocab_size - 2)));
    }
    item.symbols.ids.push_back(static_cast<uint32_t>(cfg.vocab_size - 1));  // EOS
    const std::size_t frames = 3 + rng.next_below(3);
    item.mel = Tensor({frames, cfg.n_mels});
    for (auto& v : item.mel.data) v = rng.uniform(-1.0, 1.0);
    items.push_back(std::move(item));
  }
  return items;
}

SymbolTable tiny_table() { return SymbolTable({0x0915, 0x0916, 0x0917, 0x0918, 0x0919}); }

}  // namespace

TEST_CASE("adam first step matches the hand-evaluated formulas") {
  auto params = scalar_params(1.0);
  auto state = init_optimizer_state(params);
  AdamConfig cfg;
  cfg.lr = 0.1;
  cfg.weight_decay = 0.0;

  adam_step(params, scalar_grads(1.0), state, cfg);

  CHECK(state.first_moment.at("w").data[0] == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(state.second_moment.at("w").data[0] == doctest::Approx(0.001).epsilon(1e-15));
  // m_hat = 1, v_hat = 1, p' = 1 - 0.1 / (1 + 1e-8)
  CHECK(params.at("w").data[0] ==
        doctest::Approx(1.0 - 0.1 / (1.0 + 1e-8)).epsilon(1e-15));
  CHECK(state.step == 1);
}

TEST_CASE("zero gradient with fresh state leaves parameters unchanged") {
  auto params = scalar_params(0.73);
  auto state = init_optimizer_state(params);
  AdamConfig cfg;
  cfg.weight_decay = 0.0;
  adam_step(params, scalar_grads(0.0), state, cfg);
  CHECK(params.at("w").data[0] == 0.73);
}

TEST_CASE("weight decay alone shrinks parameters by lr*wd") {
  auto params = scalar_params(0.5);
  auto state = init_optimizer_state(params);
  AdamConfig cfg;  // lr 4e-5, wd 1e-5
  adam_step(params, scalar_grads(0.0), state, cfg);
  CHECK(params.at("w").data[0] == doctest::Approx(0.5 * (1.0 - 4e-10)).epsilon(1e-16));
}

TEST_CASE("adam matches an independent textbook evaluation on random scalars") {
  Rng rng(404);
  for (int trial = 0; trial < 100; ++trial) {
    AdamConfig cfg;
    cfg.lr = rng.uniform(1e-4, 1e-1);
    cfg.weight_decay = 0.0;
    double p = rng.uniform(-2.0, 2.0);
    double m = 0.0, v = 0.0;

    auto params = scalar_params(p);
    auto state = init_optimizer_state(params);

    const int steps = 1 + static_cast<int>(rng.next_below(5));
    for (int t = 1; t <= steps; ++t) {
      const double g = rng.uniform(-1.0, 1.0);
      adam_step(params, scalar_grads(g), state, cfg);
      // Textbook recurrences.
      m = cfg.beta1 * m + (1 - cfg.beta1) * g;
      v = cfg.beta2 * v + (1 - cfg.beta2) * g * g;
      const double m_hat = m / (1 - std::pow(cfg.beta1, t));
      const double v_hat = v / (1 - std::pow(cfg.beta2, t));
      p -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.numerical_eps);
    }
    CHECK(std::abs(params.at("w").data[0] - p) <= 1e-12);
  }
}

TEST_CASE("non-finite gradients raise NumericalDivergence") {
  auto params = scalar_params(1.0);
  auto state = init_optimizer_state(params);
  try {
    adam_step(params, scalar_grads(std::nan("")), state, AdamConfig{});
    FAIL("expected NumericalDivergence");
  } catch (const Error& e) {
    CHECK(e.code() == LRT_E_NUMERICAL_DIVERGENCE);
  }
}

TEST_CASE("gradient clipping caps the global norm") {
  Rng rng(405);
  for (int trial = 0; trial < 20; ++trial) {
    NamedTensors grads;
    grads.emplace("a", Tensor({7}));
    grads.emplace("b", Tensor({3, 2}));
    for (auto& [name, g] : grads) {
      (void)name;
      for (auto& v : g.data) v = rng.uniform(-3.0, 3.0);
    }
    const double before = global_norm(grads);
    const double pre = clip_gradients(grads, 1.0);
    CHECK(pre == doctest::Approx(before).epsilon(1e-12));
    if (before > 1.0) {
      CHECK(global_norm(grads) <= 1.0 + 1e-9);
    } else {
      CHECK(global_norm(grads) == doctest::Approx(before).epsilon(1e-12));
    }
  }
}

TEST_CASE("annealing leaves an improving run untouched") {
  AnnealConfig cfg;
  CHECK(anneal_lr(1e-3, {5.0, 4.0, 3.0, 2.0, 1.0, 0.5}, cfg) == 1e-3);
}

TEST_CASE("five consecutive non-improvements halve the learning rate once") {
  AnnealConfig cfg;  // factor 0.5, patience 5
  const std::vector<double> plateau = {1.0, 1.1, 1.2, 1.1, 1.3, 1.2};
  CHECK(anneal_lr(1e-3, plateau, cfg) == doctest::Approx(5e-4).epsilon(1e-15));
  // Four non-improvements are not enough.
  CHECK(anneal_lr(1e-3, {1.0, 1.1, 1.2, 1.1, 1.3}, cfg) == 1e-3);
}

TEST_CASE("the learning rate floors at 1e-7 under a repeated plateau") {
  AnnealConfig cfg;
  std::vector<double> losses = {1.0};
  for (int i = 0; i < 400; ++i) losses.push_back(2.0);
  const double lr = anneal_lr(1e-3, losses, cfg);
  CHECK(lr == kMinLearningRate);
  CHECK(lr > 0.0);
}

TEST_CASE("fit writes one record per iteration with strictly increasing ids") {
  const auto cfg = tiny_cfg(8);
  const auto items = tiny_items(5, cfg, 51);
  TrainConfig tc;
  tc.epochs = 1000;
  tc.batch_size = 2;
  tc.max_iters = 200;
  tc.validation_interval_iters = 25;
  tc.seed = 7;
  AdamConfig ac;
  ac.lr = 1e-3;

  const auto result = fit(items, init_parameters(cfg, 1), cfg, tc, ac, tiny_table(), "");
  REQUIRE(result.records.size() == 200);
  for (std::size_t i = 0; i < result.records.size(); ++i) {
    CHECK(result.records[i].iteration == i + 1);
  }
  CHECK(result.checkpoint.iteration == 200);
  // Optimizer state rides along in the final checkpoint.
  CHECK(result.checkpoint.tensors.count("optimizer.step") == 1);
}

TEST_CASE("fit is bitwise deterministic under a fixed seed") {
  const auto cfg = tiny_cfg(8);
  const auto items = tiny_items(5, cfg, 52);
  TrainConfig tc;
  tc.epochs = 50;
  tc.batch_size = 2;
  tc.max_iters = 60;
  tc.validation_interval_iters = 10;
  tc.seed = 99;
  AdamConfig ac;
  ac.lr = 1e-3;

  const auto a = fit(items, init_parameters(cfg, 2), cfg, tc, ac, tiny_table(), "");
  const auto b = fit(items, init_parameters(cfg, 2), cfg, tc, ac, tiny_table(), "");
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i].train_loss == b.records[i].train_loss);
    CHECK(a.records[i].lr == b.records[i].lr);
    CHECK(a.records[i].has_val == b.records[i].has_val);
    if (a.records[i].has_val) CHECK(a.records[i].val_loss == b.records[i].val_loss);
  }
  for (const auto& [name, t] : a.checkpoint.tensors) {
    CHECK(t.data == b.checkpoint.tensors.at(name).data);
  }
}

TEST_CASE("the recorded learning rate sequence never increases") {
  const auto cfg = tiny_cfg(8);
  const auto items = tiny_items(4, cfg, 53);
  TrainConfig tc;
  tc.epochs = 100;
  tc.batch_size = 2;
  tc.max_iters = 120;
  tc.validation_interval_iters = 5;
  tc.anneal.patience_validations = 2;
  tc.seed = 3;
  AdamConfig ac;
  ac.lr = 1e-3;

  const auto result = fit(items, init_parameters(cfg, 3), cfg, tc, ac, tiny_table(), "");
  for (std::size_t i = 1; i < result.records.size(); ++i) {
    CHECK(result.records[i].lr <= result.records[i - 1].lr);
  }
}

TEST_CASE("divergence aborts and retains the last good checkpoint") {
  const auto cfg = tiny_cfg(8);
  const auto items = tiny_items(3, cfg, 54);
  TrainConfig tc;
  tc.epochs = 50;
  tc.batch_size = 3;
  tc.max_iters = 40;
  tc.seed = 1;
  AdamConfig ac;
  ac.lr = 1e200;  // guaranteed blow-up

  const auto dir = std::filesystem::temp_directory_path() / "lrt_diverge_test";
  std::filesystem::remove_all(dir);
  bool diverged = false;
  try {
    fit(items, init_parameters(cfg, 4), cfg, tc, ac, tiny_table(), dir.string());
  } catch (const Error& e) {
    diverged = true;
    CHECK(e.code() == LRT_E_NUMERICAL_DIVERGENCE);
  }
  CHECK(diverged);
  CHECK(std::filesystem::exists(dir / "last_good.lrtt"));
  const auto recovered = load_checkpoint((dir / "last_good.lrtt").string());
  for (const auto& [name, t] : recovered.tensors) {
    (void)name;
    CHECK(t.all_finite());
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("200 iterations on one utterance halve the loss (3-seed median)") {
  std::vector<double> drops;
  for (uint64_t seed : {10ULL, 11ULL, 12ULL}) {
    auto cfg = tiny_cfg(8);
    cfg.decoder_dropout = 0.0;
    cfg.attention_dropout = 0.0;
    const auto items = tiny_items(1, cfg, 90 + seed);
    auto params = init_parameters(cfg, seed);
    auto state = init_optimizer_state(params);
    AdamConfig adam;
    adam.lr = 2e-3;
    adam.weight_decay = 0.0;

    double first = 0.0, last = 0.0;
    for (int iter = 1; iter <= 200; ++iter) {
      auto [res, grads] = backward(items[0].symbols, items[0].mel, params, cfg, {});
      clip_gradients(grads, 1.0);
      adam_step(params, grads, state, adam);
      if (iter == 1) first = res.loss.total;
      last = res.loss.total;
    }
    drops.push_back((first - last) / first);
  }
  std::sort(drops.begin(), drops.end());
  CHECK(drops[1] >= 0.50);
}

TEST_CASE("loss log CSV round trips") {
  std::vector<LossRecord> records;
  for (int i = 1; i <= 7; ++i) {
    LossRecord r;
    r.iteration = static_cast<uint64_t>(i);
    r.train_loss = 1.0 / i;
    r.lr = 1e-3;
    if (i % 3 == 0) {
      r.has_val = true;
      r.val_loss = 2.0 / i;
    }
    records.push_back(r);
  }
  const auto parsed = parse_loss_log(format_loss_log(records));
  REQUIRE(parsed.size() == records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    CHECK(parsed[i].iteration == records[i].iteration);
    CHECK(parsed[i].train_loss == records[i].train_loss);
    CHECK(parsed[i].has_val == records[i].has_val);
    if (records[i].has_val) CHECK(parsed[i].val_loss == records[i].val_loss);
    CHECK(parsed[i].lr == records[i].lr);
  }
}

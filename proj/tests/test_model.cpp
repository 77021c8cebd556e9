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
#include <vector>

#include "error.hpp"
#include "model.hpp"
#include "rng.hpp"

using namespace lrt;

namespace {

ModelConfig toy_cfg() {
  ModelConfig c;
  c.vocab_size = 5;
  c.embed_dim = 6;
  c.encoder_conv_layers = 2;
  c.encoder_kernel = 3;
  c.encoder_rnn_dim = 4;
  c.attention_dim = 5;
  c.location_filters = 3;
  c.location_kernel = 5;
  c.decoder_rnn_dim = 7;
  c.prenet_dim = 4;
  c.n_mels = 8;
  c.postnet_layers = 3;
  c.postnet_kernel = 3;
  c.decoder_dropout = 0.0;
  c.attention_dropout = 0.0;
  c.max_decoder_steps = 50;
  return c;
}

SymbolSequence seq(std::initializer_list<uint32_t> ids) {
  SymbolSequence s;
  s.ids = ids;
  return s;
}

Tensor random_mel(std::size_t frames, std::size_t mels, uint64_t seed) {
  Rng rng(seed);
  Tensor t({frames, mels});
  for (auto& v : t.data) v = rng.uniform(-1.0, 1.0);
  return t;
}

NamedTensors zero_params(const ModelConfig& cfg) {
  NamedTensors p;
  for (const auto& [name, shape] : parameter_manifest(cfg)) p.emplace(name, Tensor(shape));
  return p;
}

// ---------------------------------------------------------------------------
// Straight-line re-implementation of the full network in plain loops, used as
// an independent oracle for the loss value. Written against the layer
// conventions only (gate order i,f,g,o; zero-padded convs; teacher forcing
// with the previous target frame).
// ---------------------------------------------------------------------------

using Vec = std::vector<double>;
using Mat = std::vector<Vec>;

Vec sl_matvec(const Tensor& w, const Vec& x) {
  Vec y(w.rows(), 0.0);
  for (std::size_t r = 0; r < w.rows(); ++r) {
    for (std::size_t c = 0; c < w.cols(); ++c) y[r] += w.at(r, c) * x[c];
  }
  return y;
}

Vec sl_add(Vec a, const Vec& b) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
  return a;
}

Vec sl_tanh(Vec a) {
  for (auto& v : a) v = std::tanh(v);
  return a;
}


struct SlLstm {
  Vec h, c;
};

SlLstm sl_lstm(const Tensor& wi, const Tensor& wr, const Tensor& b, const Vec& x,
               const SlLstm& s) {
  const std::size_t hidden = s.h.size();
  Vec gates = sl_matvec(wi, x);
  gates = sl_add(std::move(gates), sl_matvec(wr, s.h));
  for (std::size_t i = 0; i < gates.size(); ++i) gates[i] += b.data[i];
  SlLstm out{Vec(hidden), Vec(hidden)};
  for (std::size_t i = 0; i < hidden; ++i) {
    const double ig = 1.0 / (1.0 + std::exp(-gates[i]));
    const double fg = 1.0 / (1.0 + std::exp(-gates[hidden + i]));
    const double z = std::tanh(gates[2 * hidden + i]);
    const double og = 1.0 / (1.0 + std::exp(-gates[3 * hidden + i]));
    out.c[i] = fg * s.c[i] + ig * z;
    out.h[i] = og * std::tanh(out.c[i]);
  }
  return out;
}

// [T,Cin] * [Cout,Cin,K] zero-padded same conv.
Mat sl_conv(const Mat& x, const Tensor& k, const Tensor* bias) {
  const std::size_t t_len = x.size();
  const std::size_t c_in = x[0].size();
  const std::size_t c_out = k.shape[0];
  const std::size_t k_len = k.shape[2];
  const long long pad = static_cast<long long>(k_len) / 2;
  Mat y(t_len, Vec(c_out, 0.0));
  for (std::size_t t = 0; t < t_len; ++t) {
    for (std::size_t o = 0; o < c_out; ++o) {
      double acc = bias ? bias->data[o] : 0.0;
      for (std::size_t kk = 0; kk < k_len; ++kk) {
        const long long s = static_cast<long long>(t) + static_cast<long long>(kk) - pad;
        if (s < 0 || s >= static_cast<long long>(t_len)) continue;
        for (std::size_t c = 0; c < c_in; ++c) {
          acc += k.data[(o * c_in + c) * k_len + kk] * x[static_cast<std::size_t>(s)][c];
        }
      }
      y[t][o] = acc;
    }
  }
  return y;
}

LossBreakdown straight_line_loss(const SymbolSequence& symbols, const Tensor& target,
                                 const NamedTensors& p, const ModelConfig& cfg) {
  const auto& P = [&p](const std::string& n) -> const Tensor& { return p.at(n); };

  // Encoder.
  Mat x(symbols.ids.size(), Vec(cfg.embed_dim));
  for (std::size_t t = 0; t < symbols.ids.size(); ++t) {
    for (std::size_t c = 0; c < cfg.embed_dim; ++c) {
      x[t][c] = P("embedding.weight").at(symbols.ids[t], c);
    }
  }
  for (std::size_t layer = 0; layer < cfg.encoder_conv_layers; ++layer) {
    const std::string base = "encoder.conv" + std::to_string(layer);
    x = sl_conv(x, P(base + ".kernel"), &P(base + ".bias"));
    for (auto& rowv : x) rowv = sl_tanh(std::move(rowv));
  }
  const std::size_t t_enc = x.size();
  Mat memory(t_enc, Vec(cfg.memory_dim()));
  {
    SlLstm s{Vec(cfg.encoder_rnn_dim, 0.0), Vec(cfg.encoder_rnn_dim, 0.0)};
    for (std::size_t t = 0; t < t_enc; ++t) {
      s = sl_lstm(P("encoder.rnn.fw.input_weight"), P("encoder.rnn.fw.recurrent_weight"),
                  P("encoder.rnn.fw.bias"), x[t], s);
      for (std::size_t i = 0; i < cfg.encoder_rnn_dim; ++i) memory[t][i] = s.h[i];
    }
    s = SlLstm{Vec(cfg.encoder_rnn_dim, 0.0), Vec(cfg.encoder_rnn_dim, 0.0)};
    for (std::size_t t = t_enc; t-- > 0;) {
      s = sl_lstm(P("encoder.rnn.bw.input_weight"), P("encoder.rnn.bw.recurrent_weight"),
                  P("encoder.rnn.bw.bias"), x[t], s);
      for (std::size_t i = 0; i < cfg.encoder_rnn_dim; ++i) {
        memory[t][cfg.encoder_rnn_dim + i] = s.h[i];
      }
    }
  }

  // Decoder with teacher forcing.
  SlLstm attn{Vec(cfg.decoder_rnn_dim, 0.0), Vec(cfg.decoder_rnn_dim, 0.0)};
  SlLstm dec{Vec(cfg.decoder_rnn_dim, 0.0), Vec(cfg.decoder_rnn_dim, 0.0)};
  Vec context(cfg.memory_dim(), 0.0);
  Vec prev_w(t_enc, 0.0), cum_w(t_enc, 0.0);

  const std::size_t frames = target.rows();
  Mat mel_before(frames, Vec(cfg.n_mels));
  Vec gate_logits(frames);

  for (std::size_t t = 0; t < frames; ++t) {
    Vec prev(cfg.n_mels, 0.0);
    if (t > 0) {
      for (std::size_t m = 0; m < cfg.n_mels; ++m) prev[m] = target.at(t - 1, m);
    }
    Vec pn = sl_tanh(sl_add(sl_matvec(P("decoder.prenet.fc0.weight"), prev),
                            P("decoder.prenet.fc0.bias").data));
    pn = sl_tanh(sl_add(sl_matvec(P("decoder.prenet.fc1.weight"), pn),
                        P("decoder.prenet.fc1.bias").data));

    Vec attn_in = pn;
    attn_in.insert(attn_in.end(), context.begin(), context.end());
    attn = sl_lstm(P("decoder.attn_rnn.input_weight"), P("decoder.attn_rnn.recurrent_weight"),
                   P("decoder.attn_rnn.bias"), attn_in, attn);

    // Location features over [prev; cum].
    Mat loc_in(t_enc, Vec(2));
    for (std::size_t i = 0; i < t_enc; ++i) {
      loc_in[i][0] = prev_w[i];
      loc_in[i][1] = cum_w[i];
    }
    const Mat loc = sl_conv(loc_in, P("attention.location.filters"), nullptr);

    const Vec q = sl_add(sl_matvec(P("attention.query.weight"), attn.h),
                         P("attention.energy.bias").data);
    Vec energies(t_enc);
    for (std::size_t i = 0; i < t_enc; ++i) {
      Vec s = sl_matvec(P("attention.memory.weight"), memory[i]);
      s = sl_add(std::move(s), sl_matvec(P("attention.location.proj"), loc[i]));
      s = sl_add(std::move(s), q);
      double e = 0.0;
      for (std::size_t d = 0; d < s.size(); ++d) {
        e += P("attention.energy.v").data[d] * std::tanh(s[d]);
      }
      energies[i] = e;
    }
    double max_e = energies[0];
    for (double e : energies) max_e = std::max(max_e, e);
    double denom = 0.0;
    Vec w(t_enc);
    for (std::size_t i = 0; i < t_enc; ++i) {
      w[i] = std::exp(energies[i] - max_e);
      denom += w[i];
    }
    for (auto& v : w) v /= denom;

    context.assign(cfg.memory_dim(), 0.0);
    for (std::size_t i = 0; i < t_enc; ++i) {
      for (std::size_t d = 0; d < cfg.memory_dim(); ++d) context[d] += w[i] * memory[i][d];
    }
    for (std::size_t i = 0; i < t_enc; ++i) cum_w[i] += w[i];
    prev_w = w;

    Vec dec_in = attn.h;
    dec_in.insert(dec_in.end(), context.begin(), context.end());
    dec = sl_lstm(P("decoder.rnn.input_weight"), P("decoder.rnn.recurrent_weight"),
                  P("decoder.rnn.bias"), dec_in, dec);

    Vec proj_in = dec.h;
    proj_in.insert(proj_in.end(), context.begin(), context.end());
    mel_before[t] = sl_add(sl_matvec(P("decoder.mel.weight"), proj_in),
                           P("decoder.mel.bias").data);
    gate_logits[t] = sl_matvec(P("decoder.gate.weight"), proj_in)[0] +
                     P("decoder.gate.bias").data[0];
  }

  // Postnet.
  Mat post = mel_before;
  for (std::size_t layer = 0; layer < cfg.postnet_layers; ++layer) {
    const std::string base = "postnet.conv" + std::to_string(layer);
    post = sl_conv(post, P(base + ".kernel"), &P(base + ".bias"));
    if (layer + 1 < cfg.postnet_layers) {
      for (auto& rowv : post) rowv = sl_tanh(std::move(rowv));
    }
  }

  LossBreakdown loss;
  const double n_el = static_cast<double>(frames * cfg.n_mels);
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t m = 0; m < cfg.n_mels; ++m) {
      const double before = mel_before[t][m];
      const double after = before + post[t][m];
      loss.mse_before += (before - target.at(t, m)) * (before - target.at(t, m)) / n_el;
      loss.mse_after += (after - target.at(t, m)) * (after - target.at(t, m)) / n_el;
    }
  }
  for (std::size_t t = 0; t < frames; ++t) {
    const double z = gate_logits[t];
    const double tgt = t + 1 == frames ? 1.0 : 0.0;
    loss.gate_bce +=
        (std::max(z, 0.0) - z * tgt + std::log1p(std::exp(-std::abs(z)))) /
        static_cast<double>(frames);
  }
  loss.total = loss.mse_before + loss.mse_after + loss.gate_bce;
  return loss;
}

}  // namespace

TEST_CASE("encode produces one memory row per symbol") {
  const auto cfg = toy_cfg();
  const auto params = init_parameters(cfg, 7);
  const auto mem = encode(seq({1, 2, 3, 4, 0, 1, 2}), params, cfg, false);
  CHECK(mem.rows() == 7);
  CHECK(mem.cols() == cfg.memory_dim());
}

TEST_CASE("encode is deterministic with train_mode off") {
  const auto cfg = toy_cfg();
  const auto params = init_parameters(cfg, 8);
  const auto a = encode(seq({1, 2, 3}), params, cfg, false);
  const auto b = encode(seq({1, 2, 3}), params, cfg, false);
  CHECK(a.data == b.data);
}

TEST_CASE("encode with zero parameters is all zeros") {
  const auto cfg = toy_cfg();
  const auto mem = encode(seq({1, 2}), zero_params(cfg), cfg, false);
  for (double v : mem.data) CHECK(v == 0.0);
}

TEST_CASE("encode rejects out-of-range ids") {
  const auto cfg = toy_cfg();
  const auto params = init_parameters(cfg, 9);
  try {
    encode(seq({1, 99}), params, cfg, false);
    FAIL("expected UnknownSymbol");
  } catch (const Error& e) {
    CHECK(e.code() == LRT_E_UNKNOWN_SYMBOL);
  }
}

TEST_CASE("attention over a single encoder step is the identity") {
  const auto cfg = toy_cfg();
  const auto params = init_parameters(cfg, 10);
  Tensor memory({1, cfg.memory_dim()});
  Rng rng(4);
  for (auto& v : memory.data) v = rng.uniform(-1.0, 1.0);

  AttentionState state;
  state.prev_weights = {1.0};
  state.cum_weights = {1.0};
  const std::vector<double> query(cfg.decoder_rnn_dim, 0.3);
  const auto [context, weights] = attention_step(query, memory, state, params, cfg);
  REQUIRE(weights.size() == 1);
  CHECK(weights[0] == 1.0);
  for (std::size_t d = 0; d < context.size(); ++d) {
    CHECK(context[d] == doctest::Approx(memory.at(0, d)).epsilon(1e-12));
  }
}

TEST_CASE("zeroed projections give uniform attention") {
  const auto cfg = toy_cfg();
  const auto params = zero_params(cfg);
  Tensor memory({4, cfg.memory_dim()});
  Rng rng(5);
  for (auto& v : memory.data) v = rng.uniform(-1.0, 1.0);

  AttentionState state;
  state.prev_weights = {0.25, 0.25, 0.25, 0.25};
  state.cum_weights = {1.0, 1.0, 1.0, 1.0};
  const std::vector<double> query(cfg.decoder_rnn_dim, 0.5);
  const auto [context, weights] = attention_step(query, memory, state, params, cfg);
  for (double w : weights) CHECK(w == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("attention matches an independent evaluation of the energy formula") {
  const auto cfg = toy_cfg();
  const auto params = init_parameters(cfg, 11);
  const std::size_t n = 5;
  Tensor memory({n, cfg.memory_dim()});
  Rng rng(6);
  for (auto& v : memory.data) v = rng.uniform(-1.0, 1.0);

  AttentionState state;
  state.prev_weights = {0.1, 0.2, 0.3, 0.25, 0.15};
  state.cum_weights = {0.6, 0.9, 1.2, 0.8, 0.5};
  std::vector<double> query(cfg.decoder_rnn_dim);
  for (auto& v : query) v = rng.uniform(-1.0, 1.0);

  const auto [context, weights] = attention_step(query, memory, state, params, cfg);

  // Straight-line oracle.
  Mat loc_in(n, Vec(2));
  for (std::size_t i = 0; i < n; ++i) {
    loc_in[i][0] = state.prev_weights[i];
    loc_in[i][1] = state.cum_weights[i];
  }
  const Mat loc = sl_conv(loc_in, params.at("attention.location.filters"), nullptr);
  const Vec q = sl_add(sl_matvec(params.at("attention.query.weight"), query),
                       params.at("attention.energy.bias").data);
  Vec energies(n);
  for (std::size_t i = 0; i < n; ++i) {
    Vec mem_row(cfg.memory_dim());
    for (std::size_t d = 0; d < cfg.memory_dim(); ++d) mem_row[d] = memory.at(i, d);
    Vec s = sl_matvec(params.at("attention.memory.weight"), mem_row);
    s = sl_add(std::move(s), sl_matvec(params.at("attention.location.proj"), loc[i]));
    s = sl_add(std::move(s), q);
    double e = 0.0;
    for (std::size_t d = 0; d < s.size(); ++d) {
      e += params.at("attention.energy.v").data[d] * std::tanh(s[d]);
    }
    energies[i] = e;
  }
  double max_e = energies[0];
  for (double e : energies) max_e = std::max(max_e, e);
  double denom = 0.0;
  Vec expect(n);
  for (std::size_t i = 0; i < n; ++i) {
    expect[i] = std::exp(energies[i] - max_e);
    denom += expect[i];
  }
  for (std::size_t i = 0; i < n; ++i) {
    CHECK(std::abs(weights[i] - expect[i] / denom) <= 1e-10);
  }
}

TEST_CASE("attention state length mismatch raises StateMismatch") {
  const auto cfg = toy_cfg();
  const auto params = init_parameters(cfg, 12);
  Tensor memory({3, cfg.memory_dim()});
  AttentionState state;
  state.prev_weights = {0.5, 0.5};  // wrong length
  state.cum_weights = {0.5, 0.5};
  const std::vector<double> query(cfg.decoder_rnn_dim, 0.0);
  try {
    attention_step(query, memory, state, params, cfg);
    FAIL("expected StateMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == LRT_E_STATE_MISMATCH);
  }
}

TEST_CASE("teacher-forced loss matches the straight-line oracle") {
  const auto cfg = toy_cfg();
  const auto params = init_parameters(cfg, 13);
  const auto symbols = seq({1, 2, 3});
  const auto target = random_mel(4, cfg.n_mels, 31);

  const auto result = forward_teacher_forced(symbols, target, params, cfg, {});
  const auto oracle = straight_line_loss(symbols, target, params, cfg);

  CHECK(std::abs(result.loss.mse_before - oracle.mse_before) <= 1e-8);
  CHECK(std::abs(result.loss.mse_after - oracle.mse_after) <= 1e-8);
  CHECK(std::abs(result.loss.gate_bce - oracle.gate_bce) <= 1e-8);
  CHECK(std::abs(result.loss.total - oracle.total) <= 1e-8);
  CHECK(result.loss.total ==
        doctest::Approx(result.loss.mse_before + result.loss.mse_after + result.loss.gate_bce));
}

TEST_CASE("alignment rows are probability vectors at every decoder step") {
  const auto cfg = toy_cfg();
  const auto params = init_parameters(cfg, 14);
  const auto target = random_mel(6, cfg.n_mels, 32);
  const auto result = forward_teacher_forced(seq({1, 2, 3, 4}), target, params, cfg, {});

  REQUIRE(result.output.alignment.rows() == 6);
  double cum_total = 0.0;
  for (std::size_t t = 0; t < result.output.alignment.rows(); ++t) {
    double row_sum = 0.0;
    for (std::size_t i = 0; i < result.output.alignment.cols(); ++i) {
      CHECK(result.output.alignment.at(t, i) >= 0.0);
      row_sum += result.output.alignment.at(t, i);
    }
    CHECK(std::abs(row_sum - 1.0) <= 1e-6);
    cum_total += row_sum;
  }
  // Cumulative attention after T steps carries total mass T.
  CHECK(std::abs(cum_total - 6.0) <= 1e-5);
}

TEST_CASE("self-consistent targets give zero mse terms and zero mse gradients") {
  auto cfg = toy_cfg();
  auto params = init_parameters(cfg, 15);
  // Zero prenet and postnet: the decoder trajectory no longer depends on the
  // teacher-forced inputs, so predictions can be replayed as targets.
  for (auto& [name, t] : params) {
    if (name.find("prenet") != std::string::npos || name.find("postnet") != std::string::npos) {
      std::fill(t.data.begin(), t.data.end(), 0.0);
    }
  }
  const auto symbols = seq({1, 2, 3});
  const auto first = forward_teacher_forced(symbols, random_mel(4, cfg.n_mels, 33), params, cfg, {});
  const auto result = forward_teacher_forced(symbols, first.output.mel_before, params, cfg, {});
  CHECK(result.loss.mse_before <= 1e-22);
  CHECK(result.loss.mse_after <= 1e-22);
  CHECK(result.loss.gate_bce > 0.0);

  const auto [res2, grads] = backward(symbols, first.output.mel_before, params, cfg, {});
  CHECK(res2.loss.mse_before <= 1e-22);
  // Tensors reached only through the mse terms get exactly zero gradients.
  for (const auto& [name, g] : grads) {
    if (name.find("postnet") != std::string::npos ||
        name.find("decoder.mel.") != std::string::npos) {
      for (double v : g.data) CHECK(v == 0.0);
    }
  }
  // The gate path still trains.
  double gate_norm = 0.0;
  for (double v : grads.at("decoder.gate.weight").data) gate_norm += std::abs(v);
  CHECK(gate_norm > 0.0);
}

TEST_CASE("backward returns a gradient for every parameter with matching shape") {
  const auto cfg = toy_cfg();
  const auto params = init_parameters(cfg, 16);
  const auto [result, grads] = backward(seq({1, 2, 3}), random_mel(4, cfg.n_mels, 34),
                                        params, cfg, {});
  (void)result;
  REQUIRE(grads.size() == params.size());
  for (const auto& [name, t] : params) {
    REQUIRE(grads.count(name) == 1);
    CHECK(grads.at(name).shape == t.shape);
  }
}

TEST_CASE("backward matches central finite differences on sampled coordinates") {
  const auto cfg = toy_cfg();
  auto params = init_parameters(cfg, 17);
  const auto symbols = seq({1, 2, 3});
  const auto target = random_mel(4, cfg.n_mels, 35);

  const auto [result, grads] = backward(symbols, target, params, cfg, {});
  (void)result;

  Rng pick(99);
  const double h = 1e-4;
  for (const auto& [name, t] : params) {
    for (int k = 0; k < 4; ++k) {
      const std::size_t i = pick.next_below(t.numel());
      auto eval = [&](double delta) {
        NamedTensors p2 = params;
        p2.at(name).data[i] += delta;
        return forward_teacher_forced(symbols, target, p2, cfg, {}).loss.total;
      };
      const double fd = (eval(h) - eval(-h)) / (2.0 * h);
      const double an = grads.at(name).data[i];
      CHECK(std::abs(fd - an) <= 1e-4 * std::max({1e-3, std::abs(fd), std::abs(an)}));
    }
  }
}

TEST_CASE("teacher-forced forward is deterministic given a dropout seed") {
  auto cfg = toy_cfg();
  cfg.decoder_dropout = 0.3;
  cfg.attention_dropout = 0.3;
  const auto params = init_parameters(cfg, 18);
  const auto target = random_mel(5, cfg.n_mels, 36);
  ForwardOptions opt;
  opt.train_mode = true;
  opt.dropout_seed = 1234;
  const auto a = forward_teacher_forced(seq({1, 2}), target, params, cfg, opt);
  const auto b = forward_teacher_forced(seq({1, 2}), target, params, cfg, opt);
  CHECK(a.loss.total == b.loss.total);
  CHECK(a.output.mel_after.data == b.output.mel_after.data);
}

TEST_CASE("a strongly positive gate bias stops inference after one frame") {
  const auto cfg = toy_cfg();
  auto params = zero_params(cfg);
  params.at("decoder.gate.bias").data[0] = 10.0;
  const auto out = infer(seq({1, 2, 3}), params, cfg, 0);
  CHECK(out.mel_before.rows() == 1);
  CHECK(out.stop_reason == StopReason::kGateFired);
}

TEST_CASE("a strongly negative gate bias runs to max_decoder_steps") {
  auto cfg = toy_cfg();
  cfg.max_decoder_steps = 12;
  auto params = zero_params(cfg);
  params.at("decoder.gate.bias").data[0] = -10.0;
  const auto out = infer(seq({1, 2, 3}), params, cfg, 0);
  CHECK(out.mel_before.rows() == 12);
  CHECK(out.stop_reason == StopReason::kMaxSteps);
}

TEST_CASE("gate comparison at the threshold is inclusive") {
  auto cfg = toy_cfg();
  auto params = zero_params(cfg);
  const double bias = std::log(0.4 / 0.6);
  params.at("decoder.gate.bias").data[0] = bias;
  // Pin the threshold to the exactly realized probability so prob == thr.
  cfg.gate_threshold = 1.0 / (1.0 + std::exp(-bias));
  const auto out = infer(seq({1, 2}), params, cfg, 0);
  CHECK(out.mel_before.rows() == 1);
  CHECK(out.stop_reason == StopReason::kGateFired);
}

TEST_CASE("inference is deterministic for a fixed dropout seed") {
  auto cfg = toy_cfg();
  cfg.decoder_dropout = 0.4;  // prenet dropout stays active at inference
  cfg.max_decoder_steps = 8;
  const auto params = init_parameters(cfg, 19);
  const auto a = infer(seq({1, 2, 3}), params, cfg, 7);
  const auto b = infer(seq({1, 2, 3}), params, cfg, 7);
  CHECK(a.mel_after.data == b.mel_after.data);
  CHECK(a.gate_logits == b.gate_logits);
  CHECK(a.mel_after.data == a.mel_after.data);
}

TEST_CASE("mel_after equals mel_before plus the postnet residual") {
  const auto cfg = toy_cfg();
  const auto params = init_parameters(cfg, 20);
  const auto result = forward_teacher_forced(seq({1, 2, 3}), random_mel(4, cfg.n_mels, 37),
                                             params, cfg, {});
  // With a nonzero postnet the two surfaces differ.
  bool differs = false;
  for (std::size_t i = 0; i < result.output.mel_before.numel(); ++i) {
    if (result.output.mel_before.data[i] != result.output.mel_after.data[i]) differs = true;
  }
  CHECK(differs);
}

TEST_CASE("missing tensors are reported by name") {
  const auto cfg = toy_cfg();
  auto params = init_parameters(cfg, 21);
  params.erase("decoder.gate.weight");
  try {
    validate_parameters(params, cfg);
    FAIL("expected MissingTensor");
  } catch (const Error& e) {
    CHECK(e.code() == LRT_E_MISSING_TENSOR);
    CHECK(std::string(e.what()).find("decoder.gate.weight") != std::string::npos);
  }
}

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

#include "model.hpp"

#include <cmath>
#include <map>

#include "autograd.hpp"
#include "error.hpp"
#include "rng.hpp"

namespace lrt {
namespace {

using ag::Graph;
using ag::kNoVar;
using ag::VarId;

double quantize_f32(double v) { return static_cast<double>(static_cast<float>(v)); }

void xavier_fill(Tensor& t, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (auto& v : t.data) v = quantize_f32(rng.uniform(-limit, limit));
}

struct Net {
  Graph g;
  std::map<std::string, VarId> p;
  const ModelConfig* cfg = nullptr;
  Rng rng{0};
  bool train_mode = false;

  VarId operator[](const std::string& name) const { return p.at(name); }
};

void load_params(Net& net, const NamedTensors& params, bool requires_grad) {
  for (const auto& [name, tensor] : params) {
    net.p[name] = net.g.leaf(tensor, requires_grad);
  }
}

// Inverted dropout with a deterministic stream. No-op when the probability
// is zero or dropout is disabled for this site.
VarId dropout(Net& net, VarId x, double prob, bool active) {
  if (!active || prob <= 0.0) return x;
  Tensor mask(net.g.value(x).shape);
  const double keep = 1.0 - prob;
  for (auto& v : mask.data) v = net.rng.next_double() < keep ? 1.0 / keep : 0.0;
  return net.g.mul_const(x, std::move(mask));
}

struct LstmState {
  VarId h = kNoVar;
  VarId c = kNoVar;
};

// Gate layout in the packed weights: [input; forget; cell; output].
LstmState lstm_cell(Graph& g, VarId w_in, VarId w_rec, VarId bias, VarId x,
                    const LstmState& s, std::size_t hidden) {
  const VarId gates = g.add(g.linear(w_in, x, bias), g.matvec(w_rec, s.h));
  const VarId i = g.sigmoid_op(g.slice(gates, 0, hidden));
  const VarId f = g.sigmoid_op(g.slice(gates, hidden, hidden));
  const VarId z = g.tanh_op(g.slice(gates, 2 * hidden, hidden));
  const VarId o = g.sigmoid_op(g.slice(gates, 3 * hidden, hidden));
  LstmState out;
  out.c = g.add(g.mul(f, s.c), g.mul(i, z));
  out.h = g.mul(o, g.tanh_op(out.c));
  return out;
}

VarId zeros_var(Graph& g, std::vector<std::size_t> shape) {
  return g.constant(Tensor(std::move(shape)));
}

VarId encode_impl(Net& net, const std::vector<uint32_t>& ids) {
  Graph& g = net.g;
  const ModelConfig& cfg = *net.cfg;
  for (uint32_t id : ids) {
    require(id < cfg.vocab_size, LRT_E_UNKNOWN_SYMBOL,
            "symbol id " + std::to_string(id) + " >= vocab size " +
                std::to_string(cfg.vocab_size));
  }

  VarId x = g.embedding_rows(net["embedding.weight"], ids);  // [T, E]
  for (std::size_t layer = 0; layer < cfg.encoder_conv_layers; ++layer) {
    const std::string base = "encoder.conv" + std::to_string(layer);
    x = g.conv1d_same(x, net[base + ".kernel"], net[base + ".bias"]);
    x = g.tanh_op(x);
    x = dropout(net, x, cfg.decoder_dropout, net.train_mode);
  }

  const std::size_t t_len = ids.size();
  const std::size_t hidden = cfg.encoder_rnn_dim;

  std::vector<VarId> fw(t_len), bw(t_len);
  {
    LstmState s{zeros_var(g, {hidden}), zeros_var(g, {hidden})};
    for (std::size_t t = 0; t < t_len; ++t) {
      s = lstm_cell(g, net["encoder.rnn.fw.input_weight"], net["encoder.rnn.fw.recurrent_weight"],
                    net["encoder.rnn.fw.bias"], g.row(x, t), s, hidden);
      fw[t] = s.h;
    }
  }
  {
    LstmState s{zeros_var(g, {hidden}), zeros_var(g, {hidden})};
    for (std::size_t t = t_len; t-- > 0;) {
      s = lstm_cell(g, net["encoder.rnn.bw.input_weight"], net["encoder.rnn.bw.recurrent_weight"],
                    net["encoder.rnn.bw.bias"], g.row(x, t), s, hidden);
      bw[t] = s.h;
    }
  }

  std::vector<VarId> rows(t_len);
  for (std::size_t t = 0; t < t_len; ++t) rows[t] = g.concat(fw[t], bw[t]);
  return g.stack_rows(rows);  // [T, memory_dim]
}

struct AttentionVars {
  VarId weights = kNoVar;  // [T_enc]
  VarId context = kNoVar;  // [memory_dim]
};

// One attention evaluation over precomputed V*memory.
AttentionVars attention_impl(Net& net, VarId query, VarId memory, VarId processed_memory,
                             VarId prev_weights, VarId cum_weights) {
  Graph& g = net.g;
  const VarId loc_input = g.stack_cols2(prev_weights, cum_weights);  // [T, 2]
  const VarId loc_feats =
      g.conv1d_same(loc_input, net["attention.location.filters"], kNoVar);  // [T, F]
  const VarId loc_proj = g.linear_rows(loc_feats, net["attention.location.proj"], kNoVar);

  const VarId query_proj =
      g.add(g.matvec(net["attention.query.weight"], query), net["attention.energy.bias"]);
  VarId s = g.add(processed_memory, loc_proj);
  s = g.add_row_broadcast(s, query_proj);
  s = g.tanh_op(s);
  const VarId energies = g.matvec(s, net["attention.energy.v"]);  // [T]

  AttentionVars out;
  out.weights = g.softmax_vec(energies);
  out.context = g.weighted_sum_rows(memory, out.weights);
  return out;
}

struct DecoderLoop {
  Net* net = nullptr;
  VarId memory = kNoVar;
  VarId processed_memory = kNoVar;
  std::size_t t_enc = 0;

  LstmState attn_rnn;
  LstmState dec_rnn;
  VarId context = kNoVar;
  VarId prev_weights = kNoVar;
  VarId cum_weights = kNoVar;

  std::vector<VarId> mel_frames;
  std::vector<VarId> gate_logits;
  std::vector<VarId> alignments;

  void init(Net& n, VarId mem) {
    net = &n;
    memory = mem;
    t_enc = n.g.value(mem).rows();
    processed_memory = n.g.linear_rows(memory, n["attention.memory.weight"], kNoVar);
    const std::size_t dec = n.cfg->decoder_rnn_dim;
    attn_rnn = {zeros_var(n.g, {dec}), zeros_var(n.g, {dec})};
    dec_rnn = {zeros_var(n.g, {dec}), zeros_var(n.g, {dec})};
    context = zeros_var(n.g, {n.cfg->memory_dim()});
    prev_weights = zeros_var(n.g, {t_enc});
    cum_weights = zeros_var(n.g, {t_enc});
  }

  // Consumes the previous mel frame, emits (mel frame, gate logit).
  void step(VarId prev_frame) {
    Net& n = *net;
    Graph& g = n.g;
    const ModelConfig& cfg = *n.cfg;

    // Prenet; its dropout stays active at inference as well.
    VarId x = g.tanh_op(g.linear(n["decoder.prenet.fc0.weight"], prev_frame,
                                 n["decoder.prenet.fc0.bias"]));
    x = dropout(n, x, cfg.decoder_dropout, true);
    x = g.tanh_op(g.linear(n["decoder.prenet.fc1.weight"], x, n["decoder.prenet.fc1.bias"]));
    x = dropout(n, x, cfg.decoder_dropout, true);

    VarId attn_in = g.concat(x, context);
    attn_in = dropout(n, attn_in, cfg.attention_dropout, n.train_mode);
    attn_rnn = lstm_cell(g, n["decoder.attn_rnn.input_weight"],
                         n["decoder.attn_rnn.recurrent_weight"], n["decoder.attn_rnn.bias"],
                         attn_in, attn_rnn, cfg.decoder_rnn_dim);

    const AttentionVars att =
        attention_impl(n, attn_rnn.h, memory, processed_memory, prev_weights, cum_weights);
    cum_weights = g.add(cum_weights, att.weights);
    prev_weights = att.weights;
    context = att.context;

    VarId dec_in = g.concat(attn_rnn.h, context);
    dec_in = dropout(n, dec_in, cfg.decoder_dropout, n.train_mode);
    dec_rnn = lstm_cell(g, n["decoder.rnn.input_weight"], n["decoder.rnn.recurrent_weight"],
                        n["decoder.rnn.bias"], dec_in, dec_rnn, cfg.decoder_rnn_dim);

    const VarId proj_in = g.concat(dec_rnn.h, context);
    mel_frames.push_back(
        g.linear(n["decoder.mel.weight"], proj_in, n["decoder.mel.bias"]));
    gate_logits.push_back(
        g.linear(n["decoder.gate.weight"], proj_in, n["decoder.gate.bias"]));
    alignments.push_back(att.weights);
  }

  VarId postnet(VarId mel_before) {
    Net& n = *net;
    Graph& g = n.g;
    const ModelConfig& cfg = *n.cfg;
    VarId x = mel_before;
    for (std::size_t layer = 0; layer < cfg.postnet_layers; ++layer) {
      const std::string base = "postnet.conv" + std::to_string(layer);
      x = g.conv1d_same(x, n[base + ".kernel"], n[base + ".bias"]);
      if (layer + 1 < cfg.postnet_layers) {
        x = g.tanh_op(x);
        x = dropout(n, x, cfg.decoder_dropout, n.train_mode);
      }
    }
    return g.add(mel_before, x);
  }
};

DecoderOutput collect_output(Net& net, DecoderLoop& loop, VarId mel_before, VarId mel_after,
                             StopReason reason) {
  Graph& g = net.g;
  DecoderOutput out;
  out.mel_before = g.value(mel_before);
  out.mel_after = g.value(mel_after);
  out.stop_reason = reason;
  for (VarId v : loop.gate_logits) out.gate_logits.push_back(g.value(v).data[0]);
  out.alignment = Tensor({loop.alignments.size(), loop.t_enc});
  for (std::size_t t = 0; t < loop.alignments.size(); ++t) {
    const auto& w = g.value(loop.alignments[t]).data;
    for (std::size_t i = 0; i < loop.t_enc; ++i) out.alignment.at(t, i) = w[i];
  }
  return out;
}

struct TeacherVars {
  VarId total = kNoVar;
  VarId mse_before = kNoVar;
  VarId mse_after = kNoVar;
  VarId gate_bce = kNoVar;
  VarId mel_before = kNoVar;
  VarId mel_after = kNoVar;
};

TeacherVars teacher_impl(Net& net, DecoderLoop& loop, const std::vector<uint32_t>& ids,
                         const Tensor& target_mel) {
  Graph& g = net.g;
  const ModelConfig& cfg = *net.cfg;
  require(target_mel.rows() >= 1 && target_mel.cols() == cfg.n_mels, LRT_E_INVALID_ARGUMENT,
          "target mel must be [frames >= 1, n_mels]");

  loop.init(net, encode_impl(net, ids));

  const std::size_t n_frames = target_mel.rows();
  for (std::size_t t = 0; t < n_frames; ++t) {
    VarId prev;
    if (t == 0) {
      prev = zeros_var(g, {cfg.n_mels});
    } else {
      Tensor frame({cfg.n_mels});
      for (std::size_t m = 0; m < cfg.n_mels; ++m) frame.data[m] = target_mel.at(t - 1, m);
      prev = g.constant(std::move(frame));
    }
    loop.step(prev);
  }

  TeacherVars tv;
  tv.mel_before = g.stack_rows(loop.mel_frames);
  tv.mel_after = loop.postnet(tv.mel_before);

  tv.mse_before = g.mean_sq_err(tv.mel_before, target_mel);
  tv.mse_after = g.mean_sq_err(tv.mel_after, target_mel);

  std::vector<VarId> gate_rows = loop.gate_logits;
  const VarId gates = g.stack_rows(gate_rows);  // [T, 1]
  Tensor gate_target({n_frames, 1});
  gate_target.data[n_frames - 1] = 1.0;
  tv.gate_bce = g.bce_with_logits(gates, std::move(gate_target));

  tv.total = g.add(g.add(tv.mse_before, tv.mse_after), tv.gate_bce);
  return tv;
}

LossBreakdown extract_loss(Net& net, const TeacherVars& tv) {
  LossBreakdown loss;
  loss.mse_before = net.g.value(tv.mse_before).data[0];
  loss.mse_after = net.g.value(tv.mse_after).data[0];
  loss.gate_bce = net.g.value(tv.gate_bce).data[0];
  loss.total = net.g.value(tv.total).data[0];
  require(std::isfinite(loss.total), LRT_E_NUMERICAL_DIVERGENCE,
          "non-finite training loss");
  return loss;
}

}  // namespace

void validate_model_config(const ModelConfig& cfg) {
  require(cfg.vocab_size >= 2, LRT_E_CONFIG, "vocab_size must cover pad and EOS");
  require(cfg.gate_threshold > 0.0 && cfg.gate_threshold < 1.0, LRT_E_CONFIG,
          "gate_threshold must lie in (0, 1)");
  require(cfg.decoder_dropout >= 0.0 && cfg.decoder_dropout < 1.0 &&
              cfg.attention_dropout >= 0.0 && cfg.attention_dropout < 1.0,
          LRT_E_CONFIG, "dropout probabilities must lie in [0, 1)");
  require(cfg.embed_dim >= 1 && cfg.encoder_rnn_dim >= 1 && cfg.attention_dim >= 1 &&
              cfg.location_filters >= 1 && cfg.decoder_rnn_dim >= 1 && cfg.prenet_dim >= 1 &&
              cfg.n_mels >= 1 && cfg.encoder_conv_layers >= 1 && cfg.postnet_layers >= 1,
          LRT_E_CONFIG, "all model dimensions must be >= 1");
  require(cfg.encoder_kernel % 2 == 1 && cfg.location_kernel % 2 == 1 &&
              cfg.postnet_kernel % 2 == 1,
          LRT_E_CONFIG, "conv kernels must be odd for symmetric padding");
  require(cfg.max_decoder_steps >= 1, LRT_E_CONFIG, "max_decoder_steps must be >= 1");
}

std::vector<std::pair<std::string, std::vector<std::size_t>>> parameter_manifest(
    const ModelConfig& cfg) {
  std::vector<std::pair<std::string, std::vector<std::size_t>>> m;
  const std::size_t mem = cfg.memory_dim();
  const std::size_t dec = cfg.decoder_rnn_dim;

  m.emplace_back("embedding.weight", std::vector<std::size_t>{cfg.vocab_size, cfg.embed_dim});
  for (std::size_t i = 0; i < cfg.encoder_conv_layers; ++i) {
    const std::string base = "encoder.conv" + std::to_string(i);
    m.emplace_back(base + ".kernel",
                   std::vector<std::size_t>{cfg.embed_dim, cfg.embed_dim, cfg.encoder_kernel});
    m.emplace_back(base + ".bias", std::vector<std::size_t>{cfg.embed_dim});
  }
  for (const char* dir : {"fw", "bw"}) {
    const std::string base = std::string("encoder.rnn.") + dir;
    m.emplace_back(base + ".input_weight",
                   std::vector<std::size_t>{4 * cfg.encoder_rnn_dim, cfg.embed_dim});
    m.emplace_back(base + ".recurrent_weight",
                   std::vector<std::size_t>{4 * cfg.encoder_rnn_dim, cfg.encoder_rnn_dim});
    m.emplace_back(base + ".bias", std::vector<std::size_t>{4 * cfg.encoder_rnn_dim});
  }
  m.emplace_back("attention.query.weight", std::vector<std::size_t>{cfg.attention_dim, dec});
  m.emplace_back("attention.memory.weight", std::vector<std::size_t>{cfg.attention_dim, mem});
  m.emplace_back("attention.location.filters",
                 std::vector<std::size_t>{cfg.location_filters, 2, cfg.location_kernel});
  m.emplace_back("attention.location.proj",
                 std::vector<std::size_t>{cfg.attention_dim, cfg.location_filters});
  m.emplace_back("attention.energy.v", std::vector<std::size_t>{cfg.attention_dim});
  m.emplace_back("attention.energy.bias", std::vector<std::size_t>{cfg.attention_dim});

  m.emplace_back("decoder.prenet.fc0.weight", std::vector<std::size_t>{cfg.prenet_dim, cfg.n_mels});
  m.emplace_back("decoder.prenet.fc0.bias", std::vector<std::size_t>{cfg.prenet_dim});
  m.emplace_back("decoder.prenet.fc1.weight",
                 std::vector<std::size_t>{cfg.prenet_dim, cfg.prenet_dim});
  m.emplace_back("decoder.prenet.fc1.bias", std::vector<std::size_t>{cfg.prenet_dim});

  m.emplace_back("decoder.attn_rnn.input_weight",
                 std::vector<std::size_t>{4 * dec, cfg.prenet_dim + mem});
  m.emplace_back("decoder.attn_rnn.recurrent_weight", std::vector<std::size_t>{4 * dec, dec});
  m.emplace_back("decoder.attn_rnn.bias", std::vector<std::size_t>{4 * dec});
  m.emplace_back("decoder.rnn.input_weight", std::vector<std::size_t>{4 * dec, dec + mem});
  m.emplace_back("decoder.rnn.recurrent_weight", std::vector<std::size_t>{4 * dec, dec});
  m.emplace_back("decoder.rnn.bias", std::vector<std::size_t>{4 * dec});

  m.emplace_back("decoder.mel.weight", std::vector<std::size_t>{cfg.n_mels, dec + mem});
  m.emplace_back("decoder.mel.bias", std::vector<std::size_t>{cfg.n_mels});
  m.emplace_back("decoder.gate.weight", std::vector<std::size_t>{1, dec + mem});
  m.emplace_back("decoder.gate.bias", std::vector<std::size_t>{1});

  const std::size_t pch = cfg.postnet_channels();
  for (std::size_t i = 0; i < cfg.postnet_layers; ++i) {
    const std::string base = "postnet.conv" + std::to_string(i);
    const std::size_t cin = i == 0 ? cfg.n_mels : pch;
    const std::size_t cout = i + 1 == cfg.postnet_layers ? cfg.n_mels : pch;
    m.emplace_back(base + ".kernel", std::vector<std::size_t>{cout, cin, cfg.postnet_kernel});
    m.emplace_back(base + ".bias", std::vector<std::size_t>{cout});
  }
  return m;
}

NamedTensors init_parameters(const ModelConfig& cfg, uint64_t seed) {
  validate_model_config(cfg);
  Rng rng(seed);
  NamedTensors params;
  for (const auto& [name, shape] : parameter_manifest(cfg)) {
    Tensor t(shape);
    if (name == "embedding.weight") {
      for (auto& v : t.data) v = quantize_f32(rng.uniform(-0.1, 0.1));
    } else if (name.find(".bias") != std::string::npos) {
      // LSTM forget gates open slightly; everything else starts at zero.
      if (name.find("rnn") != std::string::npos && shape.size() == 1 && shape[0] % 4 == 0) {
        const std::size_t hidden = shape[0] / 4;
        for (std::size_t i = hidden; i < 2 * hidden; ++i) t.data[i] = 1.0;
      }
    } else if (shape.size() == 3) {
      xavier_fill(t, shape[1] * shape[2], shape[0] * shape[2], rng);
    } else if (shape.size() == 2) {
      xavier_fill(t, shape[1], shape[0], rng);
    } else {
      xavier_fill(t, shape[0], 1, rng);
    }
    params.emplace(name, std::move(t));
  }
  return params;
}

void validate_parameters(const NamedTensors& params, const ModelConfig& cfg) {
  for (const auto& [name, shape] : parameter_manifest(cfg)) {
    const auto it = params.find(name);
    require(it != params.end(), LRT_E_MISSING_TENSOR, "missing tensor " + name);
    require(it->second.shape == shape, LRT_E_INCOMPATIBLE_ARCHITECTURE,
            "tensor " + name + " has shape " + it->second.shape_str());
    require(it->second.all_finite(), LRT_E_NUMERICAL_DIVERGENCE,
            "tensor " + name + " contains non-finite values");
  }
}

Tensor encode(const SymbolSequence& symbols, const NamedTensors& params,
              const ModelConfig& cfg, bool train_mode, uint64_t dropout_seed) {
  validate_model_config(cfg);
  Net net;
  net.cfg = &cfg;
  net.rng = Rng(dropout_seed);
  net.train_mode = train_mode;
  load_params(net, params, false);
  return net.g.value(encode_impl(net, symbols.ids));
}

std::pair<std::vector<double>, std::vector<double>> attention_step(
    const std::vector<double>& query, const Tensor& memory, const AttentionState& state,
    const NamedTensors& params, const ModelConfig& cfg) {
  require(state.prev_weights.size() == memory.rows() &&
              state.cum_weights.size() == memory.rows(),
          LRT_E_STATE_MISMATCH, "attention state length != encoder steps");
  require(query.size() == cfg.decoder_rnn_dim, LRT_E_STATE_MISMATCH,
          "query length != decoder_rnn_dim");

  Net net;
  net.cfg = &cfg;
  load_params(net, params, false);
  Graph& g = net.g;

  const VarId mem = g.constant(memory);
  const VarId processed = g.linear_rows(mem, net["attention.memory.weight"], kNoVar);
  const VarId q = g.constant(Tensor({query.size()}, std::vector<double>(query)));
  const VarId prev =
      g.constant(Tensor({state.prev_weights.size()}, std::vector<double>(state.prev_weights)));
  const VarId cum =
      g.constant(Tensor({state.cum_weights.size()}, std::vector<double>(state.cum_weights)));

  const AttentionVars att = attention_impl(net, q, mem, processed, prev, cum);
  return {g.value(att.context).data, g.value(att.weights).data};
}

TeacherForcedResult forward_teacher_forced(const SymbolSequence& symbols,
                                           const Tensor& target_mel, const NamedTensors& params,
                                           const ModelConfig& cfg,
                                           const ForwardOptions& options) {
  validate_model_config(cfg);
  Net net;
  net.cfg = &cfg;
  net.rng = Rng(options.dropout_seed);
  net.train_mode = options.train_mode;
  load_params(net, params, false);

  DecoderLoop loop;
  const TeacherVars tv = teacher_impl(net, loop, symbols.ids, target_mel);

  TeacherForcedResult result;
  result.loss = extract_loss(net, tv);
  result.output = collect_output(net, loop, tv.mel_before, tv.mel_after,
                                 StopReason::kTeacherForced);
  return result;
}

std::pair<TeacherForcedResult, NamedTensors> backward(const SymbolSequence& symbols,
                                                      const Tensor& target_mel,
                                                      const NamedTensors& params,
                                                      const ModelConfig& cfg,
                                                      const ForwardOptions& options) {
  validate_model_config(cfg);
  Net net;
  net.cfg = &cfg;
  net.rng = Rng(options.dropout_seed);
  net.train_mode = options.train_mode;
  load_params(net, params, true);

  DecoderLoop loop;
  const TeacherVars tv = teacher_impl(net, loop, symbols.ids, target_mel);

  TeacherForcedResult result;
  result.loss = extract_loss(net, tv);
  result.output = collect_output(net, loop, tv.mel_before, tv.mel_after,
                                 StopReason::kTeacherForced);

  net.g.backward(tv.total);

  NamedTensors grads;
  for (const auto& [name, tensor] : params) {
    const Tensor& g = net.g.grad(net.p.at(name));
    Tensor out(tensor.shape);
    if (!g.data.empty()) out.data = g.data;
    require(out.all_finite(), LRT_E_NUMERICAL_DIVERGENCE,
            "non-finite gradient for " + name);
    grads.emplace(name, std::move(out));
  }
  return {std::move(result), std::move(grads)};
}

DecoderOutput infer(const SymbolSequence& symbols, const NamedTensors& params,
                    const ModelConfig& cfg, uint64_t dropout_seed) {
  validate_model_config(cfg);
  Net net;
  net.cfg = &cfg;
  net.rng = Rng(dropout_seed);
  net.train_mode = false;
  load_params(net, params, false);
  Graph& g = net.g;

  DecoderLoop loop;
  loop.init(net, encode_impl(net, symbols.ids));

  StopReason reason = StopReason::kMaxSteps;
  VarId prev = zeros_var(g, {cfg.n_mels});
  for (std::size_t step = 0; step < cfg.max_decoder_steps; ++step) {
    loop.step(prev);
    prev = loop.mel_frames.back();
    const double logit = g.value(loop.gate_logits.back()).data[0];
    const double prob = 1.0 / (1.0 + std::exp(-logit));
    if (prob >= cfg.gate_threshold) {
      reason = StopReason::kGateFired;
      break;
    }
  }

  const VarId mel_before = g.stack_rows(loop.mel_frames);
  const VarId mel_after = loop.postnet(mel_before);
  return collect_output(net, loop, mel_before, mel_after, reason);
}

}  // namespace lrt

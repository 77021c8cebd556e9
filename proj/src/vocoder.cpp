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

#include "vocoder.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <map>

#include "autograd.hpp"
#include "checkpoint.hpp"
#include "error.hpp"
#include "linalg.hpp"
#include "rng.hpp"

namespace lrt {
namespace {

using ag::Graph;
using ag::kNoVar;
using ag::VarId;

// Right pseudo-inverse of the filterbank: P = M^T (M M^T)^{-1}, [bins, mels].
Tensor filterbank_pinv(const Tensor& fb) {
  const std::size_t mels = fb.rows();
  const std::size_t bins = fb.cols();

  std::vector<double> gram(mels * mels, 0.0);
  for (std::size_t i = 0; i < mels; ++i) {
    for (std::size_t j = 0; j < mels; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < bins; ++k) acc += fb.at(i, k) * fb.at(j, k);
      gram[i * mels + j] = acc;
    }
  }
  // Tiny ridge keeps the Cholesky safe for narrow filters.
  for (std::size_t i = 0; i < mels; ++i) gram[i * mels + i] += 1e-10;

  Tensor pinv({bins, mels});
  std::vector<double> rhs(mels);
  for (std::size_t k = 0; k < bins; ++k) {
    for (std::size_t i = 0; i < mels; ++i) rhs[i] = fb.at(i, k);
    const auto col = cholesky_solve(gram, mels, rhs);
    for (std::size_t i = 0; i < mels; ++i) pinv.at(k, i) = col[i];
  }
  return pinv;
}

}  // namespace

GriffinLimResult griffin_lim(const MelSpectrogram& mel, int n_iters,
                             const FeatureConfig& cfg) {
  validate_feature_config(cfg);
  require(n_iters >= 1, LRT_E_CONFIG, "n_iters must be >= 1");
  require(mel.n_mels() == static_cast<std::size_t>(cfg.n_mels), LRT_E_CONFIG,
          "mel band count does not match the feature config");

  const std::size_t n_frames = mel.n_frames();
  require(n_frames >= 1, LRT_E_CONFIG, "empty mel");
  const std::size_t n_samples =
      std::max<std::size_t>(1, (n_frames - 1) * static_cast<std::size_t>(cfg.hop));

  GriffinLimResult result;
  result.audio.sample_rate_hz = cfg.sample_rate_hz;

  // All-floor input has no content to invert.
  const double floor_log = std::log(cfg.log_floor);
  bool any_content = false;
  for (double v : mel.values.data) {
    if (v > floor_log + 1e-9) {
      any_content = true;
      break;
    }
  }
  if (!any_content) {
    result.audio.samples.assign(n_samples, 0.0);
    result.silent_input = true;
    return result;
  }

  // Invert the filterbank with a clamped pseudo-inverse.
  const Tensor fb = mel_filterbank(cfg);
  const Tensor pinv = filterbank_pinv(fb);
  const std::size_t bins = fb.cols();

  Tensor target_mag({n_frames, bins});
  for (std::size_t f = 0; f < n_frames; ++f) {
    for (std::size_t k = 0; k < bins; ++k) {
      double acc = 0.0;
      for (std::size_t m = 0; m < mel.n_mels(); ++m) {
        acc += pinv.at(k, m) * std::exp(mel.values.at(f, m));
      }
      target_mag.at(f, k) = std::max(acc, 0.0);
    }
  }

  // Iterative phase estimation from zero phase.
  std::vector<std::vector<std::complex<double>>> spec(
      n_frames, std::vector<std::complex<double>>(bins));
  for (std::size_t f = 0; f < n_frames; ++f) {
    for (std::size_t k = 0; k < bins; ++k) spec[f][k] = target_mag.at(f, k);
  }

  double target_norm = 0.0;
  for (double v : target_mag.data) target_norm += v * v;
  target_norm = std::sqrt(std::max(target_norm, 1e-300));

  std::vector<double> samples;
  for (int iter = 0; iter < n_iters; ++iter) {
    samples = istft(spec, n_samples, cfg);
    const auto estimate = stft_complex(samples, cfg);
    double err = 0.0;
    for (std::size_t f = 0; f < n_frames && f < estimate.size(); ++f) {
      for (std::size_t k = 0; k < bins; ++k) {
        const double mag = std::abs(estimate[f][k]);
        const double d = mag - target_mag.at(f, k);
        err += d * d;
        spec[f][k] = mag > 1e-300 ? estimate[f][k] * (target_mag.at(f, k) / mag)
                                  : std::complex<double>(target_mag.at(f, k), 0.0);
      }
    }
    result.spectral_errors.push_back(std::sqrt(err) / target_norm);
  }
  samples = istft(spec, n_samples, cfg);

  double peak = 0.0;
  for (double s : samples) peak = std::max(peak, std::abs(s));
  if (peak > 0.0) {
    const double gain = 0.95 / peak;
    for (auto& s : samples) s *= gain;
  }
  result.audio.samples = std::move(samples);
  return result;
}

void validate_flow_config(const FlowConfig& cfg) {
  require(cfg.n_flows >= 1, LRT_E_CONFIG, "n_flows must be >= 1");
  require(cfg.group_size >= 2 && cfg.group_size % 2 == 0, LRT_E_CONFIG,
          "group_size must be even and >= 2");
  require(cfg.coupling_hidden >= 1 && cfg.mel_cond_dim >= 1, LRT_E_CONFIG,
          "coupling_hidden and mel_cond_dim must be >= 1");
  require(cfg.sigma > 0, LRT_E_CONFIG, "sigma must be positive");
}

FlowParams init_flow_params(const FlowConfig& cfg, uint64_t seed) {
  validate_flow_config(cfg);
  Rng rng(seed);
  FlowParams p;
  const std::size_t g = cfg.group_size;
  const std::size_t half = g / 2;
  for (std::size_t f = 0; f < cfg.n_flows; ++f) {
    const std::string base = "flow" + std::to_string(f);
    Tensor mixing({g, g});
    mixing.data = random_rotation(g, rng);
    p.tensors.emplace(base + ".mixing", std::move(mixing));

    Tensor w0({cfg.coupling_hidden, half + cfg.mel_cond_dim});
    const double limit = std::sqrt(6.0 / static_cast<double>(w0.rows() + w0.cols()));
    for (auto& v : w0.data) v = rng.uniform(-limit, limit);
    p.tensors.emplace(base + ".coupling.fc0.weight", std::move(w0));
    p.tensors.emplace(base + ".coupling.fc0.bias", Tensor({cfg.coupling_hidden}));
    // Zero output layer: each flow starts as the identity coupling.
    p.tensors.emplace(base + ".coupling.fc1.weight", Tensor({g, cfg.coupling_hidden}));
    p.tensors.emplace(base + ".coupling.fc1.bias", Tensor({g}));
  }
  return p;
}

FlowParams identity_flow_params(const FlowConfig& cfg) {
  validate_flow_config(cfg);
  FlowParams p;
  const std::size_t g = cfg.group_size;
  for (std::size_t f = 0; f < cfg.n_flows; ++f) {
    const std::string base = "flow" + std::to_string(f);
    Tensor mixing({g, g});
    for (std::size_t i = 0; i < g; ++i) mixing.at(i, i) = 1.0;
    p.tensors.emplace(base + ".mixing", std::move(mixing));
    p.tensors.emplace(base + ".coupling.fc0.weight",
                      Tensor({cfg.coupling_hidden, g / 2 + cfg.mel_cond_dim}));
    p.tensors.emplace(base + ".coupling.fc0.bias", Tensor({cfg.coupling_hidden}));
    p.tensors.emplace(base + ".coupling.fc1.weight", Tensor({g, cfg.coupling_hidden}));
    p.tensors.emplace(base + ".coupling.fc1.bias", Tensor({g}));
  }
  return p;
}

Tensor make_groups(const std::vector<double>& samples, std::size_t group_size) {
  require(group_size >= 1, LRT_E_CONFIG, "group_size must be >= 1");
  require(!samples.empty(), LRT_E_INVALID_AUDIO, "no samples to group");
  const std::size_t n_groups = (samples.size() + group_size - 1) / group_size;
  Tensor groups({n_groups, group_size});
  for (std::size_t i = 0; i < samples.size(); ++i) {
    groups.data[i] = samples[i];  // row-major matches sample order
  }
  return groups;
}

std::vector<double> ungroup(const Tensor& groups, std::size_t n_samples) {
  require(n_samples <= groups.numel(), LRT_E_INVALID_ARGUMENT, "ungroup: too many samples");
  return std::vector<double>(groups.data.begin(),
                             groups.data.begin() + static_cast<std::ptrdiff_t>(n_samples));
}

Tensor flow_conditioning(const MelSpectrogram& mel, std::size_t n_groups,
                         std::size_t group_size) {
  require(mel.n_frames() >= 1, LRT_E_CONFIG, "empty mel");
  const std::size_t hop = static_cast<std::size_t>(mel.config.hop);
  Tensor cond({n_groups, mel.n_mels()});
  for (std::size_t t = 0; t < n_groups; ++t) {
    const std::size_t frame = std::min(t * group_size / hop, mel.n_frames() - 1);
    for (std::size_t m = 0; m < mel.n_mels(); ++m) cond.at(t, m) = mel.values.at(frame, m);
  }
  return cond;
}

namespace {

struct FlowGraph {
  Graph g;
  std::map<std::string, VarId> p;
  std::vector<VarId> rows;   // per-group state
  VarId log_det = kNoVar;    // scalar
};

// Shared forward construction for value and gradient paths.
void build_flow_forward(FlowGraph& fg, const Tensor& audio_groups, const Tensor& cond,
                        const FlowParams& params, const FlowConfig& cfg, bool requires_grad) {
  validate_flow_config(cfg);
  require(audio_groups.cols() == cfg.group_size, LRT_E_INVALID_ARGUMENT,
          "group width != group_size");
  require(cond.rows() == audio_groups.rows() && cond.cols() == cfg.mel_cond_dim,
          LRT_E_INVALID_ARGUMENT, "conditioning shape mismatch");

  Graph& g = fg.g;
  for (const auto& [name, t] : params.tensors) fg.p[name] = g.leaf(t, requires_grad);

  const std::size_t n_groups = audio_groups.rows();
  const std::size_t half = cfg.group_size / 2;

  fg.rows.resize(n_groups);
  std::vector<VarId> cond_rows(n_groups);
  for (std::size_t t = 0; t < n_groups; ++t) {
    Tensor row({cfg.group_size});
    for (std::size_t i = 0; i < cfg.group_size; ++i) row.data[i] = audio_groups.at(t, i);
    fg.rows[t] = g.constant(std::move(row));
    Tensor crow({cfg.mel_cond_dim});
    for (std::size_t i = 0; i < cfg.mel_cond_dim; ++i) crow.data[i] = cond.at(t, i);
    cond_rows[t] = g.constant(std::move(crow));
  }

  fg.log_det = g.constant(Tensor({1}));
  for (std::size_t f = 0; f < cfg.n_flows; ++f) {
    const std::string base = "flow" + std::to_string(f);
    const VarId mixing = fg.p.at(base + ".mixing");
    const VarId ld_mix = g.logdet(mixing);
    fg.log_det = g.add(fg.log_det, g.scale(ld_mix, static_cast<double>(n_groups)));

    for (std::size_t t = 0; t < n_groups; ++t) {
      const VarId y = g.matvec(mixing, fg.rows[t]);
      const VarId a = g.slice(y, 0, half);
      const VarId b = g.slice(y, half, half);
      const VarId h = g.tanh_op(g.linear(fg.p.at(base + ".coupling.fc0.weight"),
                                         g.concat(a, cond_rows[t]),
                                         fg.p.at(base + ".coupling.fc0.bias")));
      const VarId out = g.linear(fg.p.at(base + ".coupling.fc1.weight"), h,
                                 fg.p.at(base + ".coupling.fc1.bias"));
      const VarId log_s = g.slice(out, 0, half);
      const VarId shift = g.slice(out, half, half);
      const VarId b2 = g.add(g.mul(b, g.exp_op(log_s)), shift);
      fg.rows[t] = g.concat(a, b2);
      fg.log_det = g.add(fg.log_det, g.sum(log_s));
    }
  }
}

VarId build_nll(FlowGraph& fg, const FlowConfig& cfg) {
  Graph& g = fg.g;
  VarId sum_sq = g.constant(Tensor({1}));
  for (VarId row : fg.rows) sum_sq = g.add(sum_sq, g.sum_sq(row));
  const double count =
      static_cast<double>(fg.rows.size()) * static_cast<double>(cfg.group_size);
  const VarId scaled = g.scale(sum_sq, 1.0 / (2.0 * cfg.sigma * cfg.sigma));
  return g.scale(g.sub(scaled, fg.log_det), 1.0 / count);
}

}  // namespace

FlowForwardResult flow_forward(const Tensor& audio_groups, const Tensor& cond,
                               const FlowParams& params, const FlowConfig& cfg) {
  FlowGraph fg;
  build_flow_forward(fg, audio_groups, cond, params, cfg, false);

  FlowForwardResult result;
  result.log_det_total = fg.g.value(fg.log_det).data[0];
  result.z = Tensor({audio_groups.rows(), cfg.group_size});
  for (std::size_t t = 0; t < audio_groups.rows(); ++t) {
    const auto& row = fg.g.value(fg.rows[t]).data;
    for (std::size_t i = 0; i < cfg.group_size; ++i) result.z.at(t, i) = row[i];
  }
  return result;
}

Tensor flow_inverse(const Tensor& z, const Tensor& cond, const FlowParams& params,
                    const FlowConfig& cfg) {
  validate_flow_config(cfg);
  require(z.cols() == cfg.group_size, LRT_E_INVALID_ARGUMENT, "group width != group_size");
  require(cond.rows() == z.rows() && cond.cols() == cfg.mel_cond_dim, LRT_E_INVALID_ARGUMENT,
          "conditioning shape mismatch");

  const std::size_t n_groups = z.rows();
  const std::size_t g_size = cfg.group_size;
  const std::size_t half = g_size / 2;
  const std::size_t hid = cfg.coupling_hidden;

  Tensor x = z;
  for (std::size_t f = cfg.n_flows; f-- > 0;) {
    const std::string base = "flow" + std::to_string(f);
    const Tensor& mixing = params.tensors.at(base + ".mixing");
    {
      const auto lu = lu_decompose(mixing.data, g_size);
      require(lu.log_abs_det() > std::log(1e-8), LRT_E_SINGULAR_TRANSFORM,
              "mixing matrix is numerically singular (|det| <= 1e-8)");
    }
    const auto w_inv = invert(mixing.data, g_size);
    const Tensor& w0 = params.tensors.at(base + ".coupling.fc0.weight");
    const Tensor& b0 = params.tensors.at(base + ".coupling.fc0.bias");
    const Tensor& w1 = params.tensors.at(base + ".coupling.fc1.weight");
    const Tensor& b1 = params.tensors.at(base + ".coupling.fc1.bias");

    for (std::size_t t = 0; t < n_groups; ++t) {
      // Undo the coupling: a passes through, so (log_s, shift) recompute.
      std::vector<double> hidden(hid);
      for (std::size_t r = 0; r < hid; ++r) {
        double acc = b0.data[r];
        for (std::size_t c = 0; c < half; ++c) acc += w0.at(r, c) * x.at(t, c);
        for (std::size_t c = 0; c < cfg.mel_cond_dim; ++c) {
          acc += w0.at(r, half + c) * cond.at(t, c);
        }
        hidden[r] = std::tanh(acc);
      }
      std::vector<double> out(g_size);
      for (std::size_t r = 0; r < g_size; ++r) {
        double acc = b1.data[r];
        for (std::size_t c = 0; c < hid; ++c) acc += w1.at(r, c) * hidden[c];
        out[r] = acc;
      }
      std::vector<double> y(g_size);
      for (std::size_t i = 0; i < half; ++i) y[i] = x.at(t, i);
      for (std::size_t i = 0; i < half; ++i) {
        y[half + i] = (x.at(t, half + i) - out[half + i]) * std::exp(-out[i]);
      }
      // Undo the mixing.
      for (std::size_t r = 0; r < g_size; ++r) {
        double acc = 0.0;
        for (std::size_t c = 0; c < g_size; ++c) acc += w_inv[r * g_size + c] * y[c];
        x.at(t, r) = acc;
      }
    }
  }
  return x;
}

double flow_nll(const Tensor& audio_groups, const Tensor& cond, const FlowParams& params,
                const FlowConfig& cfg) {
  FlowGraph fg;
  build_flow_forward(fg, audio_groups, cond, params, cfg, false);
  return fg.g.value(build_nll(fg, cfg)).data[0];
}

std::pair<double, NamedTensors> flow_nll_backward(const Tensor& audio_groups,
                                                  const Tensor& cond, const FlowParams& params,
                                                  const FlowConfig& cfg) {
  FlowGraph fg;
  build_flow_forward(fg, audio_groups, cond, params, cfg, true);
  const VarId nll = build_nll(fg, cfg);
  fg.g.backward(nll);

  NamedTensors grads;
  for (const auto& [name, t] : params.tensors) {
    const Tensor& g = fg.g.grad(fg.p.at(name));
    Tensor out(t.shape);
    if (!g.data.empty()) out.data = g.data;
    grads.emplace(name, std::move(out));
  }
  return {fg.g.value(nll).data[0], std::move(grads)};
}

void save_flow_checkpoint(const FlowParams& params, const FlowConfig& cfg,
                          const std::string& path) {
  TensorContainer container;
  container.meta["format"] = "lrtt-flow";
  container.meta["flow.n_flows"] = std::to_string(cfg.n_flows);
  container.meta["flow.group_size"] = std::to_string(cfg.group_size);
  container.meta["flow.coupling_hidden"] = std::to_string(cfg.coupling_hidden);
  container.meta["flow.mel_cond_dim"] = std::to_string(cfg.mel_cond_dim);
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", cfg.sigma);
  container.meta["flow.sigma"] = buf;
  container.tensors = params.tensors;
  save_container(container, path);
}

std::pair<FlowParams, FlowConfig> load_flow_checkpoint(const std::string& path) {
  TensorContainer container = load_container(path);
  const auto get = [&](const char* key) -> const std::string& {
    const auto it = container.meta.find(key);
    require(it != container.meta.end(), LRT_E_CORRUPT_CHECKPOINT,
            path + ": flow checkpoint meta missing " + key);
    return it->second;
  };
  require(get("format") == "lrtt-flow", LRT_E_CORRUPT_CHECKPOINT,
          path + ": not a flow checkpoint");
  FlowConfig cfg;
  cfg.n_flows = std::stoull(get("flow.n_flows"));
  cfg.group_size = std::stoull(get("flow.group_size"));
  cfg.coupling_hidden = std::stoull(get("flow.coupling_hidden"));
  cfg.mel_cond_dim = std::stoull(get("flow.mel_cond_dim"));
  cfg.sigma = std::stod(get("flow.sigma"));
  validate_flow_config(cfg);
  FlowParams params;
  params.tensors = std::move(container.tensors);
  return {std::move(params), cfg};
}

AudioClip flow_synthesize(const MelSpectrogram& mel, const FlowParams& params,
                          const FlowConfig& cfg, uint64_t seed) {
  validate_flow_config(cfg);
  const std::size_t hop = static_cast<std::size_t>(mel.config.hop);
  const std::size_t n_samples = std::max<std::size_t>(1, (mel.n_frames() - 1) * hop);
  const std::size_t n_groups = (n_samples + cfg.group_size - 1) / cfg.group_size;

  Rng rng(seed);
  Tensor z({n_groups, cfg.group_size});
  for (auto& v : z.data) v = rng.normal() * cfg.sigma;

  const Tensor cond = flow_conditioning(mel, n_groups, cfg.group_size);
  const Tensor groups = flow_inverse(z, cond, params, cfg);

  AudioClip clip;
  clip.sample_rate_hz = mel.config.sample_rate_hz;
  clip.samples = ungroup(groups, n_samples);
  double peak = 0.0;
  for (double s : clip.samples) peak = std::max(peak, std::abs(s));
  if (peak > 0.0) {
    const double gain = 0.95 / peak;
    for (auto& s : clip.samples) s *= gain;
  }
  return clip;
}

}  // namespace lrt

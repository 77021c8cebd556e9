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

#include "lowres_tts/lowres_tts.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <string>
#include <vector>

#include "audio.hpp"
#include "checkpoint.hpp"
#include "corpus.hpp"
#include "error.hpp"
#include "evaluation.hpp"
#include "io_util.hpp"
#include "pipeline.hpp"
#include "resample.hpp"
#include "vad.hpp"

struct lrt_audio {
  lrt::AudioClip clip;
};

struct lrt_checkpoint {
  lrt::Checkpoint ckpt;
  std::vector<std::string> tensor_names;
};

namespace {

thread_local std::string g_last_error;

template <typename F>
lrt_status guarded(F&& body) {
  try {
    body();
    return LRT_OK;
  } catch (const lrt::Error& e) {
    g_last_error = e.what();
    return e.code();
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return LRT_E_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return LRT_E_INTERNAL;
  }
}

lrt_status need(bool ok, const char* message) {
  if (ok) return LRT_OK;
  g_last_error = message;
  return LRT_E_INVALID_ARGUMENT;
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

std::vector<std::string> collect_overrides(const char* const* overrides, size_t n) {
  std::vector<std::string> out;
  for (size_t i = 0; i < n; ++i) {
    if (overrides && overrides[i]) out.emplace_back(overrides[i]);
  }
  return out;
}

}  // namespace

extern "C" {

const char* lrt_status_name(lrt_status s) {
  switch (s) {
    case LRT_OK: return "OK";
    case LRT_E_INVALID_ARGUMENT: return "E_INVALID_ARGUMENT";
    case LRT_E_IO: return "E_IO";
    case LRT_E_CONFIG: return "E_CONFIG";
    case LRT_E_INVALID_AUDIO: return "E_INVALID_AUDIO";
    case LRT_E_EMPTY_AFTER_TRIM: return "E_EMPTY_AFTER_TRIM";
    case LRT_E_EMPTY_TEXT: return "E_EMPTY_TEXT";
    case LRT_E_UNKNOWN_SYMBOL: return "E_UNKNOWN_SYMBOL";
    case LRT_E_ALIGNMENT_MISMATCH: return "E_ALIGNMENT_MISMATCH";
    case LRT_E_UNSPLITTABLE_SPAN: return "E_UNSPLITTABLE_SPAN";
    case LRT_E_EMPTY_MANIFEST: return "E_EMPTY_MANIFEST";
    case LRT_E_RATE_MISMATCH: return "E_RATE_MISMATCH";
    case LRT_E_STATE_MISMATCH: return "E_STATE_MISMATCH";
    case LRT_E_NUMERICAL_DIVERGENCE: return "E_NUMERICAL_DIVERGENCE";
    case LRT_E_CORRUPT_CHECKPOINT: return "E_CORRUPT_CHECKPOINT";
    case LRT_E_VERSION_MISMATCH: return "E_VERSION_MISMATCH";
    case LRT_E_INCOMPATIBLE_ARCHITECTURE: return "E_INCOMPATIBLE_ARCHITECTURE";
    case LRT_E_MISSING_TENSOR: return "E_MISSING_TENSOR";
    case LRT_E_SINGULAR_TRANSFORM: return "E_SINGULAR_TRANSFORM";
    case LRT_E_EMPTY_ALIGNMENT: return "E_EMPTY_ALIGNMENT";
    case LRT_E_INSUFFICIENT_RATERS: return "E_INSUFFICIENT_RATERS";
    case LRT_E_EMPTY_LOG: return "E_EMPTY_LOG";
    case LRT_E_FEATURES_MISSING: return "E_FEATURES_MISSING";
    case LRT_E_PIPELINE_STAGE: return "E_PIPELINE_STAGE";
    case LRT_E_INTERNAL: return "E_INTERNAL";
  }
  return "E_UNKNOWN";
}

const char* lrt_last_error(void) { return g_last_error.c_str(); }

const char* lrt_version(void) { return "0.1.0"; }

void lrt_string_free(char* s) { std::free(s); }

/* ------------------------------------------------------------------ */
/* Audio                                                               */
/* ------------------------------------------------------------------ */

lrt_status lrt_audio_load_wav(const char* path, lrt_audio** out) {
  if (const auto rc = need(path && out, "path and out must be non-null")) return rc;
  return guarded([&] { *out = new lrt_audio{lrt::load_wav(path)}; });
}

lrt_status lrt_audio_save_wav(const lrt_audio* a, const char* path) {
  if (const auto rc = need(a && path, "audio and path must be non-null")) return rc;
  return guarded([&] { lrt::save_wav(a->clip, path); });
}

lrt_status lrt_audio_create(const double* samples, size_t n, int sample_rate_hz,
                            lrt_audio** out) {
  if (const auto rc = need(samples && out && n > 0, "samples must be non-empty")) return rc;
  return guarded([&] {
    lrt::AudioClip clip;
    clip.sample_rate_hz = sample_rate_hz;
    clip.samples.assign(samples, samples + n);
    lrt::validate_audio(clip);
    *out = new lrt_audio{std::move(clip)};
  });
}

void lrt_audio_free(lrt_audio* a) { delete a; }

size_t lrt_audio_length(const lrt_audio* a) { return a ? a->clip.samples.size() : 0; }

int lrt_audio_sample_rate(const lrt_audio* a) { return a ? a->clip.sample_rate_hz : 0; }

lrt_status lrt_audio_copy_samples(const lrt_audio* a, double* dst, size_t capacity) {
  if (const auto rc = need(a && dst, "audio and dst must be non-null")) return rc;
  if (const auto rc = need(capacity >= a->clip.samples.size(), "destination too small")) {
    return rc;
  }
  std::memcpy(dst, a->clip.samples.data(), a->clip.samples.size() * sizeof(double));
  return LRT_OK;
}

lrt_status lrt_audio_resample(const lrt_audio* a, int target_rate_hz, lrt_audio** out) {
  if (const auto rc = need(a && out, "audio and out must be non-null")) return rc;
  return guarded([&] { *out = new lrt_audio{lrt::resample(a->clip, target_rate_hz)}; });
}

void lrt_vad_config_default(lrt_vad_config* cfg) {
  if (!cfg) return;
  const lrt::VadConfig d;
  cfg->frame_ms = d.frame_ms;
  cfg->hop_ms = d.hop_ms;
  cfg->threshold_db = d.threshold_db;
  cfg->max_internal_silence_sec = d.max_internal_silence_sec;
  cfg->min_silence_run_sec = d.min_silence_run_sec;
}

lrt_status lrt_audio_trim_silence(const lrt_audio* a, const lrt_vad_config* cfg,
                                  lrt_audio** out) {
  if (const auto rc = need(a && out, "audio and out must be non-null")) return rc;
  return guarded([&] {
    lrt::VadConfig vad;
    if (cfg) {
      vad.frame_ms = cfg->frame_ms;
      vad.hop_ms = cfg->hop_ms;
      vad.threshold_db = cfg->threshold_db;
      vad.max_internal_silence_sec = cfg->max_internal_silence_sec;
      vad.min_silence_run_sec = cfg->min_silence_run_sec;
    }
    *out = new lrt_audio{lrt::trim_silences(a->clip, vad)};
  });
}

/* ------------------------------------------------------------------ */
/* Corpus preparation                                                  */
/* ------------------------------------------------------------------ */

void lrt_prep_options_default(lrt_prep_options* opt) {
  if (!opt) return;
  opt->target_rate_hz = 22050;
  opt->max_internal_silence_sec = 0.5;
  opt->max_chunk_sec = 10.0;
  opt->threads = 0;
}

lrt_status lrt_prep_run(const char* in_dir, const char* out_dir,
                        const lrt_prep_options* opt) {
  if (const auto rc = need(in_dir && out_dir, "in_dir and out_dir must be non-null")) return rc;
  return guarded([&] {
    lrt::PrepOptions popt;
    if (opt) {
      popt.target_rate_hz = opt->target_rate_hz;
      popt.max_internal_silence_sec = opt->max_internal_silence_sec;
      popt.max_chunk_sec = opt->max_chunk_sec;
      popt.threads = opt->threads;
    }
    lrt::prep_run(in_dir, out_dir, popt);
  });
}

lrt_status lrt_manifest_stats(const char* manifest_path, lrt_corpus_stats* out) {
  if (const auto rc = need(manifest_path && out, "manifest and out must be non-null")) return rc;
  return guarded([&] {
    const auto stats = lrt::corpus_stats(lrt::load_manifest(manifest_path));
    out->num_utterances = stats.num_utterances;
    out->total_duration_sec = stats.total_duration_sec;
    out->word_vocab_size = stats.word_vocab_size;
    out->min_utterance_sec = stats.min_utterance_sec;
    out->max_utterance_sec = stats.max_utterance_sec;
    out->avg_utterance_sec = stats.avg_utterance_sec;
  });
}

lrt_status lrt_manifest_stats_text(const char* manifest_path, char** text) {
  if (const auto rc = need(manifest_path && text, "manifest and out must be non-null")) return rc;
  return guarded([&] {
    const auto stats = lrt::corpus_stats(lrt::load_manifest(manifest_path));
    *text = dup_string(lrt::format_stats_text(stats) + "\n" + lrt::format_stats_keyvalue(stats));
  });
}

/* ------------------------------------------------------------------ */
/* Features                                                            */
/* ------------------------------------------------------------------ */

lrt_status lrt_features_run(const char* manifest_path, const char* out_dir,
                            const char* config_file, int threads) {
  if (const auto rc = need(manifest_path && out_dir, "manifest and out_dir required")) return rc;
  return guarded([&] {
    lrt::FeaturesRunOptions opt;
    opt.manifest_path = manifest_path;
    opt.out_dir = out_dir;
    if (config_file) opt.config_file = config_file;
    opt.threads = threads;
    lrt::features_run(opt);
  });
}

/* ------------------------------------------------------------------ */
/* Training                                                            */
/* ------------------------------------------------------------------ */

void lrt_train_options_default(lrt_train_options* opt) {
  if (!opt) return;
  std::memset(opt, 0, sizeof *opt);
}

lrt_status lrt_train_run(const lrt_train_options* opt) {
  if (const auto rc = need(opt && opt->manifest_path && opt->features_dir && opt->out_dir,
                           "manifest_path, features_dir and out_dir are required")) {
    return rc;
  }
  return guarded([&] {
    lrt::TrainRunOptions topt;
    topt.manifest_path = opt->manifest_path;
    topt.features_dir = opt->features_dir;
    if (opt->symbols_path) topt.symbols_path = opt->symbols_path;
    topt.out_dir = opt->out_dir;
    if (opt->warm_start) topt.warm_start = opt->warm_start;
    if (opt->config_file) topt.config_file = opt->config_file;
    topt.overrides = collect_overrides(opt->overrides, opt->n_overrides);
    topt.seed = opt->seed;
    if (opt->progress) {
      auto fn = opt->progress;
      void* user = opt->progress_user;
      topt.progress = [fn, user](const lrt::LossRecord& r) {
        fn(r.iteration, r.train_loss, r.has_val ? r.val_loss : std::nan(""), r.lr, user);
      };
    }
    lrt::train_run(topt);
  });
}

/* ------------------------------------------------------------------ */
/* Synthesis                                                           */
/* ------------------------------------------------------------------ */

void lrt_synth_options_default(lrt_synth_options* opt) {
  if (!opt) return;
  std::memset(opt, 0, sizeof *opt);
  opt->vocoder = "griffinlim";
  opt->gl_iters = 60;
}

lrt_status lrt_synth_run(const lrt_synth_options* opt) {
  if (const auto rc = need(opt && opt->checkpoint_path && opt->text && opt->out_wav,
                           "checkpoint_path, text and out_wav are required")) {
    return rc;
  }
  return guarded([&] {
    lrt::SynthRunOptions sopt;
    sopt.checkpoint_path = opt->checkpoint_path;
    sopt.text = opt->text;
    sopt.out_wav = opt->out_wav;
    if (opt->vocoder) sopt.vocoder = opt->vocoder;
    if (opt->flow_checkpoint) sopt.flow_checkpoint = opt->flow_checkpoint;
    sopt.gl_iters = opt->gl_iters > 0 ? opt->gl_iters : 60;
    if (opt->alignment_out) sopt.alignment_out = opt->alignment_out;
    if (opt->config_file) sopt.config_file = opt->config_file;
    sopt.overrides = collect_overrides(opt->overrides, opt->n_overrides);
    sopt.seed = opt->seed;
    lrt::synth_run(sopt);
  });
}

/* ------------------------------------------------------------------ */
/* Checkpoints and surgery                                             */
/* ------------------------------------------------------------------ */

lrt_status lrt_checkpoint_load(const char* path, lrt_checkpoint** out) {
  if (const auto rc = need(path && out, "path and out must be non-null")) return rc;
  return guarded([&] {
    auto* handle = new lrt_checkpoint{lrt::load_checkpoint(path), {}};
    for (const auto& [name, t] : handle->ckpt.tensors) {
      (void)t;
      handle->tensor_names.push_back(name);
    }
    *out = handle;
  });
}

void lrt_checkpoint_free(lrt_checkpoint* c) { delete c; }

size_t lrt_checkpoint_tensor_count(const lrt_checkpoint* c) {
  return c ? c->tensor_names.size() : 0;
}

const char* lrt_checkpoint_tensor_name(const lrt_checkpoint* c, size_t index) {
  if (!c || index >= c->tensor_names.size()) return nullptr;
  return c->tensor_names[index].c_str();
}

uint64_t lrt_checkpoint_iteration(const lrt_checkpoint* c) {
  return c ? c->ckpt.iteration : 0;
}

namespace {

lrt::TransferSpec make_spec(const char* exclude_prefixes, uint64_t embedding_seed) {
  lrt::TransferSpec spec;
  spec.embedding_seed = embedding_seed;
  if (exclude_prefixes) {
    spec.exclude_name_prefixes.clear();
    std::string s(exclude_prefixes);
    std::size_t pos = 0;
    while (pos <= s.size()) {
      auto comma = s.find(',', pos);
      if (comma == std::string::npos) comma = s.size();
      const std::string prefix = s.substr(pos, comma - pos);
      if (!prefix.empty()) spec.exclude_name_prefixes.push_back(prefix);
      pos = comma + 1;
    }
  }
  return spec;
}

}  // namespace

lrt_status lrt_surgery_run(const char* src_checkpoint, const char* symbols_path,
                           const char* out_checkpoint, const char* exclude_prefixes,
                           uint64_t embedding_seed) {
  if (const auto rc = need(src_checkpoint && symbols_path && out_checkpoint,
                           "source, symbols and output paths are required")) {
    return rc;
  }
  return guarded([&] {
    const lrt::Checkpoint src = lrt::load_checkpoint(src_checkpoint);
    const lrt::SymbolTable table = lrt::SymbolTable::load(symbols_path);
    lrt::ModelConfig target_cfg = src.model_cfg;
    target_cfg.vocab_size = table.size();
    const auto spec = make_spec(exclude_prefixes, embedding_seed);

    lrt::Checkpoint out;
    out.model_cfg = target_cfg;
    out.vocab = table;
    out.iteration = 0;
    out.seed = embedding_seed;
    out.tensors = lrt::surgery(src, table, spec, target_cfg);
    lrt::save_checkpoint(out, out_checkpoint);
  });
}

lrt_status lrt_compat_report(const char* src_checkpoint, const char* symbols_path,
                             const char* exclude_prefixes, char** report_text) {
  if (const auto rc = need(src_checkpoint && report_text, "source and out are required")) {
    return rc;
  }
  return guarded([&] {
    const lrt::Checkpoint src = lrt::load_checkpoint(src_checkpoint);
    lrt::ModelConfig target_cfg = src.model_cfg;
    if (symbols_path && symbols_path[0]) {
      target_cfg.vocab_size = lrt::SymbolTable::load(symbols_path).size();
    }
    const auto spec = make_spec(exclude_prefixes, 0);
    *report_text = dup_string(lrt::compat_report(src, target_cfg, spec));
  });
}

/* ------------------------------------------------------------------ */
/* Evaluation                                                          */
/* ------------------------------------------------------------------ */

lrt_status lrt_alignment_score(const char* path, double band, double* score) {
  if (const auto rc = need(path && score, "path and score must be non-null")) return rc;
  return guarded([&] { *score = lrt::diagonality(lrt::load_alignment(path), band); });
}

lrt_status lrt_mos_report_text(const char* csv_path, double confidence, char** report_text) {
  if (const auto rc = need(csv_path && report_text, "csv path and out are required")) return rc;
  return guarded([&] {
    const auto samples = lrt::parse_mos_csv(lrt::read_text_file(csv_path));
    std::vector<std::string> dimensions;
    for (const auto& s : samples) {
      if (std::find(dimensions.begin(), dimensions.end(), s.dimension) == dimensions.end()) {
        dimensions.push_back(s.dimension);
      }
    }
    lrt::require(!dimensions.empty(), LRT_E_INSUFFICIENT_RATERS, "no MOS samples");
    std::sort(dimensions.begin(), dimensions.end());
    std::vector<lrt::MosReport> reports;
    for (const auto& dim : dimensions) {
      reports.push_back(lrt::mos_report(samples, dim, confidence));
    }
    *report_text = dup_string(lrt::format_mos_report(reports));
  });
}

lrt_status lrt_mos_implied_stddev(uint64_t n_raters, double half_width, double confidence,
                                  double* implied_s) {
  if (const auto rc = need(implied_s != nullptr, "out must be non-null")) return rc;
  return guarded([&] {
    *implied_s = lrt::mos_implied_stddev(static_cast<std::size_t>(n_raters), half_width,
                                         confidence);
  });
}

lrt_status lrt_t_quantile(double p, double dof, double* out) {
  if (const auto rc = need(out != nullptr, "out must be non-null")) return rc;
  return guarded([&] { *out = lrt::t_quantile(p, dof); });
}

/* ------------------------------------------------------------------ */
/* Pipeline                                                            */
/* ------------------------------------------------------------------ */

void lrt_pipeline_options_default(lrt_pipeline_options* opt) {
  if (!opt) return;
  std::memset(opt, 0, sizeof *opt);
}

lrt_status lrt_pipeline_run(const lrt_pipeline_options* opt) {
  if (const auto rc = need(opt && opt->run_dir, "run_dir is required")) return rc;
  return guarded([&] {
    lrt::PipelineOptions popt;
    if (opt->config_file) popt.config_file = opt->config_file;
    popt.run_dir = opt->run_dir;
    popt.overrides = collect_overrides(opt->overrides, opt->n_overrides);
    popt.seed = opt->seed;
    popt.verbose = opt->verbose != 0;
    lrt::pipeline_run(popt);
  });
}

} /* extern "C" */

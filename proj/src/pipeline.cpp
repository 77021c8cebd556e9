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

#include "pipeline.hpp"

#include <cstdio>
#include <filesystem>

#include "audio.hpp"
#include "error.hpp"
#include "evaluation.hpp"
#include "features.hpp"
#include "io_util.hpp"
#include "parallel.hpp"
#include "vocoder.hpp"

namespace fs = std::filesystem;

namespace lrt {
namespace {

KeyValues resolve_config(const std::string& config_file,
                         const std::vector<std::string>& overrides) {
  KeyValues kv;
  if (!config_file.empty()) kv = load_config_file(config_file);
  apply_overrides(kv, overrides);
  return kv;
}

}  // namespace

namespace {

// One config file drives every stage; each driver consumes all known keys
// and uses the structs it needs.
struct StageConfig {
  ModelConfig model;
  FeatureConfig features;
  TrainConfig train;
  AdamConfig adam;
  FlowConfig flow;
};

StageConfig consume_stage_config(KeyValues& kv) {
  StageConfig c;
  apply_model_keys(kv, c.model);
  apply_feature_keys(kv, c.features);
  apply_train_keys(kv, c.train, c.adam);
  apply_flow_keys(kv, c.flow);
  reject_unknown(kv);
  return c;
}

}  // namespace

void features_run(const FeaturesRunOptions& options) {
  KeyValues kv = resolve_config(options.config_file, options.overrides);
  const FeatureConfig cfg = consume_stage_config(kv).features;
  validate_feature_config(cfg);

  const auto entries = load_manifest(options.manifest_path);
  make_dirs(options.out_dir);
  const fs::path base = fs::path(options.manifest_path).parent_path();

  parallel_for(entries.size(), options.threads, [&](std::size_t i) {
    const auto& e = entries[i];
    AudioClip clip = load_wav((base / e.audio_path).string());
    require(clip.sample_rate_hz == cfg.sample_rate_hz, LRT_E_RATE_MISMATCH,
            e.audio_path + ": clip rate " + std::to_string(clip.sample_rate_hz) +
                " != features.sample_rate_hz " + std::to_string(cfg.sample_rate_hz));
    const auto mel = mel_spectrogram(clip, cfg);
    const std::string stem = fs::path(e.audio_path).stem().string();
    save_mel(mel, (fs::path(options.out_dir) / (stem + ".mels")).string());
  });
}

FitResult train_run(const TrainRunOptions& options) {
  KeyValues kv = resolve_config(options.config_file, options.overrides);
  StageConfig stage = consume_stage_config(kv);
  ModelConfig model_cfg = stage.model;
  TrainConfig train_cfg = stage.train;
  AdamConfig adam_cfg = stage.adam;
  train_cfg.seed = options.seed;

  const std::string symbols_path =
      options.symbols_path.empty()
          ? (fs::path(options.manifest_path).parent_path() / "symbols.txt").string()
          : options.symbols_path;
  const SymbolTable table = SymbolTable::load(symbols_path);
  model_cfg.vocab_size = table.size();
  validate_model_config(model_cfg);

  NamedTensors params;
  if (!options.warm_start.empty()) {
    // Fail fast on incompatible checkpoints, before any feature loading.
    const Checkpoint src = load_checkpoint(options.warm_start);
    TransferSpec spec;
    spec.embedding_seed = options.seed;
    params = surgery(src, table, spec, model_cfg);
  } else {
    params = init_parameters(model_cfg, options.seed);
  }

  const auto items = load_training_items(options.manifest_path, options.features_dir, table,
                                         model_cfg.n_mels);

  FitResult result = fit(items, std::move(params), model_cfg, train_cfg, adam_cfg, table,
                         options.out_dir, options.progress);

  if (!options.out_dir.empty()) {
    export_loss_plot(result.records, (fs::path(options.out_dir) / "loss_log.csv").string(),
                     (fs::path(options.out_dir) / "loss_curve.svg").string());
    // Teacher-forced alignment of the first utterance, for visual checks.
    ForwardOptions fo;
    const auto tf = forward_teacher_forced(items[0].symbols, items[0].mel,
                                           result.checkpoint.tensors, model_cfg, fo);
    make_dirs((fs::path(options.out_dir) / "alignments").string());
    save_alignment_pgm(tf.output.alignment,
                       (fs::path(options.out_dir) / "alignments" / "final.pgm").string());
    save_alignment_csv(tf.output.alignment,
                       (fs::path(options.out_dir) / "alignments" / "final.csv").string());
  }
  return result;
}

void synth_run(const SynthRunOptions& options) {
  require(!options.text.empty(), LRT_E_EMPTY_TEXT, "no text to synthesize");
  require(options.vocoder == "griffinlim" || options.vocoder == "flow", LRT_E_CONFIG,
          "vocoder must be 'griffinlim' or 'flow'");
  require(options.gl_iters >= 1, LRT_E_CONFIG, "gl_iters must be >= 1");

  KeyValues kv = resolve_config(options.config_file, options.overrides);
  FeatureConfig fcfg = consume_stage_config(kv).features;

  const Checkpoint ckpt = load_checkpoint(options.checkpoint_path);
  ModelConfig model_cfg = ckpt.model_cfg;
  validate_parameters(ckpt.model_tensors(), model_cfg);

  const SymbolSequence symbols = normalize_text(options.text, ckpt.vocab);
  const DecoderOutput out = infer(symbols, ckpt.model_tensors(), model_cfg, options.seed);

  MelSpectrogram mel;
  fcfg.n_mels = static_cast<int>(model_cfg.n_mels);
  mel.config = fcfg;
  mel.values = out.mel_after;

  AudioClip clip;
  if (options.vocoder == "flow") {
    require(!options.flow_checkpoint.empty(), LRT_E_CONFIG,
            "flow vocoder needs --flow-ckpt");
    const auto [flow_params, flow_cfg] = load_flow_checkpoint(options.flow_checkpoint);
    require(flow_cfg.mel_cond_dim == model_cfg.n_mels, LRT_E_INCOMPATIBLE_ARCHITECTURE,
            "flow conditioning dim != model n_mels");
    clip = flow_synthesize(mel, flow_params, flow_cfg, options.seed);
  } else {
    clip = griffin_lim(mel, options.gl_iters, fcfg).audio;
  }
  save_wav(clip, options.out_wav);

  if (!options.alignment_out.empty()) {
    if (options.alignment_out.size() >= 4 &&
        options.alignment_out.substr(options.alignment_out.size() - 4) == ".pgm") {
      save_alignment_pgm(out.alignment, options.alignment_out);
    } else {
      save_alignment_csv(out.alignment, options.alignment_out);
    }
  }
}

namespace {

bool stage_done(const fs::path& run_dir, const char* stage) {
  return fs::exists(run_dir / (std::string(".stamp_") + stage));
}

void mark_stage(const fs::path& run_dir, const char* stage) {
  write_file((run_dir / (std::string(".stamp_") + stage)).string(),
             std::string(stage) + "\n");
}

template <typename F>
void run_stage(const fs::path& run_dir, const char* stage, bool verbose, F&& body) {
  if (stage_done(run_dir, stage)) {
    if (verbose) std::fprintf(stderr, "[pipeline] %s: already done, skipping\n", stage);
    return;
  }
  if (verbose) std::fprintf(stderr, "[pipeline] %s: running\n", stage);
  try {
    body();
  } catch (const Error& e) {
    fail(e.code(), std::string(stage) + ": " + e.what());
  }
  mark_stage(run_dir, stage);
}

}  // namespace

void pipeline_run(const PipelineOptions& options) {
  require(!options.run_dir.empty(), LRT_E_CONFIG, "run_dir is required");
  KeyValues kv = resolve_config(options.config_file, options.overrides);

  const auto take = [&kv](const char* key, const std::string& fallback) {
    const auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    const std::string v = it->second;
    kv.erase(it);
    return v;
  };

  const std::string in_dir = take("pipeline.in_dir", "");
  require(!in_dir.empty(), LRT_E_CONFIG, "pipeline.in_dir is required");
  const std::string synth_text = take("pipeline.synth_text", "");
  const std::string warm_start = take("pipeline.warm_start", "");
  const int target_rate = static_cast<int>(std::stoull(take("prep.rate", "22050")));
  const double max_silence = std::stod(take("prep.max_silence", "0.5"));
  const double max_chunk = std::stod(take("prep.max_chunk", "10"));
  const int gl_iters = static_cast<int>(std::stoull(take("synth.gl_iters", "60")));

  // The remaining keys drive features/model/train and are re-validated by
  // each stage; keep them as override strings.
  std::vector<std::string> stage_overrides;
  for (const auto& [key, value] : kv) stage_overrides.push_back(key + "=" + value);

  const fs::path run_dir(options.run_dir);
  make_dirs(options.run_dir);
  write_file((run_dir / "RUNFMT").string(), "RUNFMT=1\n");

  const std::string corpus_dir = (run_dir / "corpus").string();
  const std::string features_dir = (run_dir / "features").string();
  const std::string train_dir = (run_dir / "train").string();
  const std::string manifest = (run_dir / "corpus" / "manifest.tsv").string();

  run_stage(run_dir, "prep", options.verbose, [&] {
    PrepOptions popt;
    popt.target_rate_hz = target_rate;
    popt.max_internal_silence_sec = max_silence;
    popt.max_chunk_sec = max_chunk;
    prep_run(in_dir, corpus_dir, popt);
  });

  run_stage(run_dir, "features", options.verbose, [&] {
    FeaturesRunOptions fopt;
    fopt.manifest_path = manifest;
    fopt.out_dir = features_dir;
    fopt.overrides = stage_overrides;
    fopt.overrides.push_back("features.sample_rate_hz=" + std::to_string(target_rate));
    features_run(fopt);
  });

  run_stage(run_dir, "train", options.verbose, [&] {
    TrainRunOptions topt;
    topt.manifest_path = manifest;
    topt.features_dir = features_dir;
    topt.out_dir = train_dir;
    topt.warm_start = warm_start;
    topt.overrides = stage_overrides;
    topt.seed = options.seed;
    if (options.verbose) {
      topt.progress = [](const LossRecord& r) {
        if (r.has_val) {
          std::fprintf(stderr, "[train] iter %llu loss %.5f val %.5f lr %.2e\n",
                       static_cast<unsigned long long>(r.iteration), r.train_loss, r.val_loss,
                       r.lr);
        } else if (r.iteration % 50 == 0) {
          std::fprintf(stderr, "[train] iter %llu loss %.5f lr %.2e\n",
                       static_cast<unsigned long long>(r.iteration), r.train_loss, r.lr);
        }
      };
    }
    train_run(topt);
  });

  run_stage(run_dir, "synth", options.verbose, [&] {
    SynthRunOptions sopt;
    sopt.checkpoint_path = (fs::path(train_dir) / "final.lrtt").string();
    sopt.text = synth_text.empty() ? load_manifest(manifest).front().text : synth_text;
    sopt.out_wav = (run_dir / "synth.wav").string();
    sopt.gl_iters = gl_iters;
    sopt.alignment_out = (run_dir / "synth_alignment.pgm").string();
    sopt.overrides = stage_overrides;
    sopt.overrides.push_back("features.sample_rate_hz=" + std::to_string(target_rate));
    sopt.seed = options.seed;
    synth_run(sopt);
  });
}

}  // namespace lrt

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

// lowres-tts command line front end. Everything goes through the public C
// API; runtime failures print one machine-parseable "error_code: message"
// line and exit 1, usage problems exit 2.

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "lowres_tts/lowres_tts.h"

namespace {

int report(lrt_status rc) {
  if (rc == LRT_OK) return 0;
  std::fprintf(stderr, "%s: %s\n", lrt_status_name(rc), lrt_last_error());
  return 1;
}

std::vector<const char*> as_cstrs(const std::vector<std::string>& v) {
  std::vector<const char*> out;
  out.reserve(v.size());
  for (const auto& s : v) out.push_back(s.c_str());
  return out;
}

void print_progress(uint64_t iteration, double train_loss, double val_loss, double lr,
                    void* user) {
  const bool verbose = user != nullptr && *static_cast<bool*>(user);
  const bool has_val = val_loss == val_loss;  // not NaN
  if (has_val) {
    std::fprintf(stderr, "iter %8llu  train %.6f  val %.6f  lr %.3e\n",
                 static_cast<unsigned long long>(iteration), train_loss, val_loss, lr);
  } else if (verbose && iteration % 50 == 0) {
    std::fprintf(stderr, "iter %8llu  train %.6f  lr %.3e\n",
                 static_cast<unsigned long long>(iteration), train_loss, lr);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lowres-tts: low-resource TTS fine-tuning toolkit"};
  app.require_subcommand(1);

  uint64_t seed = 0;
  bool verbose = false;
  app.add_option("--seed", seed, "Seed for every random choice")->capture_default_str();
  app.add_flag("--verbose", verbose, "Verbose progress output");

  int exit_code = 0;

  // ---- prep ------------------------------------------------------------
  std::string prep_in, prep_out;
  int prep_rate = 22050;
  double prep_max_silence = 0.5, prep_max_chunk = 10.0;
  int prep_threads = 0;
  auto* prep = app.add_subcommand("prep", "Prepare a raw wav+txt corpus for training");
  prep->add_option("--in", prep_in, "Directory of <stem>.wav + <stem>.txt pairs")->required();
  prep->add_option("--out", prep_out, "Output corpus directory")->required();
  prep->add_option("--rate", prep_rate, "Target sample rate in Hz")->capture_default_str();
  prep->add_option("--max-silence", prep_max_silence, "Interior silence cap in seconds")
      ->capture_default_str();
  prep->add_option("--max-chunk", prep_max_chunk, "Maximum chunk duration in seconds")
      ->capture_default_str();
  prep->add_option("--threads", prep_threads, "Worker threads (0 = auto)")
      ->capture_default_str();
  prep->callback([&] {
    lrt_prep_options opt;
    lrt_prep_options_default(&opt);
    opt.target_rate_hz = prep_rate;
    opt.max_internal_silence_sec = prep_max_silence;
    opt.max_chunk_sec = prep_max_chunk;
    opt.threads = prep_threads;
    exit_code = report(lrt_prep_run(prep_in.c_str(), prep_out.c_str(), &opt));
  });

  // ---- stats -----------------------------------------------------------
  std::string stats_manifest;
  auto* stats = app.add_subcommand("stats", "Print corpus statistics from a manifest");
  stats->add_option("--manifest", stats_manifest, "Manifest file")->required();
  stats->callback([&] {
    char* text = nullptr;
    const lrt_status rc = lrt_manifest_stats_text(stats_manifest.c_str(), &text);
    if (rc == LRT_OK) {
      std::fputs(text, stdout);
      lrt_string_free(text);
    }
    exit_code = report(rc);
  });

  // ---- features ----------------------------------------------------------
  std::string feat_manifest, feat_out, feat_config;
  int feat_threads = 0;
  auto* features = app.add_subcommand("features", "Extract log-mel feature caches");
  features->add_option("--manifest", feat_manifest, "Manifest file")->required();
  features->add_option("--out", feat_out, "Feature cache directory")->required();
  features->add_option("--config", feat_config, "key=value config file");
  features->add_option("--threads", feat_threads, "Worker threads (0 = auto)")
      ->capture_default_str();
  features->callback([&] {
    exit_code = report(lrt_features_run(feat_manifest.c_str(), feat_out.c_str(),
                                        feat_config.empty() ? nullptr : feat_config.c_str(),
                                        feat_threads));
  });

  // ---- train -------------------------------------------------------------
  std::string train_manifest, train_features, train_out, train_warm, train_config,
      train_symbols;
  std::vector<std::string> train_sets;
  auto* train = app.add_subcommand("train", "Train the spectrogram predictor");
  train->add_option("--manifest", train_manifest, "Manifest file")->required();
  train->add_option("--features", train_features, "Feature cache directory")->required();
  train->add_option("--out", train_out, "Checkpoint output directory")->required();
  train->add_option("--warm-start", train_warm, "Source checkpoint for transfer surgery");
  train->add_option("--config", train_config, "key=value config file");
  train->add_option("--symbols", train_symbols,
                    "Symbol table (default: symbols.txt beside the manifest)");
  train->add_option("--set", train_sets, "Extra key=value overrides")->take_all();
  train->callback([&] {
    lrt_train_options opt;
    lrt_train_options_default(&opt);
    opt.manifest_path = train_manifest.c_str();
    opt.features_dir = train_features.c_str();
    opt.out_dir = train_out.c_str();
    opt.warm_start = train_warm.empty() ? nullptr : train_warm.c_str();
    opt.config_file = train_config.empty() ? nullptr : train_config.c_str();
    opt.symbols_path = train_symbols.empty() ? nullptr : train_symbols.c_str();
    const auto overrides = as_cstrs(train_sets);
    opt.overrides = overrides.data();
    opt.n_overrides = overrides.size();
    opt.seed = seed;
    opt.progress = print_progress;
    opt.progress_user = &verbose;
    exit_code = report(lrt_train_run(&opt));
  });

  // ---- synth -------------------------------------------------------------
  std::string synth_ckpt, synth_text, synth_out, synth_vocoder = "griffinlim";
  std::string synth_flow_ckpt, synth_align_out, synth_config;
  int synth_gl_iters = 60;
  auto* synth = app.add_subcommand("synth", "Synthesize speech from text");
  synth->add_option("--ckpt", synth_ckpt, "Model checkpoint")->required();
  synth->add_option("--text", synth_text, "Input text (UTF-8)")->required();
  synth->add_option("--out", synth_out, "Output WAV path")->required();
  synth->add_option("--vocoder", synth_vocoder, "griffinlim or flow")->capture_default_str();
  synth->add_option("--flow-ckpt", synth_flow_ckpt, "Flow vocoder checkpoint");
  synth->add_option("--gl-iters", synth_gl_iters, "Griffin-Lim iterations")
      ->capture_default_str();
  synth->add_option("--align-out", synth_align_out, "Alignment output (.csv or .pgm)");
  synth->add_option("--config", synth_config, "key=value config file (features.*)");
  synth->callback([&] {
    lrt_synth_options opt;
    lrt_synth_options_default(&opt);
    opt.checkpoint_path = synth_ckpt.c_str();
    opt.text = synth_text.c_str();
    opt.out_wav = synth_out.c_str();
    opt.vocoder = synth_vocoder.c_str();
    opt.flow_checkpoint = synth_flow_ckpt.empty() ? nullptr : synth_flow_ckpt.c_str();
    opt.gl_iters = synth_gl_iters;
    opt.alignment_out = synth_align_out.empty() ? nullptr : synth_align_out.c_str();
    opt.config_file = synth_config.empty() ? nullptr : synth_config.c_str();
    opt.seed = seed;
    exit_code = report(lrt_synth_run(&opt));
  });

  // ---- align-score ---------------------------------------------------------
  std::string align_path;
  double align_band = 0.15;
  auto* align = app.add_subcommand("align-score", "Score an alignment's diagonality");
  align->add_option("--alignment", align_path, "Alignment file (.csv or .pgm)")->required();
  align->add_option("--band", align_band, "Diagonal band half-width")->capture_default_str();
  align->callback([&] {
    double score = 0.0;
    const lrt_status rc = lrt_alignment_score(align_path.c_str(), align_band, &score);
    if (rc == LRT_OK) std::printf("diagonality=%.6f\n", score);
    exit_code = report(rc);
  });

  // ---- mos -----------------------------------------------------------------
  std::string mos_scores;
  double mos_confidence = 0.95, mos_half_width = 0.0;
  uint64_t mos_n = 0;
  bool mos_invert = false;
  auto* mos = app.add_subcommand("mos", "Aggregate MOS ratings or invert a CI");
  mos->add_option("--scores", mos_scores, "CSV rater_id,utterance_id,dimension,score");
  mos->add_option("--confidence", mos_confidence, "Confidence level")->capture_default_str();
  mos->add_flag("--invert", mos_invert, "Compute the implied rater std-dev");
  mos->add_option("--n", mos_n, "Rater count (invert mode)");
  mos->add_option("--half-width", mos_half_width, "CI half width (invert mode)");
  mos->callback([&] {
    if (mos_invert) {
      double s = 0.0;
      const lrt_status rc = lrt_mos_implied_stddev(mos_n, mos_half_width, mos_confidence, &s);
      if (rc == LRT_OK) std::printf("implied_stddev=%.6f\n", s);
      exit_code = report(rc);
      return;
    }
    if (mos_scores.empty()) {
      std::fprintf(stderr, "mos: --scores is required unless --invert is given\n%s",
                   mos->help().c_str());
      exit_code = 2;
      return;
    }
    char* text = nullptr;
    const lrt_status rc = lrt_mos_report_text(mos_scores.c_str(), mos_confidence, &text);
    if (rc == LRT_OK) {
      std::fputs(text, stdout);
      lrt_string_free(text);
    }
    exit_code = report(rc);
  });

  // ---- surgery ---------------------------------------------------------------
  std::string surg_src, surg_symbols, surg_out, surg_exclude;
  bool surg_report = false;
  auto* surgery = app.add_subcommand("surgery", "Transfer-learning checkpoint surgery");
  surgery->add_option("--src", surg_src, "Source checkpoint")->required();
  surgery->add_option("--symbols", surg_symbols, "Target symbol table");
  surgery->add_option("--out", surg_out, "Output checkpoint");
  surgery->add_option("--exclude", surg_exclude,
                      "Comma-separated name prefixes (default embedding.,optimizer.)");
  surgery->add_flag("--report", surg_report, "Print the per-tensor plan and exit");
  surgery->callback([&] {
    const char* exclude = surg_exclude.empty() ? nullptr : surg_exclude.c_str();
    if (surg_report) {
      char* text = nullptr;
      const lrt_status rc = lrt_compat_report(
          surg_src.c_str(), surg_symbols.empty() ? nullptr : surg_symbols.c_str(), exclude,
          &text);
      if (rc == LRT_OK) {
        std::fputs(text, stdout);
        lrt_string_free(text);
      }
      exit_code = report(rc);
      return;
    }
    if (surg_symbols.empty() || surg_out.empty()) {
      std::fprintf(stderr, "surgery: --symbols and --out are required\n%s",
                   surgery->help().c_str());
      exit_code = 2;
      return;
    }
    exit_code = report(lrt_surgery_run(surg_src.c_str(), surg_symbols.c_str(),
                                       surg_out.c_str(), exclude, seed));
  });

  // ---- pipeline ----------------------------------------------------------------
  std::string pipe_config, pipe_run_dir;
  std::vector<std::string> pipe_sets;
  auto* pipeline = app.add_subcommand("pipeline", "Run prep/features/train/synth end to end");
  pipeline->add_option("--config", pipe_config, "key=value pipeline config")->required();
  pipeline->add_option("--run-dir", pipe_run_dir, "Run directory (stamps, artifacts)")
      ->required();
  pipeline->add_option("--set", pipe_sets, "Extra key=value overrides")->take_all();
  pipeline->callback([&] {
    lrt_pipeline_options opt;
    lrt_pipeline_options_default(&opt);
    opt.config_file = pipe_config.c_str();
    opt.run_dir = pipe_run_dir.c_str();
    const auto overrides = as_cstrs(pipe_sets);
    opt.overrides = overrides.data();
    opt.n_overrides = overrides.size();
    opt.seed = seed;
    opt.verbose = verbose ? 1 : 0;
    exit_code = report(lrt_pipeline_run(&opt));
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "%s\n\n%s", e.what(), app.help().c_str());
    return 2;
  }
  return exit_code;
}

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
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "lowres_tts/lowres_tts.h"

// Shared-library surface checks: these tests exercise the same boundary the
// CLI uses.
#include "audio.hpp"
#include "checkpoint.hpp"
#include "corpus.hpp"
#include "io_util.hpp"
#include "model.hpp"
#include "text.hpp"

namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const char* name) {
  const auto dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

lrt::AudioClip capi_tone(double dur, int rate = 16000) {
  lrt::AudioClip clip;
  clip.sample_rate_hz = rate;
  const std::size_t n = static_cast<std::size_t>(dur * rate);
  clip.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    clip.samples[i] = 0.5 * std::sin(2.0 * M_PI * 440.0 * static_cast<double>(i) / rate);
  }
  return clip;
}

}  // namespace

TEST_CASE("status names are stable identifiers") {
  CHECK(std::string(lrt_status_name(LRT_OK)) == "OK");
  CHECK(std::string(lrt_status_name(LRT_E_FEATURES_MISSING)) == "E_FEATURES_MISSING");
  CHECK(std::string(lrt_status_name(LRT_E_EMPTY_AFTER_TRIM)) == "E_EMPTY_AFTER_TRIM");
  CHECK(std::string(lrt_status_name(LRT_E_UNKNOWN_SYMBOL)) == "E_UNKNOWN_SYMBOL");
  CHECK(lrt_version() != nullptr);
}

TEST_CASE("audio create/resample/trim through the C boundary") {
  const auto clip = capi_tone(1.0);
  lrt_audio* a = nullptr;
  REQUIRE(lrt_audio_create(clip.samples.data(), clip.samples.size(), 16000, &a) == LRT_OK);
  CHECK(lrt_audio_length(a) == clip.samples.size());
  CHECK(lrt_audio_sample_rate(a) == 16000);

  lrt_audio* resampled = nullptr;
  REQUIRE(lrt_audio_resample(a, 8000, &resampled) == LRT_OK);
  CHECK(lrt_audio_length(resampled) == 8000);
  CHECK(lrt_audio_sample_rate(resampled) == 8000);

  std::vector<double> copy(lrt_audio_length(resampled));
  REQUIRE(lrt_audio_copy_samples(resampled, copy.data(), copy.size()) == LRT_OK);
  CHECK(std::abs(copy[4000]) <= 1.0);

  lrt_vad_config vad;
  lrt_vad_config_default(&vad);
  CHECK(vad.max_internal_silence_sec == 0.5);
  CHECK(vad.threshold_db == -40.0);

  // Tone flanked by silence trims back to the tone.
  std::vector<double> padded(8000, 0.0);
  padded.insert(padded.end(), clip.samples.begin(), clip.samples.end());
  padded.insert(padded.end(), 8000, 0.0);
  lrt_audio* with_silence = nullptr;
  REQUIRE(lrt_audio_create(padded.data(), padded.size(), 16000, &with_silence) == LRT_OK);
  lrt_audio* trimmed = nullptr;
  REQUIRE(lrt_audio_trim_silence(with_silence, &vad, &trimmed) == LRT_OK);
  CHECK(std::abs(static_cast<double>(lrt_audio_length(trimmed)) / 16000.0 - 1.0) <= 0.03);

  lrt_audio_free(a);
  lrt_audio_free(resampled);
  lrt_audio_free(with_silence);
  lrt_audio_free(trimmed);
}

TEST_CASE("wav round trip and error reporting through the C boundary") {
  const auto dir = temp_dir("lrt_capi_wav");
  const auto clip = capi_tone(0.25);
  lrt_audio* a = nullptr;
  REQUIRE(lrt_audio_create(clip.samples.data(), clip.samples.size(), 16000, &a) == LRT_OK);
  const auto wav = (dir / "tone.wav").string();
  REQUIRE(lrt_audio_save_wav(a, wav.c_str()) == LRT_OK);

  lrt_audio* loaded = nullptr;
  REQUIRE(lrt_audio_load_wav(wav.c_str(), &loaded) == LRT_OK);
  CHECK(lrt_audio_length(loaded) == clip.samples.size());

  lrt_audio* missing = nullptr;
  const lrt_status rc = lrt_audio_load_wav((dir / "nope.wav").string().c_str(), &missing);
  CHECK(rc == LRT_E_IO);
  CHECK(std::strlen(lrt_last_error()) > 0);

  CHECK(lrt_audio_create(nullptr, 0, 16000, &a) == LRT_E_INVALID_ARGUMENT);

  lrt_audio_free(a);
  lrt_audio_free(loaded);
  fs::remove_all(dir);
}

TEST_CASE("manifest stats through the C boundary") {
  const auto dir = temp_dir("lrt_capi_stats");
  fs::create_directories(dir / "wavs");
  lrt::save_wav(capi_tone(3.0), (dir / "wavs" / "a.wav").string());
  lrt::save_wav(capi_tone(5.0), (dir / "wavs" / "b.wav").string());
  lrt::write_file((dir / "manifest.tsv").string(),
                  "wavs/a.wav\tक ख\nwavs/b.wav\tख ग\n");

  lrt_corpus_stats stats;
  REQUIRE(lrt_manifest_stats((dir / "manifest.tsv").string().c_str(), &stats) == LRT_OK);
  CHECK(stats.num_utterances == 2);
  CHECK(stats.total_duration_sec == doctest::Approx(8.0).epsilon(1e-9));
  CHECK(stats.word_vocab_size == 3);
  CHECK(stats.min_utterance_sec == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(stats.avg_utterance_sec == doctest::Approx(4.0).epsilon(1e-9));

  char* text = nullptr;
  REQUIRE(lrt_manifest_stats_text((dir / "manifest.tsv").string().c_str(), &text) == LRT_OK);
  CHECK(std::string(text).find("num_utterances=2") != std::string::npos);
  lrt_string_free(text);
  fs::remove_all(dir);
}

TEST_CASE("surgery and compat report through the C boundary") {
  const auto dir = temp_dir("lrt_capi_surgery");

  // Source checkpoint with a 6-codepoint vocab.
  lrt::ModelConfig cfg;
  cfg.embed_dim = 4;
  cfg.encoder_conv_layers = 1;
  cfg.encoder_kernel = 3;
  cfg.encoder_rnn_dim = 3;
  cfg.attention_dim = 4;
  cfg.location_filters = 2;
  cfg.location_kernel = 3;
  cfg.decoder_rnn_dim = 5;
  cfg.prenet_dim = 3;
  cfg.n_mels = 4;
  cfg.postnet_layers = 2;
  cfg.postnet_kernel = 3;
  const lrt::SymbolTable src_table({0x0915, 0x0916, 0x0917, 0x0918, 0x0919, 0x091A});
  cfg.vocab_size = src_table.size();

  lrt::Checkpoint src;
  src.model_cfg = cfg;
  src.vocab = src_table;
  src.tensors = lrt::init_parameters(cfg, 11);
  const auto src_path = (dir / "src.lrtt").string();
  lrt::save_checkpoint(src, src_path);

  const lrt::SymbolTable target({0x0920, 0x0921, 0x0922});
  target.save((dir / "symbols.txt").string());

  char* text = nullptr;
  REQUIRE(lrt_compat_report(src_path.c_str(), (dir / "symbols.txt").string().c_str(), nullptr,
                            &text) == LRT_OK);
  CHECK(std::string(text).find("REINIT embedding.weight") != std::string::npos);
  lrt_string_free(text);

  const auto out_path = (dir / "warm.lrtt").string();
  REQUIRE(lrt_surgery_run(src_path.c_str(), (dir / "symbols.txt").string().c_str(),
                          out_path.c_str(), nullptr, 9) == LRT_OK);

  lrt_checkpoint* loaded = nullptr;
  REQUIRE(lrt_checkpoint_load(out_path.c_str(), &loaded) == LRT_OK);
  CHECK(lrt_checkpoint_tensor_count(loaded) > 0);
  CHECK(lrt_checkpoint_iteration(loaded) == 0);
  bool has_embedding = false;
  for (std::size_t i = 0; i < lrt_checkpoint_tensor_count(loaded); ++i) {
    const std::string name = lrt_checkpoint_tensor_name(loaded, i);
    CHECK(name.rfind("optimizer.", 0) != 0);
    if (name == "embedding.weight") has_embedding = true;
  }
  CHECK(has_embedding);
  lrt_checkpoint_free(loaded);

  // Corrupt checkpoints surface the right code.
  lrt::write_file((dir / "junk.lrtt").string(), "not a checkpoint");
  lrt_checkpoint* junk = nullptr;
  CHECK(lrt_checkpoint_load((dir / "junk.lrtt").string().c_str(), &junk) ==
        LRT_E_CORRUPT_CHECKPOINT);
  fs::remove_all(dir);
}

TEST_CASE("evaluation entry points through the C boundary") {
  double t = 0.0;
  REQUIRE(lrt_t_quantile(0.975, 4.0, &t) == LRT_OK);
  CHECK(std::abs(t - 2.7764) <= 5e-5);

  double s = 0.0;
  REQUIRE(lrt_mos_implied_stddev(37, 0.33, 0.95, &s) == LRT_OK);
  CHECK(std::abs(s - 0.99) <= 0.01);

  const auto dir = temp_dir("lrt_capi_eval");
  lrt::write_file((dir / "scores.csv").string(),
                  "rater_id,utterance_id,dimension,score\n"
                  "r0,u0,naturalness,3\nr1,u0,naturalness,4\nr2,u0,naturalness,5\n"
                  "r0,u0,pronunciation,4\nr1,u0,pronunciation,4\nr2,u0,pronunciation,3\n");
  char* text = nullptr;
  REQUIRE(lrt_mos_report_text((dir / "scores.csv").string().c_str(), 0.95, &text) == LRT_OK);
  const std::string report(text);
  lrt_string_free(text);
  CHECK(report.find("naturalness") != std::string::npos);
  CHECK(report.find("Overall") != std::string::npos);

  // Alignment scoring from a CSV file.
  std::string csv;
  for (int i = 0; i < 10; ++i) {
    for (int j = 0; j < 10; ++j) {
      csv += (j ? "," : "");
      csv += (i == j ? "1" : "0");
    }
    csv += "\n";
  }
  lrt::write_file((dir / "align.csv").string(), csv);
  double score = 0.0;
  REQUIRE(lrt_alignment_score((dir / "align.csv").string().c_str(), 0.15, &score) == LRT_OK);
  CHECK(score == doctest::Approx(1.0).epsilon(1e-12));
  fs::remove_all(dir);
}

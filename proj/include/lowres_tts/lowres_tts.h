/* Copyright 2026 The lowres-tts authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* lowres_tts.h — C API of the lowres-tts shared library.
 *
 * The library is a desk-scale toolkit for fine-tuning a small
 * sequence-to-sequence spectrogram predictor on low-resource speech corpora:
 * corpus preparation (resampling, silence trimming, Devanagari text
 * normalization, segmentation), log-mel feature extraction, training with
 * Adam and plateau LR annealing, checkpoint surgery for transfer learning,
 * Griffin-Lim / normalizing-flow vocoding, and alignment/MOS evaluation.
 *
 * Conventions:
 *   - every fallible function returns an lrt_status; LRT_OK is 0
 *   - on failure, lrt_last_error() returns a message for the calling thread
 *   - objects are opaque handles created and released by lrt_*_free
 *   - all paths are UTF-8, all text is UTF-8
 */

#ifndef LOWRES_TTS_H
#define LOWRES_TTS_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define LRT_API __declspec(dllexport)
#else
#define LRT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lrt_status {
  LRT_OK = 0,
  LRT_E_INVALID_ARGUMENT,
  LRT_E_IO,
  LRT_E_CONFIG,
  LRT_E_INVALID_AUDIO,
  LRT_E_EMPTY_AFTER_TRIM,
  LRT_E_EMPTY_TEXT,
  LRT_E_UNKNOWN_SYMBOL,
  LRT_E_ALIGNMENT_MISMATCH,
  LRT_E_UNSPLITTABLE_SPAN,
  LRT_E_EMPTY_MANIFEST,
  LRT_E_RATE_MISMATCH,
  LRT_E_STATE_MISMATCH,
  LRT_E_NUMERICAL_DIVERGENCE,
  LRT_E_CORRUPT_CHECKPOINT,
  LRT_E_VERSION_MISMATCH,
  LRT_E_INCOMPATIBLE_ARCHITECTURE,
  LRT_E_MISSING_TENSOR,
  LRT_E_SINGULAR_TRANSFORM,
  LRT_E_EMPTY_ALIGNMENT,
  LRT_E_INSUFFICIENT_RATERS,
  LRT_E_EMPTY_LOG,
  LRT_E_FEATURES_MISSING,
  LRT_E_PIPELINE_STAGE,
  LRT_E_INTERNAL
} lrt_status;

/* Stable machine-readable name, e.g. "E_FEATURES_MISSING". */
LRT_API const char* lrt_status_name(lrt_status s);

/* Message describing the most recent failure on the calling thread. */
LRT_API const char* lrt_last_error(void);

LRT_API const char* lrt_version(void);

/* Frees strings returned through char** out-parameters. */
LRT_API void lrt_string_free(char* s);

/* ------------------------------------------------------------------ */
/* Audio                                                               */
/* ------------------------------------------------------------------ */

typedef struct lrt_audio lrt_audio;

/* Reads a mono 16-bit PCM RIFF/WAVE file; samples are mapped to [-1, 1]. */
LRT_API lrt_status lrt_audio_load_wav(const char* path, lrt_audio** out);
LRT_API lrt_status lrt_audio_save_wav(const lrt_audio* a, const char* path);
LRT_API lrt_status lrt_audio_create(const double* samples, size_t n,
                                    int sample_rate_hz, lrt_audio** out);
LRT_API void lrt_audio_free(lrt_audio* a);

LRT_API size_t lrt_audio_length(const lrt_audio* a);
LRT_API int lrt_audio_sample_rate(const lrt_audio* a);
LRT_API lrt_status lrt_audio_copy_samples(const lrt_audio* a, double* dst,
                                          size_t capacity);

/* Polyphase windowed-sinc resampling to target_rate_hz. */
LRT_API lrt_status lrt_audio_resample(const lrt_audio* a, int target_rate_hz,
                                      lrt_audio** out);

typedef struct lrt_vad_config {
  double frame_ms;                 /* analysis frame length, default 25 */
  double hop_ms;                   /* analysis hop, default 10 */
  double threshold_db;             /* rel. to clip peak, default -40 */
  double max_internal_silence_sec; /* interior silences capped, default 0.5 */
  double min_silence_run_sec;      /* shorter runs stay voiced, default 0.2 */
} lrt_vad_config;

LRT_API void lrt_vad_config_default(lrt_vad_config* cfg);

/* Removes leading/trailing silence, caps interior silences. */
LRT_API lrt_status lrt_audio_trim_silence(const lrt_audio* a,
                                          const lrt_vad_config* cfg,
                                          lrt_audio** out);

/* ------------------------------------------------------------------ */
/* Corpus preparation                                                  */
/* ------------------------------------------------------------------ */

typedef struct lrt_prep_options {
  int target_rate_hz;              /* default 22050 */
  double max_internal_silence_sec; /* default 0.5 */
  double max_chunk_sec;            /* default 10.0 */
  int threads;                     /* 0 = auto (LOWRES_TTS_THREADS caps) */
} lrt_prep_options;

LRT_API void lrt_prep_options_default(lrt_prep_options* opt);

/* Processes every <stem>.wav + <stem>.txt pair under in_dir into a
 * training-ready corpus at out_dir: chunk WAVs under out_dir/wavs,
 * manifest.tsv (lines "<relative-audio-path>\t<normalized-text>") and
 * symbols.txt. */
LRT_API lrt_status lrt_prep_run(const char* in_dir, const char* out_dir,
                                const lrt_prep_options* opt);

typedef struct lrt_corpus_stats {
  uint64_t num_utterances;
  double total_duration_sec;
  uint64_t word_vocab_size; /* distinct whitespace-separated tokens */
  double min_utterance_sec;
  double max_utterance_sec;
  double avg_utterance_sec;
} lrt_corpus_stats;

LRT_API lrt_status lrt_manifest_stats(const char* manifest_path,
                                      lrt_corpus_stats* out);

/* Aligned human-readable block followed by a machine-readable key=value
 * block. Free with lrt_string_free. */
LRT_API lrt_status lrt_manifest_stats_text(const char* manifest_path,
                                           char** text);

/* ------------------------------------------------------------------ */
/* Features                                                            */
/* ------------------------------------------------------------------ */

/* Extracts a log-mel feature cache file per manifest entry into out_dir
 * (header "MELS", u32 n_frames, u32 n_mels, u32 reserved, f32 row-major).
 * config_file may be NULL; overrides use "features.<key>=<value>" lines. */
LRT_API lrt_status lrt_features_run(const char* manifest_path,
                                    const char* out_dir,
                                    const char* config_file, int threads);

/* ------------------------------------------------------------------ */
/* Training                                                            */
/* ------------------------------------------------------------------ */

/* val_loss is NaN on iterations without a validation pass. */
typedef void (*lrt_train_progress_fn)(uint64_t iteration, double train_loss,
                                      double val_loss, double lr, void* user);

typedef struct lrt_train_options {
  const char* manifest_path;
  const char* features_dir;
  const char* symbols_path; /* NULL: <manifest dir>/symbols.txt */
  const char* out_dir;      /* checkpoints + loss log */
  const char* warm_start;   /* NULL, or source checkpoint for surgery */
  const char* config_file;  /* NULL, or key=value overrides */
  const char* const* overrides; /* extra "key=value" strings */
  size_t n_overrides;
  uint64_t seed;
  lrt_train_progress_fn progress; /* optional */
  void* progress_user;
} lrt_train_options;

LRT_API void lrt_train_options_default(lrt_train_options* opt);
LRT_API lrt_status lrt_train_run(const lrt_train_options* opt);

/* ------------------------------------------------------------------ */
/* Synthesis                                                           */
/* ------------------------------------------------------------------ */

typedef struct lrt_synth_options {
  const char* checkpoint_path;
  const char* text; /* UTF-8, normalized internally */
  const char* out_wav;
  const char* vocoder;         /* "griffinlim" (default) or "flow" */
  const char* flow_checkpoint; /* required for "flow" */
  int gl_iters;                /* default 60 */
  const char* alignment_out;   /* optional; .csv or .pgm by extension */
  const char* config_file;     /* optional; features.* keys drive vocoding */
  const char* const* overrides;
  size_t n_overrides;
  uint64_t seed; /* prenet dropout stream */
} lrt_synth_options;

LRT_API void lrt_synth_options_default(lrt_synth_options* opt);
LRT_API lrt_status lrt_synth_run(const lrt_synth_options* opt);

/* ------------------------------------------------------------------ */
/* Checkpoints and transfer surgery                                    */
/* ------------------------------------------------------------------ */

typedef struct lrt_checkpoint lrt_checkpoint;

LRT_API lrt_status lrt_checkpoint_load(const char* path, lrt_checkpoint** out);
LRT_API void lrt_checkpoint_free(lrt_checkpoint* c);
LRT_API size_t lrt_checkpoint_tensor_count(const lrt_checkpoint* c);
LRT_API const char* lrt_checkpoint_tensor_name(const lrt_checkpoint* c,
                                               size_t index);
LRT_API uint64_t lrt_checkpoint_iteration(const lrt_checkpoint* c);

/* Copies every tensor not matching an excluded prefix into a fresh model,
 * re-initializes the embedding for the target symbol table, drops optimizer
 * state, and writes the result. exclude_prefixes is a comma-separated list,
 * NULL meaning the default "embedding.,optimizer.". */
LRT_API lrt_status lrt_surgery_run(const char* src_checkpoint,
                                   const char* symbols_path,
                                   const char* out_checkpoint,
                                   const char* exclude_prefixes,
                                   uint64_t embedding_seed);

/* Dry run: per-tensor COPY / REINIT / DROP listing with shapes. */
LRT_API lrt_status lrt_compat_report(const char* src_checkpoint,
                                     const char* symbols_path,
                                     const char* exclude_prefixes,
                                     char** report_text);

/* ------------------------------------------------------------------ */
/* Evaluation                                                          */
/* ------------------------------------------------------------------ */

/* Band-mass diagonality of an alignment matrix stored as CSV or PGM. */
LRT_API lrt_status lrt_alignment_score(const char* path, double band,
                                       double* score);

/* MOS aggregation from CSV "rater_id,utterance_id,dimension,score". */
LRT_API lrt_status lrt_mos_report_text(const char* csv_path, double confidence,
                                       char** report_text);

/* Implied rater std-dev from a reported half-width (CI inversion). */
LRT_API lrt_status lrt_mos_implied_stddev(uint64_t n_raters, double half_width,
                                          double confidence,
                                          double* implied_s);

/* Student-t quantile, exposed for validation. */
LRT_API lrt_status lrt_t_quantile(double p, double dof, double* out);

/* ------------------------------------------------------------------ */
/* Pipeline                                                            */
/* ------------------------------------------------------------------ */

typedef struct lrt_pipeline_options {
  const char* config_file; /* key=value; see README for keys */
  const char* run_dir;
  const char* const* overrides;
  size_t n_overrides;
  uint64_t seed;
  int verbose;
} lrt_pipeline_options;

LRT_API void lrt_pipeline_options_default(lrt_pipeline_options* opt);

/* prep -> features -> train -> synth with stage stamp files; completed
 * stages are skipped on re-run. */
LRT_API lrt_status lrt_pipeline_run(const lrt_pipeline_options* opt);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* LOWRES_TTS_H */

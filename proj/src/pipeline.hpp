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

#pragma once

#include <string>
#include <vector>

#include "config.hpp"
#include "corpus.hpp"
#include "trainer.hpp"

namespace lrt {

// Coarse operations behind the CLI subcommands. Each resolves its
// configuration as CLI flag > config file > built-in default.

struct FeaturesRunOptions {
  std::string manifest_path;
  std::string out_dir;
  std::string config_file;  // optional
  std::vector<std::string> overrides;
  int threads = 0;
};

void features_run(const FeaturesRunOptions& options);

struct TrainRunOptions {
  std::string manifest_path;
  std::string features_dir;
  std::string symbols_path;  // empty: <manifest dir>/symbols.txt
  std::string out_dir;
  std::string warm_start;  // optional source checkpoint
  std::string config_file;
  std::vector<std::string> overrides;
  uint64_t seed = 0;
  ProgressFn progress;
};

FitResult train_run(const TrainRunOptions& options);

struct SynthRunOptions {
  std::string checkpoint_path;
  std::string text;
  std::string out_wav;
  std::string vocoder = "griffinlim";  // or "flow"
  std::string flow_checkpoint;
  int gl_iters = 60;
  std::string alignment_out;  // optional, .csv or .pgm
  std::string config_file;
  std::vector<std::string> overrides;
  uint64_t seed = 0;
};

void synth_run(const SynthRunOptions& options);

struct PipelineOptions {
  std::string config_file;
  std::string run_dir;
  std::vector<std::string> overrides;
  uint64_t seed = 0;
  bool verbose = false;
};

// prep -> features -> train -> synth with stamp files under run_dir; stages
// whose stamps exist are skipped, so interrupted runs resume.
void pipeline_run(const PipelineOptions& options);

}  // namespace lrt

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

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "model.hpp"
#include "tensor.hpp"
#include "text.hpp"

namespace lrt {

// Checkpoint file ("LRTT"): magic, u32 version, u64 meta length, UTF-8
// "key: value" meta block with a tensor directory, then raw little-endian
// f32 payloads in directory order.
constexpr uint32_t kCheckpointVersion = 1;

// The underlying container: arbitrary meta keys plus named f32 tensors. The
// model checkpoint and the flow vocoder checkpoint both serialize this way.
struct TensorContainer {
  std::map<std::string, std::string> meta;
  NamedTensors tensors;
};

void save_container(const TensorContainer& container, const std::string& path);
TensorContainer load_container(const std::string& path);

struct Checkpoint {
  uint32_t format_version = kCheckpointVersion;
  ModelConfig model_cfg;
  SymbolTable vocab;
  uint64_t iteration = 0;
  uint64_t seed = 0;
  NamedTensors tensors;  // model parameters plus optional "optimizer.*" state

  // Model parameters only, optimizer state stripped.
  NamedTensors model_tensors() const;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

struct TransferSpec {
  std::vector<std::string> exclude_name_prefixes = {"embedding.", "optimizer."};
  double embedding_half_range = 0.1;
  uint64_t embedding_seed = 0;
};

// Warm-start surgery: copies every tensor whose name matches no excluded
// prefix, re-initializes the embedding for the target vocabulary, and never
// carries optimizer state. The source must match target_cfg in every field
// except vocab_size.
NamedTensors surgery(const Checkpoint& src, const SymbolTable& target_vocab,
                     const TransferSpec& spec, const ModelConfig& target_cfg);

// Dry run of surgery: per-tensor COPY / REINIT / DROP decisions with shapes;
// shape conflicts are flagged in the text instead of raising.
std::string compat_report(const Checkpoint& src, const ModelConfig& target_cfg,
                          const TransferSpec& spec);

}  // namespace lrt

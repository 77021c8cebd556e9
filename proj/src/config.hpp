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

#include <map>
#include <string>
#include <vector>

#include "features.hpp"
#include "model.hpp"
#include "trainer.hpp"
#include "vocoder.hpp"

namespace lrt {

// key=value configuration text: one pair per line, '#' comments, blank lines
// ignored. Unknown keys are rejected so typos fail loudly.
using KeyValues = std::map<std::string, std::string>;

KeyValues parse_keyvalues(const std::string& text);
KeyValues load_config_file(const std::string& path);

// Later entries win; each override is a "key=value" string.
void apply_overrides(KeyValues& kv, const std::vector<std::string>& overrides);

// Applies "model.*", "features.*", "train.*", "adam.*", "flow.*" keys onto
// the corresponding configs, consuming them from kv. Keys the caller did not
// consume afterwards should be reported through reject_unknown.
void apply_model_keys(KeyValues& kv, ModelConfig& cfg);
void apply_feature_keys(KeyValues& kv, FeatureConfig& cfg);
void apply_train_keys(KeyValues& kv, TrainConfig& train, AdamConfig& adam);
void apply_flow_keys(KeyValues& kv, FlowConfig& cfg);

void reject_unknown(const KeyValues& kv);

}  // namespace lrt

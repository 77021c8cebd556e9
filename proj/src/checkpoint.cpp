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

#include "checkpoint.hpp"

#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "error.hpp"
#include "io_util.hpp"
#include "rng.hpp"

namespace lrt {
namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void meta_line(std::string& out, const std::string& key, const std::string& value) {
  out += key;
  out += ": ";
  out += value;
  out += '\n';
}

std::string model_cfg_meta(const ModelConfig& c) {
  std::string m;
  meta_line(m, "model.vocab_size", std::to_string(c.vocab_size));
  meta_line(m, "model.embed_dim", std::to_string(c.embed_dim));
  meta_line(m, "model.encoder_conv_layers", std::to_string(c.encoder_conv_layers));
  meta_line(m, "model.encoder_kernel", std::to_string(c.encoder_kernel));
  meta_line(m, "model.encoder_rnn_dim", std::to_string(c.encoder_rnn_dim));
  meta_line(m, "model.attention_dim", std::to_string(c.attention_dim));
  meta_line(m, "model.location_filters", std::to_string(c.location_filters));
  meta_line(m, "model.location_kernel", std::to_string(c.location_kernel));
  meta_line(m, "model.decoder_rnn_dim", std::to_string(c.decoder_rnn_dim));
  meta_line(m, "model.prenet_dim", std::to_string(c.prenet_dim));
  meta_line(m, "model.n_mels", std::to_string(c.n_mels));
  meta_line(m, "model.postnet_layers", std::to_string(c.postnet_layers));
  meta_line(m, "model.postnet_kernel", std::to_string(c.postnet_kernel));
  meta_line(m, "model.gate_threshold", fmt_double(c.gate_threshold));
  meta_line(m, "model.decoder_dropout", fmt_double(c.decoder_dropout));
  meta_line(m, "model.attention_dropout", fmt_double(c.attention_dropout));
  meta_line(m, "model.max_decoder_steps", std::to_string(c.max_decoder_steps));
  return m;
}

struct MetaMap {
  std::map<std::string, std::string> kv;

  const std::string& get(const std::string& key) const {
    const auto it = kv.find(key);
    require(it != kv.end(), LRT_E_CORRUPT_CHECKPOINT, "checkpoint meta missing " + key);
    return it->second;
  }
  uint64_t get_u64(const std::string& key) const { return std::stoull(get(key)); }
  double get_f64(const std::string& key) const { return std::stod(get(key)); }
};

ModelConfig model_cfg_from_meta(const MetaMap& m) {
  ModelConfig c;
  c.vocab_size = m.get_u64("model.vocab_size");
  c.embed_dim = m.get_u64("model.embed_dim");
  c.encoder_conv_layers = m.get_u64("model.encoder_conv_layers");
  c.encoder_kernel = m.get_u64("model.encoder_kernel");
  c.encoder_rnn_dim = m.get_u64("model.encoder_rnn_dim");
  c.attention_dim = m.get_u64("model.attention_dim");
  c.location_filters = m.get_u64("model.location_filters");
  c.location_kernel = m.get_u64("model.location_kernel");
  c.decoder_rnn_dim = m.get_u64("model.decoder_rnn_dim");
  c.prenet_dim = m.get_u64("model.prenet_dim");
  c.n_mels = m.get_u64("model.n_mels");
  c.postnet_layers = m.get_u64("model.postnet_layers");
  c.postnet_kernel = m.get_u64("model.postnet_kernel");
  c.gate_threshold = m.get_f64("model.gate_threshold");
  c.decoder_dropout = m.get_f64("model.decoder_dropout");
  c.attention_dropout = m.get_f64("model.attention_dropout");
  c.max_decoder_steps = m.get_u64("model.max_decoder_steps");
  return c;
}

// Fields compared by surgery; vocab_size is exempt.
std::vector<std::pair<std::string, std::string>> cfg_field_diffs(const ModelConfig& a,
                                                                 const ModelConfig& b) {
  std::vector<std::pair<std::string, std::string>> diffs;
  const auto cmp_u = [&](const char* name, std::size_t x, std::size_t y) {
    if (x != y) diffs.emplace_back(name, std::to_string(x) + " vs " + std::to_string(y));
  };
  cmp_u("embed_dim", a.embed_dim, b.embed_dim);
  cmp_u("encoder_conv_layers", a.encoder_conv_layers, b.encoder_conv_layers);
  cmp_u("encoder_kernel", a.encoder_kernel, b.encoder_kernel);
  cmp_u("encoder_rnn_dim", a.encoder_rnn_dim, b.encoder_rnn_dim);
  cmp_u("attention_dim", a.attention_dim, b.attention_dim);
  cmp_u("location_filters", a.location_filters, b.location_filters);
  cmp_u("location_kernel", a.location_kernel, b.location_kernel);
  cmp_u("decoder_rnn_dim", a.decoder_rnn_dim, b.decoder_rnn_dim);
  cmp_u("prenet_dim", a.prenet_dim, b.prenet_dim);
  cmp_u("n_mels", a.n_mels, b.n_mels);
  cmp_u("postnet_layers", a.postnet_layers, b.postnet_layers);
  cmp_u("postnet_kernel", a.postnet_kernel, b.postnet_kernel);
  return diffs;
}

bool name_excluded(const std::string& name, const TransferSpec& spec) {
  for (const auto& prefix : spec.exclude_name_prefixes) {
    if (!prefix.empty() && name.rfind(prefix, 0) == 0) return true;
  }
  return false;
}

}  // namespace

NamedTensors Checkpoint::model_tensors() const {
  NamedTensors out;
  for (const auto& [name, t] : tensors) {
    if (name.rfind("optimizer.", 0) != 0) out.emplace(name, t);
  }
  return out;
}

void save_container(const TensorContainer& container, const std::string& path) {
  std::string meta;
  for (const auto& [key, value] : container.meta) meta_line(meta, key, value);

  // Tensor directory, offsets into the payload section.
  uint64_t offset = 0;
  for (const auto& [name, t] : container.tensors) {
    meta_line(meta, "tensor", name + " f32 " + t.shape_str() + " " + std::to_string(offset));
    offset += t.numel() * 4;
  }

  std::string out;
  out.reserve(16 + meta.size() + offset);
  out += "LRTT";
  put_u32(out, kCheckpointVersion);
  put_u64(out, meta.size());
  out += meta;
  for (const auto& [name, t] : container.tensors) {
    (void)name;
    for (double v : t.data) put_f32(out, static_cast<float>(v));
  }
  write_file(path, out);
}

TensorContainer load_container(const std::string& path) {
  const auto bytes = read_file(path);
  require(bytes.size() >= 16, LRT_E_CORRUPT_CHECKPOINT, path + ": truncated header");
  require(std::memcmp(bytes.data(), "LRTT", 4) == 0, LRT_E_CORRUPT_CHECKPOINT,
          path + ": bad magic");
  const uint32_t version = get_u32(bytes.data() + 4);
  require(version == kCheckpointVersion, LRT_E_VERSION_MISMATCH,
          path + ": unsupported checkpoint version " + std::to_string(version));
  const uint64_t meta_len = get_u64(bytes.data() + 8);
  require(16 + meta_len <= bytes.size(), LRT_E_CORRUPT_CHECKPOINT,
          path + ": meta block extends past end of file");

  const std::string meta(reinterpret_cast<const char*>(bytes.data() + 16), meta_len);
  const std::size_t payload_base = 16 + static_cast<std::size_t>(meta_len);

  TensorContainer container;
  struct DirEntry {
    std::string name;
    std::vector<std::size_t> shape;
    uint64_t offset;
  };
  std::vector<DirEntry> directory;

  std::istringstream in(meta);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto colon = line.find(": ");
    require(colon != std::string::npos, LRT_E_CORRUPT_CHECKPOINT, path + ": bad meta line");
    const std::string key = line.substr(0, colon);
    const std::string value = line.substr(colon + 2);
    if (key == "tensor") {
      std::istringstream fields(value);
      DirEntry e;
      std::string dtype, shape_str;
      fields >> e.name >> dtype >> shape_str >> e.offset;
      require(!fields.fail() && dtype == "f32", LRT_E_CORRUPT_CHECKPOINT,
              path + ": bad tensor directory entry");
      std::size_t pos = 0;
      while (pos < shape_str.size()) {
        auto next = shape_str.find('x', pos);
        if (next == std::string::npos) next = shape_str.size();
        e.shape.push_back(std::stoull(shape_str.substr(pos, next - pos)));
        pos = next + 1;
      }
      directory.push_back(std::move(e));
    } else {
      container.meta[key] = value;
    }
  }

  for (const auto& e : directory) {
    Tensor t(e.shape);
    const std::size_t begin = payload_base + static_cast<std::size_t>(e.offset);
    require(begin + t.numel() * 4 <= bytes.size(), LRT_E_CORRUPT_CHECKPOINT,
            path + ": tensor " + e.name + " extends past end of file");
    for (std::size_t i = 0; i < t.numel(); ++i) {
      t.data[i] = static_cast<double>(get_f32(bytes.data() + begin + i * 4));
    }
    require(container.tensors.emplace(e.name, std::move(t)).second, LRT_E_CORRUPT_CHECKPOINT,
            path + ": duplicate tensor " + e.name);
  }
  return container;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  TensorContainer container;
  container.meta["format"] = "lrtt";
  container.meta["iteration"] = std::to_string(ckpt.iteration);
  container.meta["seed"] = std::to_string(ckpt.seed);
  {
    std::string vocab;
    for (uint32_t cp : ckpt.vocab.codepoints()) {
      if (!vocab.empty()) vocab += ' ';
      char buf[16];
      std::snprintf(buf, sizeof buf, "U+%04X", cp);
      vocab += buf;
    }
    container.meta["vocab"] = vocab;
  }
  {
    std::istringstream in(model_cfg_meta(ckpt.model_cfg));
    std::string line;
    while (std::getline(in, line)) {
      const auto colon = line.find(": ");
      container.meta[line.substr(0, colon)] = line.substr(colon + 2);
    }
  }
  container.tensors = ckpt.tensors;
  save_container(container, path);
}

Checkpoint load_checkpoint(const std::string& path) {
  TensorContainer container = load_container(path);

  Checkpoint ckpt;
  MetaMap mm;
  mm.kv = container.meta;
  require(mm.get("format") == "lrtt", LRT_E_CORRUPT_CHECKPOINT,
          path + ": not a model checkpoint");
  ckpt.iteration = mm.get_u64("iteration");
  ckpt.seed = mm.get_u64("seed");
  ckpt.model_cfg = model_cfg_from_meta(mm);
  {
    std::vector<uint32_t> cps;
    std::istringstream vs(mm.get("vocab"));
    std::string tok;
    while (vs >> tok) {
      require(tok.size() > 2 && tok[0] == 'U' && tok[1] == '+', LRT_E_CORRUPT_CHECKPOINT,
              path + ": bad vocab entry " + tok);
      cps.push_back(static_cast<uint32_t>(std::stoul(tok.substr(2), nullptr, 16)));
    }
    ckpt.vocab = SymbolTable(std::move(cps));
  }
  ckpt.tensors = std::move(container.tensors);
  return ckpt;
}

NamedTensors surgery(const Checkpoint& src, const SymbolTable& target_vocab,
                     const TransferSpec& spec, const ModelConfig& target_cfg) {
  validate_model_config(target_cfg);
  require(target_cfg.vocab_size == target_vocab.size(), LRT_E_INCOMPATIBLE_ARCHITECTURE,
          "target vocab_size " + std::to_string(target_cfg.vocab_size) +
              " != symbol table size " + std::to_string(target_vocab.size()));

  const auto diffs = cfg_field_diffs(src.model_cfg, target_cfg);
  if (!diffs.empty()) {
    std::string msg = "source and target architectures differ:";
    for (const auto& [field, detail] : diffs) msg += " " + field + " (" + detail + ")";
    fail(LRT_E_INCOMPATIBLE_ARCHITECTURE, msg);
  }

  // Fresh initialization supplies every re-initialized tensor.
  const NamedTensors fresh = init_parameters(target_cfg, spec.embedding_seed);

  NamedTensors out;
  for (const auto& [name, shape] : parameter_manifest(target_cfg)) {
    if (name == "embedding.weight") {
      Tensor t(shape);
      Rng rng(spec.embedding_seed);
      for (auto& v : t.data) {
        v = static_cast<double>(static_cast<float>(
            rng.uniform(-spec.embedding_half_range, spec.embedding_half_range)));
      }
      out.emplace(name, std::move(t));
      continue;
    }
    if (name_excluded(name, spec)) {
      out.emplace(name, fresh.at(name));
      continue;
    }
    const auto it = src.tensors.find(name);
    require(it != src.tensors.end(), LRT_E_MISSING_TENSOR,
            "source checkpoint is missing " + name);
    require(it->second.shape == shape, LRT_E_INCOMPATIBLE_ARCHITECTURE,
            "tensor " + name + " has shape " + it->second.shape_str() + ", expected " +
                Tensor(shape).shape_str());
    out.emplace(name, it->second);
  }
  validate_parameters(out, target_cfg);
  return out;
}

std::string compat_report(const Checkpoint& src, const ModelConfig& target_cfg,
                          const TransferSpec& spec) {
  std::string report;
  const auto diffs = cfg_field_diffs(src.model_cfg, target_cfg);
  for (const auto& [field, detail] : diffs) {
    report += "CONFIG-MISMATCH " + field + " (" + detail + ")\n";
  }

  std::set<std::string> used;
  for (const auto& [name, shape] : parameter_manifest(target_cfg)) {
    const std::string shape_str = Tensor(shape).shape_str();
    if (name == "embedding.weight" || name_excluded(name, spec)) {
      report += "REINIT " + name + " " + shape_str + "\n";
      used.insert(name);
      continue;
    }
    const auto it = src.tensors.find(name);
    if (it == src.tensors.end()) {
      report += "MISSING " + name + " " + shape_str + "\n";
    } else if (it->second.shape != shape) {
      report += "SHAPE-MISMATCH " + name + " " + it->second.shape_str() + " -> " +
                shape_str + "\n";
      used.insert(name);
    } else {
      report += "COPY " + name + " " + shape_str + "\n";
      used.insert(name);
    }
  }
  for (const auto& [name, t] : src.tensors) {
    if (!used.count(name)) report += "DROP " + name + " " + t.shape_str() + "\n";
  }
  return report;
}

}  // namespace lrt

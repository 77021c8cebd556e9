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
#include <string>
#include <vector>

namespace lrt {

std::vector<uint32_t> utf8_decode(const std::string& s);
std::string utf8_encode(const std::vector<uint32_t>& cps);

// Canonical composition for the Devanagari block (nukta pairs, canonical
// mark reordering); other codepoints pass through unchanged.
std::vector<uint32_t> canonical_compose(std::vector<uint32_t> cps);

// Character vocabulary. Id 0 is reserved for padding and the last id for the
// EOS token; real codepoints occupy 1..size-2.
class SymbolTable {
 public:
  SymbolTable() = default;
  explicit SymbolTable(std::vector<uint32_t> codepoints);

  static SymbolTable build_from_texts(const std::vector<std::string>& normalized_texts);

  std::size_t size() const { return codepoints_.size() + 2; }
  uint32_t pad_id() const { return 0; }
  uint32_t eos_id() const { return static_cast<uint32_t>(size() - 1); }

  bool contains(uint32_t codepoint) const;
  uint32_t id_of(uint32_t codepoint) const;  // throws UnknownSymbol
  // Rendered form of an id; EOS prints as a return mark in dumps.
  std::string symbol_name(uint32_t id) const;

  const std::vector<uint32_t>& codepoints() const { return codepoints_; }

  // One "U+XXXX" line per codepoint, in id order.
  std::string serialize() const;
  static SymbolTable deserialize(const std::string& text);

  void save(const std::string& path) const;
  static SymbolTable load(const std::string& path);

  bool operator==(const SymbolTable& other) const {
    return codepoints_ == other.codepoints_;
  }

 private:
  std::vector<uint32_t> codepoints_;
};

// Codepoint ids ending in exactly one EOS.
struct SymbolSequence {
  std::vector<uint32_t> ids;
};

// NFC-style composition, punctuation/control removal (danda, double danda
// included), whitespace collapsed to single spaces, leading/trailing space
// stripped.
std::string normalize_text_string(const std::string& raw);

// normalize_text_string, mapped through the table, EOS appended.
SymbolSequence normalize_text(const std::string& raw, const SymbolTable& table);

}  // namespace lrt

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

#include "text.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "error.hpp"
#include "io_util.hpp"

namespace lrt {
namespace {

std::string codepoint_label(uint32_t cp) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "U+%04X", cp);
  return buf;
}

// Canonical combining classes for the marks this pipeline reorders.
int combining_class(uint32_t cp) {
  switch (cp) {
    case 0x093C: return 7;    // nukta
    case 0x094D: return 9;    // virama
    case 0x0952: return 220;  // anudatta
    case 0x0951:              // udatta
    case 0x0953:              // grave
    case 0x0954: return 230;  // acute
    default: return 0;
  }
}

// Canonical decompositions in the Devanagari block (all are letter + nukta).
bool decompose_pair(uint32_t cp, uint32_t* base, uint32_t* mark) {
  static const std::map<uint32_t, uint32_t> kBase = {
      {0x0929, 0x0928}, {0x0931, 0x0930}, {0x0934, 0x0933}, {0x0958, 0x0915},
      {0x0959, 0x0916}, {0x095A, 0x0917}, {0x095B, 0x091C}, {0x095C, 0x0921},
      {0x095D, 0x0922}, {0x095E, 0x092B}, {0x095F, 0x092F},
  };
  const auto it = kBase.find(cp);
  if (it == kBase.end()) return false;
  *base = it->second;
  *mark = 0x093C;
  return true;
}

// Composition pairs; U+0958..095F are composition exclusions and stay apart.
uint32_t compose_pair(uint32_t base, uint32_t mark) {
  if (mark != 0x093C) return 0;
  switch (base) {
    case 0x0928: return 0x0929;
    case 0x0930: return 0x0931;
    case 0x0933: return 0x0934;
    default: return 0;
  }
}

bool is_whitespace(uint32_t cp) {
  return cp == ' ' || cp == '\t' || cp == '\r' || cp == '\n' || cp == 0x00A0 ||
         (cp >= 0x2000 && cp <= 0x200A) || cp == 0x3000;
}

bool is_stripped(uint32_t cp) {
  if (cp < 0x20 || cp == 0x7F) return true;                    // controls
  if (cp >= 0x80 && cp <= 0x9F) return true;                   // C1 controls
  if (cp < 0x80) {                                             // ASCII punct
    return !((cp >= '0' && cp <= '9') || (cp >= 'A' && cp <= 'Z') ||
             (cp >= 'a' && cp <= 'z') || cp == ' ');
  }
  if (cp == 0x0964 || cp == 0x0965) return true;               // danda, double danda
  if (cp == 0x0970 || cp == 0x0971) return true;               // abbreviation, high spacing dot
  if (cp >= 0x200B && cp <= 0x206F) return true;               // format chars, gen. punct
  if (cp == 0xFEFF) return true;                               // BOM
  if (cp >= 0x2E00 && cp <= 0x2E7F) return true;               // supplemental punct
  return false;
}

}  // namespace

std::vector<uint32_t> utf8_decode(const std::string& s) {
  std::vector<uint32_t> out;
  std::size_t i = 0;
  const auto bad = [&] { fail(LRT_E_INVALID_ARGUMENT, "invalid UTF-8 input"); };
  while (i < s.size()) {
    const uint8_t b0 = static_cast<uint8_t>(s[i]);
    uint32_t cp = 0;
    std::size_t len = 0;
    if (b0 < 0x80) {
      cp = b0;
      len = 1;
    } else if ((b0 & 0xE0) == 0xC0) {
      cp = b0 & 0x1F;
      len = 2;
    } else if ((b0 & 0xF0) == 0xE0) {
      cp = b0 & 0x0F;
      len = 3;
    } else if ((b0 & 0xF8) == 0xF0) {
      cp = b0 & 0x07;
      len = 4;
    } else {
      bad();
    }
    if (i + len > s.size()) bad();
    for (std::size_t k = 1; k < len; ++k) {
      const uint8_t b = static_cast<uint8_t>(s[i + k]);
      if ((b & 0xC0) != 0x80) bad();
      cp = (cp << 6) | (b & 0x3F);
    }
    if (cp > 0x10FFFF) bad();
    out.push_back(cp);
    i += len;
  }
  return out;
}

std::string utf8_encode(const std::vector<uint32_t>& cps) {
  std::string out;
  for (uint32_t cp : cps) {
    if (cp < 0x80) {
      out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
      out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
      out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
      out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
  }
  return out;
}

std::vector<uint32_t> canonical_compose(std::vector<uint32_t> cps) {
  // Decompose.
  std::vector<uint32_t> decomposed;
  decomposed.reserve(cps.size());
  for (uint32_t cp : cps) {
    uint32_t base, mark;
    if (decompose_pair(cp, &base, &mark)) {
      decomposed.push_back(base);
      decomposed.push_back(mark);
    } else {
      decomposed.push_back(cp);
    }
  }

  // Canonical ordering: stable bubble of adjacent marks by combining class.
  for (std::size_t i = 1; i < decomposed.size(); ++i) {
    std::size_t j = i;
    while (j > 0) {
      const int ca = combining_class(decomposed[j - 1]);
      const int cb = combining_class(decomposed[j]);
      if (ca > cb && cb != 0) {
        std::swap(decomposed[j - 1], decomposed[j]);
        --j;
      } else {
        break;
      }
    }
  }

  // Compose against the last starter.
  std::vector<uint32_t> out;
  out.reserve(decomposed.size());
  std::ptrdiff_t starter = -1;
  int last_cc = 0;
  for (uint32_t cp : decomposed) {
    const int cc = combining_class(cp);
    // A mark composes with the last starter unless a mark of equal or higher
    // class sits between them.
    if (starter >= 0 && cc != 0 && last_cc < cc) {
      const uint32_t composed = compose_pair(out[static_cast<std::size_t>(starter)], cp);
      if (composed) {
        out[static_cast<std::size_t>(starter)] = composed;
        continue;
      }
    }
    out.push_back(cp);
    if (cc == 0) {
      starter = static_cast<std::ptrdiff_t>(out.size()) - 1;
      last_cc = 0;
    } else {
      last_cc = cc;
    }
  }
  return out;
}

SymbolTable::SymbolTable(std::vector<uint32_t> codepoints) : codepoints_(std::move(codepoints)) {
  std::set<uint32_t> seen;
  for (uint32_t cp : codepoints_) {
    require(seen.insert(cp).second, LRT_E_CONFIG,
            "duplicate codepoint in symbol table: " + codepoint_label(cp));
  }
}

SymbolTable SymbolTable::build_from_texts(const std::vector<std::string>& normalized_texts) {
  std::set<uint32_t> cps;
  for (const auto& text : normalized_texts) {
    for (uint32_t cp : utf8_decode(text)) cps.insert(cp);
  }
  return SymbolTable(std::vector<uint32_t>(cps.begin(), cps.end()));
}

bool SymbolTable::contains(uint32_t codepoint) const {
  return std::find(codepoints_.begin(), codepoints_.end(), codepoint) != codepoints_.end();
}

uint32_t SymbolTable::id_of(uint32_t codepoint) const {
  const auto it = std::find(codepoints_.begin(), codepoints_.end(), codepoint);
  if (it == codepoints_.end()) {
    fail(LRT_E_UNKNOWN_SYMBOL, "codepoint not in symbol table: " + codepoint_label(codepoint));
  }
  return static_cast<uint32_t>(it - codepoints_.begin()) + 1;
}

std::string SymbolTable::symbol_name(uint32_t id) const {
  if (id == pad_id()) return "<pad>";
  if (id == eos_id()) return "⏎";
  require(id >= 1 && id <= codepoints_.size(), LRT_E_UNKNOWN_SYMBOL,
          "symbol id out of range: " + std::to_string(id));
  return utf8_encode({codepoints_[id - 1]});
}

std::string SymbolTable::serialize() const {
  std::string out;
  for (uint32_t cp : codepoints_) {
    out += codepoint_label(cp);
    out += '\n';
  }
  return out;
}

SymbolTable SymbolTable::deserialize(const std::string& text) {
  std::vector<uint32_t> cps;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    require(line.size() > 2 && line[0] == 'U' && line[1] == '+', LRT_E_CONFIG,
            "bad symbol table line: " + line);
    cps.push_back(static_cast<uint32_t>(std::stoul(line.substr(2), nullptr, 16)));
  }
  return SymbolTable(std::move(cps));
}

void SymbolTable::save(const std::string& path) const { write_file(path, serialize()); }

SymbolTable SymbolTable::load(const std::string& path) {
  return deserialize(read_text_file(path));
}

std::string normalize_text_string(const std::string& raw) {
  const auto composed = canonical_compose(utf8_decode(raw));

  std::vector<uint32_t> out;
  bool pending_space = false;
  for (uint32_t cp : composed) {
    if (is_whitespace(cp)) {
      if (!out.empty()) pending_space = true;
      continue;
    }
    if (is_stripped(cp)) continue;
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(cp);
  }
  return utf8_encode(out);
}

SymbolSequence normalize_text(const std::string& raw, const SymbolTable& table) {
  const std::string normalized = normalize_text_string(raw);
  require(!normalized.empty(), LRT_E_EMPTY_TEXT, "text is empty after normalization");

  SymbolSequence seq;
  for (uint32_t cp : utf8_decode(normalized)) seq.ids.push_back(table.id_of(cp));
  seq.ids.push_back(table.eos_id());
  return seq;
}

}  // namespace lrt

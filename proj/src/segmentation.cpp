// Copyright 2026 The pmark Authors. All Rights Reserved.
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

#include <algorithm>
#include <array>
#include <cctype>

#include "pmark/llm_io.hpp"

namespace pmark {
namespace {

constexpr std::array<std::string_view, 20> kAbbreviations = {
    "Dr.", "Mr.", "Mrs.", "Ms.", "Prof.", "Sr.", "Jr.", "St.", "vs.", "etc.",
    "e.g.", "i.e.", "Inc.", "Ltd.", "No.", "Fig.", "Mt.", "Co.", "Corp.", "approx."};

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_terminal(char c) { return c == '.' || c == '!' || c == '?'; }
bool is_closer(char c) { return c == '"' || c == '\'' || c == ')' || c == ']'; }

// True when the word ending at `dot` (inclusive) is a guarded abbreviation.
bool guarded(std::string_view text, std::size_t word_start, std::size_t dot) {
  const std::string_view word = text.substr(word_start, dot + 1 - word_start);
  return std::find(kAbbreviations.begin(), kAbbreviations.end(), word) != kAbbreviations.end();
}

}  // namespace

std::string SentenceSplit::reconstruct() const {
  std::string out = leading;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    out += sentences[i];
    out += separators[i];
  }
  return out;
}

SentenceSplit split_sentences(std::string_view text) {
  SentenceSplit out;
  std::size_t pos = 0;
  while (pos < text.size() && is_space(text[pos])) ++pos;
  out.leading = std::string(text.substr(0, pos));

  std::size_t start = pos;
  std::size_t word_start = pos;
  std::size_t i = pos;
  auto emit = [&](std::size_t end, std::size_t next) {
    out.sentences.emplace_back(text.substr(start, end - start));
    out.offsets.push_back(start);
    out.separators.emplace_back(text.substr(end, next - end));
    start = next;
    word_start = next;
  };
  while (i < text.size()) {
    const char c = text[i];
    if (is_space(c)) {
      ++i;
      word_start = i;
      continue;
    }
    if (!is_terminal(c)) {
      ++i;
      continue;
    }
    std::size_t end = i;
    while (end < text.size() && is_terminal(text[end])) ++end;
    while (end < text.size() && is_closer(text[end])) ++end;
    const bool at_break = end == text.size() || is_space(text[end]);
    const bool single_period = end == i + 1 && c == '.';
    if (!at_break || (single_period && guarded(text, word_start, i))) {
      i = end;
      continue;
    }
    std::size_t next = end;
    while (next < text.size() && is_space(text[next])) ++next;
    emit(end, next);
    i = next;
  }
  if (start < text.size()) {
    std::size_t end = text.size();
    while (end > start && is_space(text[end - 1])) --end;
    emit(end, text.size());
  }
  return out;
}

std::string join_sentences(std::span<const std::string> sentences) {
  std::string out;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    if (i != 0) out += ' ';
    out += sentences[i];
  }
  return out;
}

}  // namespace pmark

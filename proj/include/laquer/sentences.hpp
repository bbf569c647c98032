#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "laquer/model.hpp"
#include "laquer/tokenize.hpp"
#include "laquer/utf8.hpp"

namespace laquer {

// Abbreviations after which a period never ends a sentence.
inline constexpr std::array<std::string_view, 37> kNonTerminalAbbreviations = {
    "mr", "mrs", "ms", "dr", "prof", "sr", "jr", "st", "mt", "vs", "v", "e.g", "i.e", "cf", "u.s", "u.k", "u.n",
    "gen", "gov", "sen", "rep", "col", "lt", "sgt", "capt", "cmdr", "adm", "rev", "hon", "pres", "fig", "no",
    "approx", "dept", "est", "ft", "jan"};

// Abbreviations that end a sentence only when the next word is capitalized.
inline constexpr std::array<std::string_view, 20> kAmbiguousAbbreviations = {
    "a.m", "p.m", "etc", "inc", "ltd", "co", "corp", "bros", "feb", "mar", "apr", "jun", "jul", "aug", "sep",
    "sept", "oct", "nov", "dec", "al"};

namespace detail {

inline bool is_closer(char32_t c) {
  return c == U'"' || c == U'\'' || c == U')' || c == U']' || c == 0x201D || c == 0x2019 || c == U'}';
}

inline bool is_upper(char32_t c) { return (c >= U'A' && c <= U'Z') || (c >= 0xC0 && c <= 0xDE && c != 0xD7); }
inline bool is_lower(char32_t c) { return (c >= U'a' && c <= U'z') || (c >= 0xDF && c <= 0xFF && c != 0xF7); }

// Lowercased word (letters and internal periods) that ends right before `dot`.
inline std::string word_before(const std::u32string& t, std::size_t dot) {
  std::size_t b = dot;
  while (b > 0 && (is_word_char(t[b - 1]) || (t[b - 1] == U'.' && b >= 2 && is_word_char(t[b - 2])))) --b;
  std::u32string w(t.begin() + static_cast<std::ptrdiff_t>(b), t.begin() + static_cast<std::ptrdiff_t>(dot));
  for (auto& c : w) c = ascii_lower(c);
  return utf8::encode(w);
}

}  // namespace detail

/// Rule-based sentence segmentation. Boundaries fall after '.', '!' or '?'
/// (plus any closing quotes/brackets) followed by whitespace, and at line
/// breaks. A period does not end a sentence after a listed abbreviation, or
/// when the next word starts lowercase. Each returned span is trimmed of
/// surrounding whitespace.
inline std::vector<SpanRef> split_sentences(std::string_view text) {
  using namespace detail;
  const std::u32string t = utf8::decode(text);
  std::vector<SpanRef> out;
  const auto push = [&](std::size_t b, std::size_t e) {
    while (b < e && is_space(t[b])) ++b;
    while (e > b && is_space(t[e - 1])) --e;
    if (b < e) out.push_back(SpanRef::output(b, e));
  };
  const auto contains = [](const auto& list, const std::string& w) {
    for (auto item : list)
      if (item == w) return true;
    return false;
  };

  std::size_t begin = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const char32_t c = t[i];
    if (c == U'\n') {
      push(begin, i);
      begin = i + 1;
      continue;
    }
    if (c != U'.' && c != U'!' && c != U'?') continue;
    std::size_t e = i + 1;
    while (e < t.size() && (t[e] == U'.' || t[e] == U'!' || t[e] == U'?')) ++e;
    while (e < t.size() && is_closer(t[e])) ++e;
    if (e < t.size() && !is_space(t[e])) continue;
    std::size_t next = e;
    while (next < t.size() && is_space(t[next]) && t[next] != U'\n') ++next;
    if (c == U'.' && e == i + 1) {
      const std::string w = word_before(t, i);
      if (contains(kNonTerminalAbbreviations, w)) continue;
      const bool next_upper = next < t.size() && !is_lower(t[next]);
      if (contains(kAmbiguousAbbreviations, w) && !next_upper) continue;
      if (next < t.size() && (is_lower(t[next]) || is_digit(t[next]))) continue;
    }
    push(begin, e);
    begin = e;
    i = e - 1;
  }
  push(begin, t.size());
  return out;
}

}  // namespace laquer

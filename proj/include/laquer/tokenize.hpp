#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "laquer/lexicon.hpp"
#include "laquer/utf8.hpp"

namespace laquer {

/// A word or punctuation token. Offsets are scalar indices into the
/// tokenized text; `lemma` is lowercase.
struct LemToken {
  std::string surface;
  std::string lemma;
  std::size_t start = 0;
  std::size_t end = 0;
  bool is_content = false;
  bool is_punct = false;
};

namespace detail {

inline bool is_space(char32_t c) {
  return c == U' ' || c == U'\t' || c == U'\n' || c == U'\r' || c == U'\f' || c == U'\v' || c == 0x00A0 ||
         (c >= 0x2000 && c <= 0x200B) || c == 0x2028 || c == 0x2029 || c == 0x202F || c == 0x205F ||
         c == 0x3000 || c == 0xFEFF;
}

inline bool is_apostrophe(char32_t c) { return c == U'\'' || c == 0x2019; }

inline bool is_digit(char32_t c) { return c >= U'0' && c <= U'9'; }

inline bool is_word_char(char32_t c) {
  if (c < 0x80) return (c >= U'a' && c <= U'z') || (c >= U'A' && c <= U'Z') || is_digit(c);
  if (is_space(c)) return false;
  if ((c >= 0x00A1 && c <= 0x00BF) || c == 0x00D7 || c == 0x00F7) return false;
  if (c >= 0x2010 && c <= 0x206F) return false;
  if (c >= 0x3000 && c <= 0x303F) return false;
  if (c >= 0xFF01 && c <= 0xFF0F) return false;
  return true;
}

inline char32_t ascii_lower(char32_t c) { return (c >= U'A' && c <= U'Z') ? c + 32 : c; }

inline std::string lower_normalized(std::u32string_view s) {
  std::u32string t(s);
  for (auto& c : t) c = is_apostrophe(c) ? U'\'' : ascii_lower(c);
  return utf8::encode(t);
}

// Length of a clitic ("'s", "'re", "n't", ...) starting at `i`, or 0.
inline std::size_t clitic_length(const std::u32string& t, std::size_t i, std::size_t word_end) {
  if (is_apostrophe(t[i])) {
    std::u32string rest;
    for (std::size_t k = i + 1; k < word_end; ++k) rest.push_back(ascii_lower(t[k]));
    if (rest == U"s" || rest == U"re" || rest == U"ve" || rest == U"ll" || rest == U"d" || rest == U"m") {
      return word_end - i;
    }
    return 0;
  }
  if (i + 3 == word_end && ascii_lower(t[i]) == U'n' && is_apostrophe(t[i + 1]) && ascii_lower(t[i + 2]) == U't') {
    return 3;
  }
  return 0;
}

}  // namespace detail

/// Splits text into word and punctuation tokens and lemmatizes the words.
///
/// Words are maximal runs of letters/digits; digit groups joined by '.', ','
/// or ':' stay whole ("4:30", "1,000"); apostrophes inside a word are kept,
/// except for the clitics 's 're 've 'll 'd 'm n't which become their own
/// tokens. Every other non-space character is a one-character punctuation
/// token.
inline std::vector<LemToken> tokenize_lemmatize(std::string_view text,
                                                const Lemmatizer& lemmatizer = default_lemmatizer()) {
  using namespace detail;
  const std::u32string t = utf8::decode(text);
  std::vector<LemToken> out;
  const auto emit = [&](std::size_t s, std::size_t e, bool punct) {
    LemToken tok;
    const std::u32string_view view(t.data() + s, e - s);
    tok.surface = utf8::encode(view);
    tok.start = s;
    tok.end = e;
    tok.is_punct = punct;
    const std::string lower = lower_normalized(view);
    if (punct) {
      tok.lemma = lower;
    } else {
      bool numeric = false;
      for (char c : lower) numeric |= (c >= '0' && c <= '9');
      tok.lemma = numeric ? lower : lemmatizer.lemma(lower);
      const bool clitic = !lower.empty() && (lower.front() == '\'' || lower == "n't");
      tok.is_content = !is_stopword(lower) && !clitic;
    }
    out.push_back(std::move(tok));
  };

  std::size_t i = 0;
  while (i < t.size()) {
    if (is_space(t[i])) {
      ++i;
      continue;
    }
    if (!is_word_char(t[i])) {
      emit(i, i + 1, true);
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < t.size()) {
      if (is_word_char(t[j])) {
        ++j;
      } else if (j + 1 < t.size() && (t[j] == U'.' || t[j] == U',' || t[j] == U':') && is_digit(t[j - 1]) &&
                 is_digit(t[j + 1])) {
        j += 2;
      } else if (j + 1 < t.size() && is_apostrophe(t[j]) && is_word_char(t[j + 1]) && j > i) {
        j += 2;
      } else {
        break;
      }
    }
    // Peel clitics off the end of the word.
    std::size_t word_end = j;
    std::size_t clitic_start = j;
    for (std::size_t k = i + 1; k < j; ++k) {
      if (std::size_t len = clitic_length(t, k, j); len > 0) {
        clitic_start = k;
        break;
      }
    }
    if (clitic_start < j) word_end = clitic_start;
    if (word_end > i) emit(i, word_end, false);
    if (clitic_start < j) emit(clitic_start, j, false);
    i = j;
  }
  return out;
}

/// Number of content tokens in `text`.
inline std::size_t count_content_words(std::string_view text) {
  std::size_t n = 0;
  for (const auto& tok : tokenize_lemmatize(text)) n += tok.is_content;
  return n;
}

}  // namespace laquer

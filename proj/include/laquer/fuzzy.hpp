#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "laquer/model.hpp"
#include "laquer/utf8.hpp"

namespace laquer {

struct FuzzyMatch {
  SpanRef span;
  std::size_t distance = 0;
};

/// Edit budget for locating an emitted span: ceil(10% of its length),
/// clamped to [1, 20].
inline std::size_t fuzzy_budget(std::size_t pattern_length) {
  const std::size_t tenth = (pattern_length + 9) / 10;
  return std::clamp<std::size_t>(tenth, 1, 20);
}

/// Finds the window of `source` closest to `pattern` in edit distance.
///
/// An exact occurrence wins with distance 0. Otherwise every window is
/// considered; ties go to the smaller start, then the shorter window. Returns
/// nothing when the best distance exceeds `max_distance`.
inline std::optional<FuzzyMatch> fuzzy_locate(std::u32string_view pattern, std::u32string_view source,
                                              std::size_t max_distance, const std::string& doc_id = {}) {
  const auto make = [&](std::size_t s, std::size_t e, std::size_t d) {
    return FuzzyMatch{doc_id.empty() ? SpanRef::output(s, e) : SpanRef::in_doc(doc_id, s, e), d};
  };
  const std::size_t m = pattern.size();
  if (m == 0 || source.empty()) return std::nullopt;
  if (const auto pos = source.find(pattern); pos != std::u32string_view::npos) return make(pos, pos + m, 0);
  if (max_distance == 0) return std::nullopt;

  struct Cell {
    std::size_t dist;
    std::size_t start;
  };
  const auto better = [](const Cell& x, const Cell& y) {
    return x.dist < y.dist || (x.dist == y.dist && x.start < y.start);
  };
  std::vector<Cell> prev(m + 1), cur(m + 1);
  for (std::size_t i = 0; i <= m; ++i) prev[i] = {i, 0};

  std::size_t best_dist = m, best_start = 0, best_end = 1;
  for (std::size_t j = 1; j <= source.size(); ++j) {
    cur[0] = {0, j};
    const char32_t c = source[j - 1];
    for (std::size_t i = 1; i <= m; ++i) {
      Cell cand{prev[i - 1].dist + (pattern[i - 1] == c ? 0 : 1), prev[i - 1].start};
      const Cell skip_text{prev[i].dist + 1, prev[i].start};
      const Cell skip_pattern{cur[i - 1].dist + 1, cur[i - 1].start};
      if (better(skip_text, cand)) cand = skip_text;
      if (better(skip_pattern, cand)) cand = skip_pattern;
      cur[i] = cand;
    }
    const Cell& end_cell = cur[m];
    if (end_cell.start < j) {
      const bool wins = end_cell.dist < best_dist ||
                        (end_cell.dist == best_dist && (end_cell.start < best_start ||
                                                        (end_cell.start == best_start && j < best_end)));
      if (wins) {
        best_dist = end_cell.dist;
        best_start = end_cell.start;
        best_end = j;
      }
    }
    std::swap(prev, cur);
  }
  if (best_dist > max_distance) return std::nullopt;
  return make(best_start, best_end, best_dist);
}

inline std::optional<FuzzyMatch> fuzzy_locate(std::string_view pattern, std::string_view source,
                                              std::size_t max_distance, const std::string& doc_id = {}) {
  const std::u32string p = utf8::decode(pattern);
  const std::u32string s = utf8::decode(source);
  return fuzzy_locate(std::u32string_view(p), std::u32string_view(s), max_distance, doc_id);
}

}  // namespace laquer

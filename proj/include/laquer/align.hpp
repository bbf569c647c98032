#pragma once

// Lexical alignment of a fact to the text it was extracted from.
//
// Words of both strings are lemmatized and an edit script is computed
// between the text lemmas and the fact lemmas; text words the script keeps
// unchanged are aligned to the fact word they match. Fact words left over
// form a reduced fact that is aligned again against the still-unaligned text
// words, which recovers words whose order the fact transposed. A pass where
// the minimal-cost script keeps no word at all (a short leftover fact against
// a long text makes substitutions cheaper than matches) is redone with an
// insert/delete-only script, whose kept words are a longest common
// subsequence.

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "laquer/edit_script.hpp"
#include "laquer/model.hpp"
#include "laquer/tokenize.hpp"

namespace laquer {

struct AlignmentCoverage {
  std::size_t content_total = 0;    // content words in the fact
  std::size_t content_aligned = 0;  // of those, aligned to the text

  double ratio() const { return content_total == 0 ? 0.0 : double(content_aligned) / double(content_total); }
};

struct AlignmentResult {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (text token idx, fact token idx), sorted
  std::vector<SpanRef> output_spans;
  AlignmentCoverage coverage;
  std::vector<LemToken> text_tokens;
  std::vector<LemToken> fact_tokens;
};

namespace detail {

/// Groups aligned text tokens into spans. A gap made only of non-content
/// tokens keeps a run open; an unaligned content token closes it. Runs with
/// no content token are dropped.
inline std::vector<SpanRef> spans_from_alignment(const std::vector<LemToken>& tokens, const std::vector<bool>& aligned,
                                                 std::size_t offset) {
  std::vector<SpanRef> spans;
  bool open = false;
  bool has_content = false;
  std::size_t run_start = 0, run_end = 0;
  const auto close = [&] {
    if (open && has_content) spans.push_back(SpanRef::output(run_start + offset, run_end + offset));
    open = false;
    has_content = false;
  };
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto& tok = tokens[i];
    if (aligned[i]) {
      if (!open) {
        open = true;
        run_start = tok.start;
      }
      run_end = tok.end;
      has_content |= tok.is_content;
    } else if (tok.is_content) {
      close();
    }
  }
  close();
  return spans;
}

}  // namespace detail

/// Aligns `fact` to `text`. Spans are reported as Output spans shifted by
/// `offset` (use it when `text` is a slice of a larger output).
///
/// With `preferred` set (scalar range within `text`), passes first consider
/// only text tokens inside that range; once they stop aligning anything the
/// remaining fact words are aligned against the whole text.
inline AlignmentResult align_fact_to_text(std::string_view fact, std::string_view text, std::size_t offset = 0,
                                          std::optional<std::pair<std::size_t, std::size_t>> preferred = {}) {
  AlignmentResult result;
  result.text_tokens = tokenize_lemmatize(text);
  result.fact_tokens = tokenize_lemmatize(fact);
  const auto& tt = result.text_tokens;
  const auto& ft = result.fact_tokens;

  std::vector<bool> text_aligned(tt.size(), false);
  std::vector<bool> fact_aligned(ft.size(), false);

  // Punctuation never takes part in the edit script.
  std::vector<std::size_t> fact_pending;
  for (std::size_t j = 0; j < ft.size(); ++j)
    if (!ft[j].is_punct) fact_pending.push_back(j);

  bool restricted = preferred.has_value();
  while (!fact_pending.empty()) {
    std::vector<std::size_t> text_free;
    for (std::size_t i = 0; i < tt.size(); ++i) {
      if (tt[i].is_punct || text_aligned[i]) continue;
      if (restricted && (tt[i].start < preferred->first || tt[i].end > preferred->second)) continue;
      text_free.push_back(i);
    }
    std::vector<std::string> a, b;
    a.reserve(text_free.size());
    b.reserve(fact_pending.size());
    for (auto i : text_free) a.push_back(tt[i].lemma);
    for (auto j : fact_pending) b.push_back(ft[j].lemma);

    auto ops = edit_script(a, b);
    if (std::none_of(ops.begin(), ops.end(), [](EditOp op) { return op == EditOp::Equal; })) ops = indel_script(a, b);
    std::size_t ia = 0, ib = 0, added = 0;
    for (EditOp op : ops) {
      switch (op) {
        case EditOp::Equal:
          text_aligned[text_free[ia]] = true;
          fact_aligned[fact_pending[ib]] = true;
          result.pairs.emplace_back(text_free[ia], fact_pending[ib]);
          ++added;
          ++ia, ++ib;
          break;
        case EditOp::Substitute: ++ia, ++ib; break;
        case EditOp::Delete: ++ia; break;
        case EditOp::Insert: ++ib; break;
      }
    }
    if (added == 0) {
      if (!restricted) break;
      restricted = false;
      continue;
    }
    std::vector<std::size_t> next;
    for (auto j : fact_pending)
      if (!fact_aligned[j]) next.push_back(j);
    fact_pending = std::move(next);
  }

  std::sort(result.pairs.begin(), result.pairs.end());
  for (std::size_t j = 0; j < ft.size(); ++j) {
    if (!ft[j].is_content) continue;
    ++result.coverage.content_total;
    result.coverage.content_aligned += fact_aligned[j];
  }
  result.output_spans = detail::spans_from_alignment(tt, text_aligned, offset);
  return result;
}

}  // namespace laquer

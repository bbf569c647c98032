#pragma once

// Attribution from hidden-state similarity.
//
// Output tokens whose layer-l state is close (cosine > theta) to some
// document token's state are "extractive". Each contiguous run of extractive
// tokens is summarized by its mean state; the document tokens closest to that
// mean are anchors, and every window of up to L tokens containing an anchor
// is scored by the cosine between its mean state and the run's. The best
// window is the attribution for the run.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "laquer/error.hpp"
#include "laquer/hidden_states.hpp"
#include "laquer/model.hpp"

namespace laquer {

struct InternalsConfig {
  double theta = 0.7;
  int layer = 5;
  std::size_t window_max = 30;
  // How many anchor tokens to expand. Not fixed by the method description;
  // results can be sensitive to it.
  std::size_t anchor_count = 5;
  // Only windows centred on the anchor (ablation switch).
  bool centered_windows = false;
};

inline constexpr double kTieTolerance = 1e-9;

inline void validate_config(const InternalsConfig& cfg) {
  if (!(cfg.theta > 0.0 && cfg.theta <= 1.0)) throw Error(ErrorCode::InvalidArgument, "theta must be in (0, 1]");
  if (cfg.layer < 0) throw Error(ErrorCode::InvalidArgument, "layer must be non-negative");
  if (cfg.window_max < 1) throw Error(ErrorCode::InvalidArgument, "window_max must be at least 1");
  if (cfg.anchor_count < 1) throw Error(ErrorCode::InvalidArgument, "anchor_count must be at least 1");
}

template <typename A, typename B>
double cosine(std::span<const A> x, std::span<const B> y) {
  double dot = 0.0, nx = 0.0, ny = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    dot += double(x[k]) * double(y[k]);
    nx += double(x[k]) * double(x[k]);
    ny += double(y[k]) * double(y[k]);
  }
  if (nx == 0.0 || ny == 0.0) throw Error(ErrorCode::ZeroVector, "cosine of a zero vector");
  return dot / (std::sqrt(nx) * std::sqrt(ny));
}

/// Document tokens eligible as attribution targets: non-header, non-empty,
/// and (when `restrict_to` is given) lying inside one of those document spans.
inline std::vector<std::size_t> candidate_doc_tokens(const TokenHiddenStates& hs,
                                                     const std::optional<std::vector<SpanRef>>& restrict_to = {}) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < hs.tokens.size(); ++i) {
    const auto& t = hs.tokens[i];
    const auto& sec = hs.sections[t.section];
    if (sec.kind != SectionKind::Doc || t.header || t.start == t.end) continue;
    if (restrict_to) {
      const bool inside = std::any_of(restrict_to->begin(), restrict_to->end(), [&](const SpanRef& s) {
        return s.doc_id == sec.id && t.start >= s.start && t.end <= s.end;
      });
      if (!inside) continue;
    }
    out.push_back(i);
  }
  return out;
}

/// Output tokens whose best cosine against any candidate document token
/// exceeds theta. Input order is preserved.
inline std::vector<std::size_t> identify_extractive_tokens(const std::vector<std::size_t>& output_token_ids,
                                                           const TokenHiddenStates& hs, const InternalsConfig& cfg,
                                                           const std::vector<std::size_t>& doc_tokens) {
  std::vector<std::size_t> out;
  for (auto i : output_token_ids) {
    if (hs.kind_of(i) != SectionKind::Output) {
      throw Error(ErrorCode::InvalidArgument, "token " + std::to_string(i) + " is not an output token");
    }
    double best = -2.0;
    for (auto j : doc_tokens) best = std::max(best, cosine(hs.row(i), hs.row(j)));
    if (best > cfg.theta) out.push_back(i);
  }
  return out;
}

inline std::vector<std::size_t> identify_extractive_tokens(const std::vector<std::size_t>& output_token_ids,
                                                           const TokenHiddenStates& hs, const InternalsConfig& cfg) {
  return identify_extractive_tokens(output_token_ids, hs, cfg, candidate_doc_tokens(hs));
}

/// Mean of the rows of `token_ids`.
inline std::vector<double> span_representation(const std::vector<std::size_t>& token_ids,
                                               const TokenHiddenStates& hs) {
  if (token_ids.empty()) throw Error(ErrorCode::EmptySpan, "span has no tokens");
  std::vector<double> mean(hs.dim, 0.0);
  for (auto i : token_ids) {
    const auto r = hs.row(i);
    for (std::size_t k = 0; k < hs.dim; ++k) mean[k] += r[k];
  }
  for (auto& v : mean) v /= double(token_ids.size());
  return mean;
}

/// The `anchor_count` candidates most similar to `span_mean`, best first;
/// ties go to the lower token index.
inline std::vector<std::size_t> find_anchor_tokens(const std::vector<double>& span_mean, const TokenHiddenStates& hs,
                                                   const InternalsConfig& cfg,
                                                   const std::vector<std::size_t>& doc_tokens) {
  struct Scored {
    std::size_t token;
    double score;
  };
  std::vector<Scored> scored;
  scored.reserve(doc_tokens.size());
  const std::span<const double> mean(span_mean);
  for (auto j : doc_tokens) scored.push_back({j, cosine(mean, hs.row(j))});
  std::stable_sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
    if (std::abs(a.score - b.score) > kTieTolerance) return a.score > b.score;
    return a.token < b.token;
  });
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < scored.size() && k < cfg.anchor_count; ++k) out.push_back(scored[k].token);
  return out;
}

inline std::vector<std::size_t> find_anchor_tokens(const std::vector<double>& span_mean, const TokenHiddenStates& hs,
                                                   const InternalsConfig& cfg) {
  return find_anchor_tokens(span_mean, hs, cfg, candidate_doc_tokens(hs));
}

struct ScoredWindow {
  std::size_t first = 0;  // token index, inclusive
  std::size_t last = 0;   // token index, inclusive
  double score = 0.0;
  SpanRef span;
};

/// True when window a ranks above window b: higher score, then shorter, then
/// further left.
inline bool window_precedes(double score_a, std::size_t len_a, std::size_t first_a, double score_b, std::size_t len_b,
                            std::size_t first_b) {
  if (std::abs(score_a - score_b) > kTieTolerance) return score_a > score_b;
  if (len_a != len_b) return len_a < len_b;
  return first_a < first_b;
}

inline double window_score(std::size_t first, std::size_t last, const std::vector<double>& span_mean,
                           const TokenHiddenStates& hs) {
  std::vector<double> sum(hs.dim, 0.0);
  for (std::size_t t = first; t <= last; ++t) {
    const auto r = hs.row(t);
    for (std::size_t k = 0; k < hs.dim; ++k) sum[k] += r[k];
  }
  const double n = double(last - first + 1);
  for (auto& v : sum) v /= n;
  return cosine(std::span<const double>(sum), std::span<const double>(span_mean));
}

/// Best-scoring window around any anchor. Windows hold consecutive candidate
/// tokens of the anchor's document and are at most `window_max` long.
inline std::optional<ScoredWindow> best_window(const std::vector<std::size_t>& anchors,
                                               const std::vector<double>& span_mean, const TokenHiddenStates& hs,
                                               const InternalsConfig& cfg,
                                               const std::vector<std::size_t>& doc_tokens) {
  if (anchors.empty()) return std::nullopt;
  std::vector<bool> is_candidate(hs.tokens.size(), false);
  for (auto j : doc_tokens) is_candidate[j] = true;

  std::optional<ScoredWindow> best;
  const std::size_t L = cfg.window_max;
  for (auto a : anchors) {
    const std::size_t section = hs.tokens[a].section;
    const auto usable = [&](std::size_t t) { return is_candidate[t] && hs.tokens[t].section == section; };
    // Extent of the candidate run containing the anchor, capped at L-1 each side.
    std::size_t lo = a, hi = a;
    while (lo > 0 && a - (lo - 1) < L && usable(lo - 1)) --lo;
    while (hi + 1 < hs.tokens.size() && (hi + 1) - a < L && usable(hi + 1)) ++hi;

    const auto consider = [&](std::size_t first, std::size_t last) {
      const double score = window_score(first, last, span_mean, hs);
      const std::size_t len = last - first + 1;
      if (!best || window_precedes(score, len, first, best->score, best->last - best->first + 1, best->first)) {
        best = ScoredWindow{first, last, score, {}};
      }
    };
    if (cfg.centered_windows) {
      for (std::size_t len = 1; len <= L; ++len) {
        const std::size_t left = (len - 1) / 2;
        const std::size_t right = len - 1 - left;
        if (a < lo + left || a + right > hi) break;
        consider(a - left, a + right);
      }
    } else {
      for (std::size_t first = lo; first <= a; ++first) {
        for (std::size_t last = a; last <= hi && last - first + 1 <= L; ++last) consider(first, last);
      }
    }
  }
  if (best) {
    const auto& sec = hs.sections[hs.tokens[best->first].section];
    best->span = SpanRef::in_doc(sec.id, hs.tokens[best->first].start, hs.tokens[best->last].end);
  }
  return best;
}

inline std::optional<ScoredWindow> best_window(const std::vector<std::size_t>& anchors,
                                               const std::vector<double>& span_mean, const TokenHiddenStates& hs,
                                               const InternalsConfig& cfg) {
  return best_window(anchors, span_mean, hs, cfg, candidate_doc_tokens(hs));
}

/// Checks that `hs` was extracted from this session: the output section
/// matches the output text and every document section names a session
/// document with identical text.
inline void check_states_match_session(const TokenHiddenStates& hs, const Session& session) {
  bool has_output = false;
  for (const auto& sec : hs.sections) {
    if (sec.kind == SectionKind::Output) {
      if (sec.text != session.output.text) {
        throw Error(ErrorCode::InvalidArgument, "hidden-state output section differs from session output");
      }
      has_output = true;
    } else if (sec.kind == SectionKind::Doc) {
      if (session.document(sec.id).text != sec.text) {
        throw Error(ErrorCode::InvalidArgument, "hidden-state section for '" + sec.id + "' differs from document");
      }
    }
  }
  if (!has_output) throw Error(ErrorCode::InvalidArgument, "hidden states have no output section");
}

/// Attributes the fact's extended output spans from hidden states. When
/// `restrict_to` is given, only document tokens inside those spans are
/// considered.
inline AttributionResult attribute_with_internals(const DecontextualizedFact& fact, const Session& session,
                                                  const TokenHiddenStates& hs,
                                                  const std::optional<std::vector<SpanRef>>& restrict_to = {},
                                                  const InternalsConfig& cfg = {}) {
  validate_config(cfg);
  if (hs.layer != cfg.layer) {
    throw Error(ErrorCode::InvalidArgument, "hidden states are from layer " + std::to_string(hs.layer) +
                                                " but layer " + std::to_string(cfg.layer) + " is configured");
  }
  check_states_match_session(hs, session);

  AttributionResult result;
  result.fact = fact;

  std::vector<std::size_t> output_tokens;
  for (std::size_t i = 0; i < hs.tokens.size(); ++i) {
    const auto& t = hs.tokens[i];
    if (hs.sections[t.section].kind != SectionKind::Output || t.header || t.start == t.end) continue;
    const bool overlaps = std::any_of(fact.extended_spans.begin(), fact.extended_spans.end(),
                                      [&](const SpanRef& s) { return t.start < s.end && s.start < t.end; });
    if (overlaps) output_tokens.push_back(i);
  }
  const auto doc_tokens = candidate_doc_tokens(hs, restrict_to);
  if (output_tokens.empty() || doc_tokens.empty()) return result;

  const auto extractive = identify_extractive_tokens(output_tokens, hs, cfg, doc_tokens);
  std::vector<std::vector<std::size_t>> runs;
  for (auto i : extractive) {
    if (runs.empty() || runs.back().back() + 1 != i) runs.emplace_back();
    runs.back().push_back(i);
  }

  std::vector<SpanRef> spans;
  for (const auto& run : runs) {
    const auto mean = span_representation(run, hs);
    const auto anchors = find_anchor_tokens(mean, hs, cfg, doc_tokens);
    if (auto w = best_window(anchors, mean, hs, cfg, doc_tokens)) spans.push_back(w->span);
  }
  std::sort(spans.begin(), spans.end(), [&](const SpanRef& a, const SpanRef& b) {
    const auto ia = session.document_index(a.doc_id), ib = session.document_index(b.doc_id);
    return ia != ib ? ia < ib : a < b;
  });
  std::vector<SpanRef> merged;
  for (const auto& s : spans) {
    if (!merged.empty() && merged.back().doc_id == s.doc_id && s.start <= merged.back().end) {
      merged.back().end = std::max(merged.back().end, s.end);
    } else {
      merged.push_back(s);
    }
  }
  result.source_spans = std::move(merged);
  result.non_attributed = result.source_spans.empty();
  return result;
}

}  // namespace laquer

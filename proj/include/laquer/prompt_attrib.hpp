#pragma once

// Attribution by prompting: the model copies supporting source spans,
// separated by semicolons, and each copied span is located in the sources
// exactly or within a small edit budget. Unusable replies are retried; after
// the last attempt the generation's own metadata, or the full documents, is
// returned instead.

#include <algorithm>
#include <cctype>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "laquer/fuzzy.hpp"
#include "laquer/generation.hpp"
#include "laquer/model.hpp"
#include "laquer/prompt_template.hpp"
#include "laquer/provider.hpp"
#include "laquer/sentences.hpp"
#include "laquer/sources_view.hpp"

namespace laquer {

inline constexpr std::string_view kAttributionInstruction =
    "Below are source texts and one output sentence that was written from them. Find the parts of the sources "
    "that the output sentence is based on. Copy verbatim the source spans that support it, and use a semicolon "
    "(;) as a delimiter between each consecutive span. Taken together, the copied spans must fully support the "
    "output sentence. Copy every span character for character from its source: do not rephrase, shorten, or "
    "correct it. You may copy several spans, from one source or from several, but include only spans that are "
    "needed and keep each one as short as it can be while still supporting the sentence.";

inline constexpr int kMaxAttributionAttempts = 5;

namespace detail {

// Exemplar sources rendered the same way the live sources are: all documents,
// only the documents that contain an attribution span, or only the sentences
// that contain one.
inline std::string render_exemplar_sources(const Exemplar& ex, SourceScope scope) {
  std::vector<std::string> blocks;
  for (const auto& src : ex.sources) {
    const bool cited = std::any_of(ex.attribution.begin(), ex.attribution.end(),
                                   [&](const std::string& a) { return src.text.find(a) != std::string::npos; });
    if (scope == SourceScope::AllDocuments) {
      blocks.push_back(src.text);
    } else if (scope == SourceScope::CitedDocuments) {
      if (cited) blocks.push_back(src.text);
    } else if (cited) {
      const auto sentences = split_sentences(src.text);
      const utf8::OffsetIndex index(src.text);
      for (const auto& a : ex.attribution) {
        const auto byte_pos = src.text.find(a);
        if (byte_pos == std::string::npos) continue;
        const std::size_t s = utf8::scalar_offset(src.text, byte_pos);
        const std::size_t e = s + utf8::length(a);
        std::size_t lo = s, hi = e;
        for (const auto& sent : sentences) {
          if (sent.start < e && s < sent.end) lo = std::min(lo, sent.start), hi = std::max(hi, sent.end);
        }
        blocks.emplace_back(index.slice(lo, hi));
      }
    }
  }
  if (blocks.empty()) {
    for (const auto& src : ex.sources) blocks.push_back(src.text);
  }
  std::string out;
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    if (k) out += "\n";
    out += "Source " + std::to_string(k + 1) + ": " + blocks[k] + "\n";
  }
  return out;
}

}  // namespace detail

inline std::string build_attribution_prompt(const SourcesView& view, std::string_view fact,
                                            const std::vector<Exemplar>& shots) {
  if (shots.size() > 3) throw Error(ErrorCode::InvalidArgument, "at most 3 exemplars are supported");
  std::string prompt(kAttributionInstruction);
  prompt += "\n\n";
  for (const auto& ex : shots) {
    std::string attribution;
    for (std::size_t i = 0; i < ex.attribution.size(); ++i) attribution += (i ? "; " : "") + ex.attribution[i];
    prompt += "Input:\n" + detail::render_exemplar_sources(ex, view.scope) + "\nOutput: " + ex.fact +
              "\n\nAttribution: " + attribution + "\n\n";
  }
  prompt += "Input:\n" + view.rendered_text + "\nOutput: " + std::string(fact) + "\n\nAttribution:";
  return prompt;
}

/// Splits a reply into candidate spans.
inline std::vector<std::string> parse_attribution_response(std::string_view text) {
  std::string body = trim(text);
  constexpr std::string_view label = "attribution:";
  if (body.size() >= label.size()) {
    std::string head = body.substr(0, label.size());
    std::transform(head.begin(), head.end(), head.begin(), [](unsigned char c) { return std::tolower(c); });
    if (head == label) body = body.substr(label.size());
  }
  std::vector<std::string> out;
  std::size_t begin = 0;
  while (begin <= body.size()) {
    const std::size_t semi = body.find(';', begin);
    const std::string piece = trim(std::string_view(body).substr(begin, semi == std::string::npos ? std::string::npos : semi - begin));
    if (!piece.empty()) out.push_back(piece);
    if (semi == std::string::npos) break;
    begin = semi + 1;
  }
  if (out.empty()) throw Error(ErrorCode::EmptyResponse, "no attribution spans in reply");
  return out;
}

struct LocatedCandidate {
  SpanRef span;
  std::size_t distance = 0;
};

/// Best location of `candidate` across the view: an exact hit in the first
/// segment that has one, else the smallest fuzzy distance (earlier segment
/// on ties).
inline std::optional<LocatedCandidate> locate_in_view(const SourcesView& view, std::string_view candidate) {
  const std::u32string pattern = utf8::decode(candidate);
  const std::size_t budget = fuzzy_budget(pattern.size());
  for (std::size_t k = 0; k < view.segments.size(); ++k) {
    if (const auto exact = fuzzy_locate(std::u32string_view(pattern), std::u32string_view(view.segments[k].text), 0)) {
      return LocatedCandidate{view.to_document(k, exact->span.start, exact->span.end), 0};
    }
  }
  std::optional<LocatedCandidate> best;
  for (std::size_t k = 0; k < view.segments.size(); ++k) {
    const auto match = fuzzy_locate(std::u32string_view(pattern), std::u32string_view(view.segments[k].text), budget);
    if (match && (!best || match->distance < best->distance)) {
      best = LocatedCandidate{view.to_document(k, match->span.start, match->span.end), match->distance};
    }
  }
  return best;
}

struct PromptAttributionOptions {
  std::vector<Exemplar> shots;
  int max_attempts = kMaxAttributionAttempts;
  std::string method_label = "prompt";
};

/// Locates every candidate; a candidate that fails is retried joined to its
/// successor, in case the source itself contained a semicolon.
inline std::pair<std::vector<LocatedCandidate>, bool> locate_candidates(const SourcesView& view,
                                                                        const std::vector<std::string>& candidates) {
  std::vector<LocatedCandidate> found;
  bool all = true;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (auto hit = locate_in_view(view, candidates[i])) {
      found.push_back(*hit);
      continue;
    }
    if (i + 1 < candidates.size()) {
      std::optional<LocatedCandidate> healed;
      for (std::string_view glue : {";", "; "}) {
        healed = locate_in_view(view, candidates[i] + std::string(glue) + candidates[i + 1]);
        if (healed) break;
      }
      if (healed) {
        found.push_back(*healed);
        ++i;
        continue;
      }
    }
    all = false;
  }
  return {std::move(found), all};
}

inline std::vector<SpanRef> merge_doc_spans(const std::vector<LocatedCandidate>& located) {
  std::vector<SpanRef> spans;
  for (const auto& l : located) spans.push_back(l.span);
  return merge_spans(std::move(spans));
}

inline AttributionResult attribute_with_prompt(const DecontextualizedFact& fact, const SourcesView& view,
                                               ChatProvider& chat, const PromptAttributionOptions& options = {}) {
  AttributionResult result;
  result.fact = fact;
  if (view.empty()) {
    // Nothing to search (e.g. the sentence carries no citation).
    result.non_attributed = true;
    return result;
  }

  const std::string prompt = build_attribution_prompt(view, fact.text, options.shots);
  ChatParams params{0.0, 512, "attribution", options.method_label};
  std::vector<LocatedCandidate> last_partial;
  int failures = 0;
  for (int attempt = 1; attempt <= options.max_attempts; ++attempt) {
    std::vector<std::string> candidates;
    try {
      candidates = parse_attribution_response(chat.complete(prompt, params));
    } catch (const std::exception& e) {
      log(LogLevel::Info, "attribution attempt " + std::to_string(attempt) + " unusable: " + e.what());
      ++failures;
      continue;
    }
    auto [located, all] = locate_candidates(view, candidates);
    if (all) {
      result.source_spans = merge_doc_spans(located);
      result.retries = attempt - 1;
      result.non_attributed = result.source_spans.empty();
      return result;
    }
    log(LogLevel::Info, "attribution attempt " + std::to_string(attempt) + ": " +
                            std::to_string(candidates.size() - located.size()) + " span(s) not found in sources");
    last_partial = std::move(located);
    ++failures;
  }

  result.retries = failures;
  if (!last_partial.empty()) {
    result.source_spans = merge_doc_spans(last_partial);
  } else {
    result.source_spans = view.spans();
    result.fallback_used = view.scope == SourceScope::AllDocuments ? Fallback::FullDocuments : Fallback::Metadata;
  }
  result.non_attributed = result.source_spans.empty();
  return result;
}

}  // namespace laquer

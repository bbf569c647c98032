#pragma once

#include <algorithm>
#include <compare>
#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "laquer/error.hpp"
#include "laquer/utf8.hpp"

namespace laquer {

struct Document {
  std::string id;
  std::string text;

  friend bool operator==(const Document&, const Document&) = default;
};

enum class SpanTarget { Output, Doc };

/// Half-open interval of Unicode scalar offsets inside the generated output
/// or inside one named document.
struct SpanRef {
  SpanTarget target = SpanTarget::Output;
  std::string doc_id;  // empty when target == Output
  std::size_t start = 0;
  std::size_t end = 0;

  static SpanRef output(std::size_t start, std::size_t end) { return {SpanTarget::Output, {}, start, end}; }
  static SpanRef in_doc(std::string id, std::size_t start, std::size_t end) {
    return {SpanTarget::Doc, std::move(id), start, end};
  }

  bool is_output() const { return target == SpanTarget::Output; }
  std::size_t length() const { return end - start; }

  friend auto operator<=>(const SpanRef&, const SpanRef&) = default;
};

enum class GenerationMethod { Vanilla, ALCE, AttrFirst, External };
enum class AttributionMethod { Prompt, Internals };
enum class Provenance { LLM, PassThrough };
enum class Fallback { None, Metadata, FullDocuments };

inline std::string to_string(GenerationMethod m) {
  switch (m) {
    case GenerationMethod::Vanilla: return "vanilla";
    case GenerationMethod::ALCE: return "alce";
    case GenerationMethod::AttrFirst: return "attrfirst";
    case GenerationMethod::External: return "external";
  }
  return "external";
}

inline GenerationMethod parse_generation_method(std::string_view s) {
  if (s == "vanilla") return GenerationMethod::Vanilla;
  if (s == "alce") return GenerationMethod::ALCE;
  if (s == "attrfirst") return GenerationMethod::AttrFirst;
  if (s == "external") return GenerationMethod::External;
  throw Error(ErrorCode::InvalidArgument, "unknown generation method '" + std::string(s) + "'");
}

inline std::string to_string(AttributionMethod m) { return m == AttributionMethod::Prompt ? "prompt" : "internals"; }

inline AttributionMethod parse_attribution_method(std::string_view s) {
  if (s == "prompt") return AttributionMethod::Prompt;
  if (s == "internals") return AttributionMethod::Internals;
  throw Error(ErrorCode::InvalidArgument, "unknown attribution method '" + std::string(s) + "'");
}

inline std::string to_string(Provenance p) { return p == Provenance::LLM ? "llm" : "passthrough"; }

inline std::string to_string(Fallback f) {
  switch (f) {
    case Fallback::None: return "none";
    case Fallback::Metadata: return "metadata";
    case Fallback::FullDocuments: return "full_documents";
  }
  return "none";
}

using OffsetPair = std::pair<std::size_t, std::size_t>;

struct AttributionRecord {
  std::size_t sentence_idx = 0;
  std::string doc_id;
  std::optional<std::vector<OffsetPair>> offsets;  // absent: document-level citation

  friend bool operator==(const AttributionRecord&, const AttributionRecord&) = default;
};

struct AttributionMetadata {
  std::vector<AttributionRecord> records;

  bool has_span_offsets() const {
    return std::any_of(records.begin(), records.end(), [](const auto& r) { return r.offsets.has_value(); });
  }

  friend bool operator==(const AttributionMetadata&, const AttributionMetadata&) = default;
};

struct GeneratedOutput {
  std::string text;
  std::vector<SpanRef> sentences;
  std::optional<AttributionMetadata> metadata;
  GenerationMethod method = GenerationMethod::External;

  friend bool operator==(const GeneratedOutput&, const GeneratedOutput&) = default;
};

struct HighlightQuery {
  std::vector<SpanRef> spans;
  AttributionMethod method = AttributionMethod::Prompt;
  bool use_metadata = true;

  friend bool operator==(const HighlightQuery&, const HighlightQuery&) = default;
};

struct DecontextualizedFact {
  std::string text;
  std::vector<SpanRef> extended_spans;
  Provenance provenance = Provenance::PassThrough;

  friend bool operator==(const DecontextualizedFact&, const DecontextualizedFact&) = default;
};

struct AttributionResult {
  std::vector<SpanRef> source_spans;
  DecontextualizedFact fact;
  Fallback fallback_used = Fallback::None;
  bool non_attributed = true;
  int retries = 0;

  friend bool operator==(const AttributionResult&, const AttributionResult&) = default;
};

struct HistoryEntry {
  HighlightQuery query;
  AttributionResult result;
  std::string timestamp;  // ISO-8601 UTC

  friend bool operator==(const HistoryEntry&, const HistoryEntry&) = default;
};

/// Documents, optional question, the generated output, and the queries made
/// against it. History is append-only.
struct Session {
  std::string id;
  std::vector<Document> documents;
  std::optional<std::string> question;
  GeneratedOutput output;
  std::vector<HistoryEntry> history;

  const Document* find_document(std::string_view doc_id) const {
    for (const auto& d : documents)
      if (d.id == doc_id) return &d;
    return nullptr;
  }

  const Document& document(std::string_view doc_id) const {
    if (const auto* d = find_document(doc_id)) return *d;
    throw Error(ErrorCode::UnknownDocId, "no document '" + std::string(doc_id) + "'");
  }

  std::size_t document_index(std::string_view doc_id) const {
    for (std::size_t i = 0; i < documents.size(); ++i)
      if (documents[i].id == doc_id) return i;
    throw Error(ErrorCode::UnknownDocId, "no document '" + std::string(doc_id) + "'");
  }

  friend bool operator==(const Session&, const Session&) = default;
};

// ---------------------------------------------------------------------------
// Validation

inline void validate_documents(const std::vector<Document>& docs) {
  std::set<std::string> seen;
  for (const auto& d : docs) {
    if (d.id.empty()) throw Error(ErrorCode::InvalidArgument, "document id must be nonempty");
    if (d.text.empty()) throw Error(ErrorCode::InvalidArgument, "document '" + d.id + "' is empty");
    if (!seen.insert(d.id).second) throw Error(ErrorCode::InvalidArgument, "duplicate document id '" + d.id + "'");
  }
}

inline void validate_span(const SpanRef& span, std::size_t target_length) {
  if (span.start >= span.end || span.end > target_length) {
    throw Error(ErrorCode::OffsetOutOfRange, "span [" + std::to_string(span.start) + ", " + std::to_string(span.end) +
                                                 ") invalid for text of length " + std::to_string(target_length));
  }
}

inline void validate_span(const SpanRef& span, const Session& session) {
  if (span.is_output()) {
    validate_span(span, utf8::length(session.output.text));
  } else {
    validate_span(span, utf8::length(session.document(span.doc_id).text));
  }
}

/// Checks doc ids, sentence indices and offsets of `metadata` against the
/// session's documents and output sentence count.
inline void validate_metadata(const AttributionMetadata& metadata, const std::vector<Document>& docs,
                              std::size_t sentence_count) {
  for (const auto& r : metadata.records) {
    const auto it = std::find_if(docs.begin(), docs.end(), [&](const Document& d) { return d.id == r.doc_id; });
    if (it == docs.end()) throw Error(ErrorCode::UnknownDocId, "metadata references unknown document '" + r.doc_id + "'");
    if (r.sentence_idx >= sentence_count) {
      throw Error(ErrorCode::OffsetOutOfRange, "metadata sentence index " + std::to_string(r.sentence_idx) +
                                                   " beyond " + std::to_string(sentence_count) + " sentences");
    }
    if (r.offsets) {
      const std::size_t len = utf8::length(it->text);
      for (const auto& [s, e] : *r.offsets) validate_span(SpanRef::in_doc(r.doc_id, s, e), len);
    }
  }
}

/// Sorts output highlights and merges overlapping or touching spans.
inline HighlightQuery normalize_query(std::vector<SpanRef> spans, AttributionMethod method = AttributionMethod::Prompt,
                                      bool use_metadata = true, std::optional<std::size_t> output_length = {}) {
  if (spans.empty()) throw Error(ErrorCode::EmptyQuery, "a query needs at least one highlighted span");
  for (const auto& s : spans) {
    if (!s.is_output()) throw Error(ErrorCode::TargetMismatch, "query span targets document '" + s.doc_id + "'");
    if (output_length) {
      validate_span(s, *output_length);
    } else if (s.start >= s.end) {
      throw Error(ErrorCode::OffsetOutOfRange, "empty or reversed query span");
    }
  }
  std::sort(spans.begin(), spans.end());
  std::vector<SpanRef> merged;
  for (const auto& s : spans) {
    if (!merged.empty() && s.start <= merged.back().end) {
      merged.back().end = std::max(merged.back().end, s.end);
    } else {
      merged.push_back(s);
    }
  }
  return HighlightQuery{std::move(merged), method, use_metadata};
}

/// Union of span lists over the same target, merged.
inline std::vector<SpanRef> merge_spans(std::vector<SpanRef> spans) {
  std::sort(spans.begin(), spans.end());
  std::vector<SpanRef> merged;
  for (const auto& s : spans) {
    if (!merged.empty() && merged.back().target == s.target && merged.back().doc_id == s.doc_id &&
        s.start <= merged.back().end) {
      merged.back().end = std::max(merged.back().end, s.end);
    } else {
      merged.push_back(s);
    }
  }
  return merged;
}

inline std::string span_text(const SpanRef& span, const Session& session) {
  const std::string& text = span.is_output() ? session.output.text : session.document(span.doc_id).text;
  return utf8::slice(text, span.start, span.end);
}

/// Indices of output sentences that overlap any of `spans`.
inline std::vector<std::size_t> sentences_overlapping(const GeneratedOutput& output, const std::vector<SpanRef>& spans) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < output.sentences.size(); ++i) {
    const auto& sent = output.sentences[i];
    for (const auto& s : spans) {
      if (s.start < sent.end && sent.start < s.end) {
        out.push_back(i);
        break;
      }
    }
  }
  return out;
}

}  // namespace laquer

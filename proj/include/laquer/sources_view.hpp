#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "laquer/model.hpp"
#include "laquer/utf8.hpp"

namespace laquer {

enum class SourceScope { AllDocuments, CitedDocuments, MetadataSpans };

inline std::string to_string(SourceScope s) {
  switch (s) {
    case SourceScope::AllDocuments: return "all_documents";
    case SourceScope::CitedDocuments: return "cited_documents";
    case SourceScope::MetadataSpans: return "metadata_spans";
  }
  return "all_documents";
}

/// One rendered source: a document slice and where its text sits in the
/// rendered string.
struct ViewSegment {
  SpanRef source;                 // document span shown
  std::size_t rendered_start = 0; // scalar offset of the slice in rendered_text
  std::u32string text;            // the slice itself
};

/// The search space shown to an attribution method, rendered as
/// "Source k: <text>" blocks.
struct SourcesView {
  SourceScope scope = SourceScope::AllDocuments;
  std::vector<ViewSegment> segments;
  std::string rendered_text;

  bool empty() const { return segments.empty(); }

  std::vector<SpanRef> spans() const {
    std::vector<SpanRef> out;
    for (const auto& s : segments) out.push_back(s.source);
    return out;
  }

  /// Document position of a rendered character; nothing for header text.
  std::optional<std::pair<std::string, std::size_t>> map_back(std::size_t rendered_offset) const {
    for (const auto& seg : segments) {
      if (rendered_offset >= seg.rendered_start && rendered_offset < seg.rendered_start + seg.text.size()) {
        return std::make_pair(seg.source.doc_id, seg.source.start + (rendered_offset - seg.rendered_start));
      }
    }
    return std::nullopt;
  }

  /// Document span for [start, end) inside segment `index`.
  SpanRef to_document(std::size_t index, std::size_t start, std::size_t end) const {
    const auto& seg = segments.at(index);
    return SpanRef::in_doc(seg.source.doc_id, seg.source.start + start, seg.source.start + end);
  }
};

/// Renders document spans (in the order given) into a view.
inline SourcesView render_sources(SourceScope scope, const std::vector<SpanRef>& spans, const Session& session) {
  SourcesView view;
  view.scope = scope;
  std::u32string rendered;
  for (std::size_t k = 0; k < spans.size(); ++k) {
    const auto& span = spans[k];
    const std::u32string doc = utf8::decode(session.document(span.doc_id).text);
    validate_span(span, doc.size());
    if (k) rendered += U"\n";
    rendered += utf8::decode("Source " + std::to_string(k + 1) + ": ");
    ViewSegment seg{span, rendered.size(), doc.substr(span.start, span.end - span.start)};
    rendered += seg.text;
    rendered += U"\n";
    view.segments.push_back(std::move(seg));
  }
  view.rendered_text = utf8::encode(rendered);
  return view;
}

/// Chooses what an attribution method searches.
///
/// Without metadata (or with `use_metadata` off) every document is shown in
/// id order. With document-level metadata only the documents cited by the
/// queried sentences are shown; with span-level metadata only the cited
/// slices. `sentence_scope` restricts which records count; when it is given
/// and no record matches, the view is empty.
inline SourcesView build_sources_view(const Session& session, const AttributionMetadata* metadata,
                                      const std::optional<std::vector<std::size_t>>& sentence_scope,
                                      bool use_metadata = true) {
  if (metadata) {
    for (const auto& r : metadata->records) session.document(r.doc_id);
  }
  if (!metadata || !use_metadata) {
    std::vector<const Document*> docs;
    for (const auto& d : session.documents) docs.push_back(&d);
    std::sort(docs.begin(), docs.end(), [](const Document* a, const Document* b) { return a->id < b->id; });
    std::vector<SpanRef> spans;
    for (const auto* d : docs) spans.push_back(SpanRef::in_doc(d->id, 0, utf8::length(d->text)));
    return render_sources(SourceScope::AllDocuments, spans, session);
  }

  std::vector<const AttributionRecord*> records;
  for (const auto& r : metadata->records) {
    if (!sentence_scope || std::find(sentence_scope->begin(), sentence_scope->end(), r.sentence_idx) !=
                               sentence_scope->end()) {
      records.push_back(&r);
    }
  }
  const bool span_level = std::any_of(records.begin(), records.end(), [](auto* r) { return r->offsets.has_value(); });

  std::vector<SpanRef> spans;
  for (const auto* r : records) {
    if (r->offsets) {
      for (const auto& [s, e] : *r->offsets) spans.push_back(SpanRef::in_doc(r->doc_id, s, e));
    } else {
      spans.push_back(SpanRef::in_doc(r->doc_id, 0, utf8::length(session.document(r->doc_id).text)));
    }
  }
  // Document order, then offset; overlapping slices of one document merge.
  std::sort(spans.begin(), spans.end(), [&](const SpanRef& a, const SpanRef& b) {
    const auto ia = session.document_index(a.doc_id), ib = session.document_index(b.doc_id);
    return ia != ib ? ia < ib : (a.start != b.start ? a.start < b.start : a.end < b.end);
  });
  std::vector<SpanRef> merged;
  for (const auto& s : spans) {
    if (!merged.empty() && merged.back().doc_id == s.doc_id && s.start <= merged.back().end) {
      merged.back().end = std::max(merged.back().end, s.end);
    } else {
      merged.push_back(s);
    }
  }
  return render_sources(span_level ? SourceScope::MetadataSpans : SourceScope::CitedDocuments, merged, session);
}

}  // namespace laquer

#pragma once

// Stage-1 adapters: produce an output from documents (vanilla or with
// inline citations) or ingest one produced elsewhere together with its
// attribution metadata.

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "laquer/metadata.hpp"
#include "laquer/model.hpp"
#include "laquer/prompt_template.hpp"
#include "laquer/provider.hpp"
#include "laquer/sentences.hpp"

namespace laquer {

/// Few-shot exemplar, shared by the attribution prompt and the citation
/// generation prompt.
struct Exemplar {
  std::vector<Document> sources;
  std::string fact;
  std::vector<std::string> attribution;
};

struct CitationMarker {
  std::size_t sentence_idx = 0;
  std::size_t doc_ordinal = 0;  // 1-based, in prompt order

  friend bool operator==(const CitationMarker&, const CitationMarker&) = default;
};

struct CitationParse {
  std::string clean_text;
  std::vector<CitationMarker> markers;
};

namespace detail {

inline bool is_terminal(char32_t c) { return c == U'.' || c == U'!' || c == U'?'; }

struct MarkerHit {
  std::size_t begin;
  std::size_t end;
  std::size_t ordinal;
};

// "[k]" with k >= 1 at position i, or nothing.
inline std::optional<MarkerHit> marker_at(const std::u32string& t, std::size_t i) {
  if (t[i] != U'[') return std::nullopt;
  std::size_t j = i + 1;
  std::size_t value = 0;
  while (j < t.size() && is_digit(t[j]) && j - i <= 6) value = value * 10 + (t[j++] - U'0');
  if (j == i + 1 || j >= t.size() || t[j] != U']' || value == 0) return std::nullopt;
  return MarkerHit{i, j + 1, value};
}

}  // namespace detail

/// Strips "[k]" citation markers and records which sentence each cites.
///
/// A marker counts when it sits next to whitespace or sentence-final
/// punctuation (before or after it), or next to another marker; anything else
/// stays literal. Whitespace directly before a group of markers is removed
/// with it. A marker belongs to the sentence of the last character before it.
inline CitationParse parse_citation_markers(std::string_view text) {
  using namespace detail;
  const std::u32string t = utf8::decode(text);

  // Find groups of adjacent markers (possibly separated by spaces).
  std::vector<std::pair<std::size_t, std::size_t>> groups;  // [begin, end) in t
  std::vector<std::vector<std::size_t>> group_ordinals;
  std::size_t i = 0;
  while (i < t.size()) {
    const auto hit = marker_at(t, i);
    if (!hit) {
      ++i;
      continue;
    }
    std::vector<MarkerHit> run{*hit};
    std::size_t j = hit->end;
    while (true) {
      std::size_t k = j;
      while (k < t.size() && t[k] == U' ') ++k;
      if (k >= t.size()) break;
      const auto next = marker_at(t, k);
      if (!next) break;
      run.push_back(*next);
      j = next->end;
    }
    const char32_t before = run.front().begin == 0 ? U'\0' : t[run.front().begin - 1];
    const char32_t after = j >= t.size() ? U' ' : t[j];
    const bool ok = (before != U'\0' && (is_space(before) || is_terminal(before))) || is_space(after) ||
                    is_terminal(after) || after == U',' || after == U';' || after == U':' || run.size() > 1;
    if (!ok) {
      i = hit->end;
      continue;
    }
    groups.emplace_back(run.front().begin, j);
    std::vector<std::size_t> ords;
    for (const auto& m : run) ords.push_back(m.ordinal);
    group_ordinals.push_back(std::move(ords));
    i = j;
  }

  std::u32string clean;
  clean.reserve(t.size());
  std::vector<std::size_t> group_positions;  // clean index where each group was cut
  std::size_t cursor = 0;
  for (const auto& [gb, ge] : groups) {
    std::size_t cut = gb;
    while (cut > cursor && is_space(t[cut - 1])) --cut;
    clean.append(t, cursor, cut - cursor);
    group_positions.push_back(clean.size());
    cursor = ge;
  }
  clean.append(t, cursor, std::u32string::npos);

  CitationParse out;
  out.clean_text = utf8::encode(clean);
  const auto sentences = split_sentences(out.clean_text);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    std::size_t pos = group_positions[g];
    while (pos > 0 && is_space(clean[pos - 1])) --pos;
    if (sentences.empty()) continue;
    std::size_t sentence = 0;
    for (std::size_t s = 0; s < sentences.size(); ++s)
      if (pos > sentences[s].start) sentence = s;
    for (auto ord : group_ordinals[g]) {
      const CitationMarker m{sentence, ord};
      if (std::find(out.markers.begin(), out.markers.end(), m) == out.markers.end()) out.markers.push_back(m);
    }
  }
  return out;
}

struct GenerationOptions {
  std::string instruction = "Write a concise, factual summary of the documents below.";
  PromptTemplate vanilla_prompt{std::string(kVanillaTemplate)};
  PromptTemplate alce_prompt{std::string(kAlceTemplate)};
  std::vector<Exemplar> alce_examples;
  double vanilla_temperature = 0.0;
  double alce_temperature = 0.5;
  int max_tokens = 1024;
};

inline std::string render_numbered_documents(const std::vector<Document>& docs) {
  std::string out;
  for (std::size_t k = 0; k < docs.size(); ++k) {
    out += "Document [" + std::to_string(k + 1) + "] (" + docs[k].id + "):\n" + docs[k].text + "\n\n";
  }
  return out;
}

namespace detail {

inline void require_documents(const std::vector<Document>& docs) {
  if (docs.empty()) throw Error(ErrorCode::InvalidArgument, "generation needs at least one document");
  validate_documents(docs);
}

inline std::string generate_text(ChatProvider& chat, const std::string& prompt, const ChatParams& params) {
  std::string text = trim(chat.complete(prompt, params));
  if (text.empty()) throw Error(ErrorCode::ProviderExhausted, "provider returned an empty generation");
  return text;
}

}  // namespace detail

/// Output without any attribution.
inline GeneratedOutput generate_vanilla(const std::vector<Document>& docs, ChatProvider& chat,
                                        const GenerationOptions& options = {}) {
  detail::require_documents(docs);
  const std::string prompt =
      options.vanilla_prompt.render({{"instruction", options.instruction}, {"documents", render_numbered_documents(docs)}});
  ChatParams params{options.vanilla_temperature, options.max_tokens, "generate", "vanilla"};
  GeneratedOutput out;
  out.text = detail::generate_text(chat, prompt, params);
  out.sentences = split_sentences(out.text);
  out.method = GenerationMethod::Vanilla;
  return out;
}

/// Output with inline "[k]" citations, turned into document-level metadata.
inline GeneratedOutput generate_alce(const std::vector<Document>& docs, ChatProvider& chat,
                                     const GenerationOptions& options = {}) {
  detail::require_documents(docs);
  std::string examples;
  for (const auto& ex : options.alce_examples) {
    examples += render_numbered_documents(ex.sources) + "Answer: " + ex.fact + "\n\n";
  }
  const std::string prompt = options.alce_prompt.render({{"instruction", options.instruction},
                                                         {"examples", examples},
                                                         {"documents", render_numbered_documents(docs)}});
  ChatParams params{options.alce_temperature, options.max_tokens, "generate", "alce"};
  const std::string raw = detail::generate_text(chat, prompt, params);
  const auto parsed = parse_citation_markers(raw);

  GeneratedOutput out;
  out.text = parsed.clean_text;
  out.sentences = split_sentences(out.text);
  out.method = GenerationMethod::ALCE;
  AttributionMetadata md;
  for (const auto& m : parsed.markers) {
    if (m.doc_ordinal > docs.size()) {
      log(LogLevel::Warn, "dropping citation [" + std::to_string(m.doc_ordinal) + "]: only " +
                              std::to_string(docs.size()) + " documents in prompt");
      continue;
    }
    md.records.push_back({m.sentence_idx, docs[m.doc_ordinal - 1].id, std::nullopt});
  }
  out.metadata = std::move(md);
  return out;
}

/// Wraps an output produced elsewhere. Span-level metadata marks it as an
/// attribute-first generation.
inline GeneratedOutput ingest_external(const std::vector<Document>& docs, std::string output_text,
                                       const std::optional<std::string>& metadata_text = {}) {
  GeneratedOutput out;
  out.text = std::move(output_text);
  out.sentences = split_sentences(out.text);
  out.method = GenerationMethod::External;
  if (metadata_text) {
    AttributionMetadata md = parse_metadata(*metadata_text);
    validate_metadata(md, docs, out.sentences.size());
    if (md.has_span_offsets()) out.method = GenerationMethod::AttrFirst;
    out.metadata = std::move(md);
  }
  return out;
}

}  // namespace laquer

#pragma once

#include <string>
#include <vector>

#include "laquer/align.hpp"
#include "laquer/model.hpp"
#include "laquer/prompt_template.hpp"
#include "laquer/provider.hpp"

namespace laquer {

struct DecontextOptions {
  PromptTemplate prompt{std::string(kDecontextualizeTemplate)};
  int retries = 2;
};

/// Output spans aligned to `fact` across the whole output, unioned with the
/// original highlights. Words are matched inside the highlighted sentences
/// first, so a repeated word resolves to the occurrence near the highlight.
inline std::vector<SpanRef> extend_highlights(std::string_view fact, const GeneratedOutput& output,
                                              const std::vector<SpanRef>& original) {
  std::vector<SpanRef> spans = original;
  if (!fact.empty()) {
    std::optional<std::pair<std::size_t, std::size_t>> region;
    if (!original.empty()) {
      std::size_t lo = original.front().start, hi = original.front().end;
      for (const auto& s : original) lo = std::min(lo, s.start), hi = std::max(hi, s.end);
      for (auto idx : sentences_overlapping(output, original)) {
        lo = std::min(lo, output.sentences[idx].start);
        hi = std::max(hi, output.sentences[idx].end);
      }
      region = std::make_pair(lo, hi);
    }
    const auto aligned = align_fact_to_text(fact, output.text, 0, region);
    spans.insert(spans.end(), aligned.output_spans.begin(), aligned.output_spans.end());
  }
  if (spans.empty()) return spans;
  return normalize_query(std::move(spans)).spans;
}

inline std::string joined_highlights(const HighlightQuery& query, const GeneratedOutput& output,
                                     std::string_view separator) {
  const utf8::OffsetIndex index(output.text);
  std::string out;
  for (std::size_t i = 0; i < query.spans.size(); ++i) {
    if (i) out += separator;
    out += index.slice(query.spans[i].start, query.spans[i].end);
  }
  return out;
}

/// Rewrites the highlighted spans into a standalone fact via the chat
/// provider and extends the highlight set to every output span the fact
/// draws on. If the provider keeps failing, the concatenated highlights are
/// passed through unchanged.
inline DecontextualizedFact decontextualize(const HighlightQuery& query, const GeneratedOutput& output,
                                            ChatProvider& chat, const DecontextOptions& options = {}) {
  const std::string prompt = options.prompt.render(
      {{"highlights", joined_highlights(query, output, " ... ")}, {"output", output.text}});
  ChatParams params;
  params.temperature = 0.0;
  params.max_tokens = 256;
  params.task = "decontextualize";
  const auto reply = complete_with_retries(chat, prompt, params, options.retries, [](int attempt, const std::string& why) {
    log(LogLevel::Warn, "decontextualization attempt " + std::to_string(attempt) + " failed: " + why);
  });

  DecontextualizedFact fact;
  if (reply) {
    std::string text = trim(*reply);
    if (text.size() >= 2 && text.front() == '"' && text.back() == '"') text = trim(text.substr(1, text.size() - 2));
    fact.text = text;
    fact.provenance = Provenance::LLM;
  }
  if (fact.text.empty()) {
    fact.text = joined_highlights(query, output, " ");
    fact.provenance = Provenance::PassThrough;
  }
  fact.extended_spans = extend_highlights(fact.text, output, query.spans);
  return fact;
}

}  // namespace laquer

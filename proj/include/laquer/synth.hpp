#pragma once

// Benchmark query synthesis: decompose each output sentence into atomic
// facts, align each fact back to its sentence to obtain the highlight a user
// would have made, and sample a fixed number of them.

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "laquer/align.hpp"
#include "laquer/model.hpp"
#include "laquer/prompt_template.hpp"
#include "laquer/provider.hpp"
#include "laquer/tokenize.hpp"

namespace laquer {

enum class SpanType { Phrase, SimpleClause, ComplexSentence };

inline std::string to_string(SpanType t) {
  switch (t) {
    case SpanType::Phrase: return "phrase";
    case SpanType::SimpleClause: return "simple_clause";
    case SpanType::ComplexSentence: return "complex_sentence";
  }
  return "phrase";
}

struct SynthesizedQuery {
  std::string fact_text;
  HighlightQuery highlight;
  std::size_t source_sentence_idx = 0;
  SpanType span_type = SpanType::Phrase;
  double coverage = 0.0;

  friend bool operator==(const SynthesizedQuery&, const SynthesizedQuery&) = default;
};

inline constexpr double kMinSynthesisCoverage = 0.5;
inline constexpr std::size_t kDefaultSynthesizedQueries = 10;

// ---------------------------------------------------------------------------
// Span-type classification

namespace detail {

inline bool in_list(std::string_view w, std::initializer_list<std::string_view> list) {
  return std::find(list.begin(), list.end(), w) != list.end();
}

inline bool is_finite_aux(std::string_view w) {
  return in_list(w, {"is", "are", "was", "were", "am", "has", "have", "had", "do", "does", "did", "will", "would",
                     "shall", "should", "can", "could", "may", "might", "must", "'re", "'ve", "'ll", "'m", "'d",
                     "isn", "aren", "wasn", "weren", "ca", "wo"});
}

inline bool is_irregular_past(std::string_view w) {
  return in_list(w, {"arose",  "ate",    "became", "began",   "bit",     "blew",    "broke",   "brought", "built",
                     "bought", "caught", "chose",  "came",    "dealt",   "drew",    "drank",   "drove",   "fell",
                     "felt",   "fought", "found",  "fled",    "flew",    "forgot",  "froze",   "got",     "gave",
                     "went",   "grew",   "heard",  "hid",     "held",    "kept",    "knew",    "laid",    "led",
                     "left",   "lent",   "lost",   "made",    "meant",   "met",     "paid",    "ran",     "rang",
                     "rose",   "said",   "saw",    "sought",  "sold",    "sent",    "shook",   "shone",   "shot",
                     "sang",   "sank",   "sat",    "slept",   "spoke",   "spent",   "stood",   "stole",   "struck",
                     "swore",  "swam",   "took",   "taught",  "tore",    "told",    "thought", "threw",   "understood",
                     "woke",   "wore",   "won",    "wrote",   "withdrew", "overcame", "undertook", "forbade"});
}

inline bool is_determiner(std::string_view w) {
  return in_list(w, {"a", "an", "the", "this", "these", "those", "his", "her", "its", "their", "our", "my", "your",
                     "some", "any", "no", "every", "each", "many", "several", "few", "all", "both", "such", "'s"});
}

inline bool is_preposition(std::string_view w) {
  return in_list(w, {"of", "in", "on", "at", "by", "for", "with", "from", "to", "into", "onto", "over", "under",
                     "about", "across", "against", "among", "between", "through", "during", "without", "within",
                     "toward", "towards", "upon", "around", "behind", "beyond", "despite", "like", "near", "per",
                     "via", "and", "or", "nor", "but"});
}

inline bool is_subordinator(std::string_view w) {
  return in_list(w, {"while", "because", "although", "though", "that", "which", "who", "whom", "whose", "when",
                     "whenever", "where", "whereas", "wherever", "if", "unless", "since", "until", "once", "after",
                     "before", "as", "whether"});
}

// Words ending in "ed"/"s" that are almost never finite verbs.
inline bool is_suffix_exception(std::string_view w) {
  return in_list(w, {"need", "seed", "speed", "bed", "red", "shed", "indeed", "hundred", "sacred", "naked", "wicked",
                     "kindred", "embed", "breed", "feed", "weed", "greed", "reed", "wed", "is", "was", "has", "does",
                     "this", "his", "its", "us", "yes", "thus", "plus", "always", "perhaps", "news", "series",
                     "species", "means", "sometimes", "less", "unless", "across", "whereas", "various", "famous",
                     "previous", "serious", "numerous", "obvious", "bus", "gas", "bias", "status", "campus", "focus",
                     "virus", "bonus", "census", "consensus", "analysis", "basis", "crisis", "thesis", "chaos",
                     "towards", "afterwards", "besides", "ones", "others", "yours", "ours", "theirs", "hers"});
}

}  // namespace detail

/// Token positions of finite verbs, found with closed-class lists plus
/// suffix heuristics.
inline std::vector<std::size_t> finite_verb_positions(std::string_view text) {
  std::vector<std::string> words;
  for (const auto& t : tokenize_lemmatize(text)) {
    if (t.is_punct) {
      words.emplace_back(",");  // boundary marker; never a verb
      continue;
    }
    words.push_back(detail::lower_normalized(utf8::decode(t.surface)));
  }
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    const std::string& w = words[i];
    const std::string prev = i ? words[i - 1] : std::string();
    const std::string next = i + 1 < words.size() ? words[i + 1] : std::string();
    const bool has_digit = std::any_of(w.begin(), w.end(), [](unsigned char c) { return std::isdigit(c); });
    if (w == "," || has_digit || detail::is_suffix_exception(w)) continue;
    if (detail::is_finite_aux(w) || detail::is_irregular_past(w)) {
      out.push_back(i);
      continue;
    }
    if (i == 0 || detail::is_determiner(prev) || prev == "to") continue;
    if (w.size() > 3 && w.ends_with("ed")) {
      out.push_back(i);
      continue;
    }
    if (w.size() > 3 && w.ends_with("s") && !w.ends_with("ss") && !w.ends_with("us") && !w.ends_with("is") &&
        !next.empty() && next != "," && !detail::is_preposition(prev) && !detail::is_preposition(next) &&
        !detail::is_finite_aux(next)) {
      out.push_back(i);
    }
  }
  return out;
}

/// Complex when a subordinator after the first word introduces a clause (a
/// finite verb follows it); simple with any finite verb; else a phrase. The
/// main clause's own verb is not required: present-tense and irregular forms
/// like "spread" escape the suffix heuristics.
inline SpanType classify_span_type(std::string_view fact) {
  const auto verbs = finite_verb_positions(fact);
  if (verbs.empty()) return SpanType::Phrase;
  std::size_t i = 0;
  for (const auto& t : tokenize_lemmatize(fact)) {
    const std::string w = t.is_punct ? std::string(",") : detail::lower_normalized(utf8::decode(t.surface));
    if (i > 0 && detail::is_subordinator(w) &&
        std::any_of(verbs.begin(), verbs.end(), [&](std::size_t v) { return v > i; })) {
      return SpanType::ComplexSentence;
    }
    ++i;
  }
  return SpanType::SimpleClause;
}

// ---------------------------------------------------------------------------
// Decomposition

/// Strips a list bullet ("- ", "* ", "• ", "3. ", "3) ") from one line.
inline std::string strip_list_marker(std::string_view line) {
  std::string s = trim(line);
  for (std::string_view b : {"- ", "* ", "• "}) {
    if (s.starts_with(b)) return trim(std::string_view(s).substr(b.size()));
  }
  std::size_t i = 0;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
  if (i > 0 && i + 1 < s.size() && (s[i] == '.' || s[i] == ')') && s[i + 1] == ' ') {
    return trim(std::string_view(s).substr(i + 2));
  }
  return s;
}

inline std::vector<std::string> parse_fact_list(std::string_view reply) {
  std::vector<std::string> facts;
  std::size_t begin = 0;
  while (begin <= reply.size()) {
    auto end = reply.find('\n', begin);
    if (end == std::string_view::npos) end = reply.size();
    std::string fact = strip_list_marker(reply.substr(begin, end - begin));
    if (!fact.empty()) facts.push_back(std::move(fact));
    begin = end + 1;
  }
  return facts;
}

inline std::vector<std::string> decompose_sentence(std::string_view sentence, std::string_view context,
                                                   ChatProvider& chat,
                                                   const PromptTemplate& prompt = PromptTemplate(std::string(kDecomposeTemplate))) {
  const std::string rendered = prompt.render({{"sentence", std::string(sentence)}, {"context", std::string(context)}});
  ChatParams params{0.0, 512, "decompose", "synthesis"};
  try {
    return parse_fact_list(chat.complete(rendered, params));
  } catch (const std::exception& e) {
    log(LogLevel::Warn, std::string("decomposition failed: ") + e.what());
    return {};
  }
}

// ---------------------------------------------------------------------------
// Sampling

/// Uniform integer in [0, bound) by rejection, so results do not depend on
/// the standard library's distribution implementation.
inline std::uint64_t bounded_draw(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

/// k distinct indices of [0, n), ascending.
inline std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  if (k >= n) return idx;
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(bounded_draw(rng, n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

struct SynthesisStats {
  std::size_t sentences = 0;
  std::size_t facts = 0;      // all decomposed facts
  std::size_t discarded = 0;  // below the coverage threshold
};

struct SynthesisOptions {
  std::size_t n = kDefaultSynthesizedQueries;
  std::uint64_t seed = 7;
  double min_coverage = kMinSynthesisCoverage;
  PromptTemplate prompt{std::string(kDecomposeTemplate)};
};

/// Every fact of every sentence, each aligned within its own sentence.
inline std::vector<SynthesizedQuery> synthesize_all(const GeneratedOutput& output, ChatProvider& chat,
                                                    const SynthesisOptions& options, SynthesisStats* stats = nullptr) {
  const utf8::OffsetIndex index(output.text);
  std::vector<SynthesizedQuery> pool;
  SynthesisStats local;
  local.sentences = output.sentences.size();
  for (std::size_t si = 0; si < output.sentences.size(); ++si) {
    const auto& sent = output.sentences[si];
    const std::string sentence(index.slice(sent.start, sent.end));
    for (auto& fact : decompose_sentence(sentence, output.text, chat, options.prompt)) {
      ++local.facts;
      const auto aligned = align_fact_to_text(fact, sentence, sent.start);
      if (aligned.output_spans.empty() || aligned.coverage.ratio() < options.min_coverage) {
        ++local.discarded;
        continue;
      }
      SynthesizedQuery q;
      q.highlight = normalize_query(aligned.output_spans);
      q.source_sentence_idx = si;
      q.span_type = classify_span_type(fact);
      q.coverage = aligned.coverage.ratio();
      q.fact_text = std::move(fact);
      pool.push_back(std::move(q));
    }
  }
  if (stats) *stats = local;
  return pool;
}

inline std::vector<SynthesizedQuery> synthesize_queries(const GeneratedOutput& output, ChatProvider& chat,
                                                        const SynthesisOptions& options = {},
                                                        SynthesisStats* stats = nullptr) {
  if (options.n < 1) throw Error(ErrorCode::InvalidArgument, "n must be at least 1");
  auto pool = synthesize_all(output, chat, options, stats);
  std::vector<SynthesizedQuery> out;
  for (auto i : sample_indices(pool.size(), options.n, options.seed)) out.push_back(std::move(pool[i]));
  return out;
}

}  // namespace laquer

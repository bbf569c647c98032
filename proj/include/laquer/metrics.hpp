#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>
#include <tuple>
#include <vector>

#include "laquer/model.hpp"
#include "laquer/provider.hpp"
#include "laquer/tokenize.hpp"

namespace laquer {

struct MeanSem {
  double mean = 0.0;
  double sem = 0.0;  // sample standard deviation / sqrt(n); 0 for n < 2
  std::size_t n = 0;
};

inline MeanSem mean_sem(const std::vector<double>& xs) {
  MeanSem out;
  out.n = xs.size();
  if (xs.empty()) return out;
  out.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / double(xs.size());
  if (xs.size() < 2) return out;
  double ss = 0.0;
  for (double x : xs) ss += (x - out.mean) * (x - out.mean);
  out.sem = std::sqrt(ss / double(xs.size() - 1)) / std::sqrt(double(xs.size()));
  return out;
}

/// Attributed source spans in document order.
inline std::vector<SpanRef> ordered_source_spans(const AttributionResult& result, const Session& session) {
  auto spans = result.source_spans;
  std::sort(spans.begin(), spans.end(), [&](const SpanRef& a, const SpanRef& b) {
    const auto ia = session.document_index(a.doc_id), ib = session.document_index(b.doc_id);
    return ia != ib ? ia < ib : a < b;
  });
  return spans;
}

/// NLI premise: attributed span texts in document order joined by " … ".
inline std::string attribution_premise(const AttributionResult& result, const Session& session) {
  std::string out;
  for (const auto& s : ordered_source_spans(result, session)) {
    if (!out.empty()) out += " … ";
    out += span_text(s, session);
  }
  return out;
}

struct AisScores {
  double contextualized = 0.0;    // percent
  double decontextualized = 0.0;  // percent
  std::vector<double> per_fact_contextualized;    // 0 or 100 per scored fact
  std::vector<double> per_fact_decontextualized;
  std::size_t errors = 0;  // facts dropped because the checker failed
};

struct AisOptions {
  // Non-attributed facts score 0 when true, are left out when false.
  bool non_attributed_as_zero = true;
};

/// Percent of facts whose attributed text entails them, judged once against
/// the contextualized fact and once against the decontextualized one.
inline AisScores auto_ais(const std::vector<std::string>& facts, const std::vector<AttributionResult>& results,
                          const Session& session, NLIProvider& nli, const AisOptions& options = {}) {
  if (facts.size() != results.size()) throw Error(ErrorCode::InvalidArgument, "facts and results differ in length");
  AisScores out;
  for (std::size_t i = 0; i < facts.size(); ++i) {
    const auto& r = results[i];
    if (r.non_attributed) {
      if (options.non_attributed_as_zero) {
        out.per_fact_contextualized.push_back(0.0);
        out.per_fact_decontextualized.push_back(0.0);
      }
      continue;
    }
    try {
      const std::string premise = attribution_premise(r, session);
      const bool con = nli.entails(premise, facts[i]);
      const bool decon = nli.entails(premise, r.fact.text);
      out.per_fact_contextualized.push_back(con ? 100.0 : 0.0);
      out.per_fact_decontextualized.push_back(decon ? 100.0 : 0.0);
    } catch (const std::exception& e) {
      ++out.errors;
      log(LogLevel::Warn, "entailment check failed for fact " + std::to_string(i) + ": " + e.what());
    }
  }
  out.contextualized = mean_sem(out.per_fact_contextualized).mean;
  out.decontextualized = mean_sem(out.per_fact_decontextualized).mean;
  return out;
}

/// Content words in the attributed text.
inline std::size_t attributed_length(const AttributionResult& result, const Session& session) {
  std::size_t n = 0;
  for (const auto& s : result.source_spans) n += count_content_words(span_text(s, session));
  return n;
}

inline double non_attributed_rate(const std::vector<AttributionResult>& results) {
  if (results.empty()) throw Error(ErrorCode::InvalidArgument, "no results");
  const auto n = std::count_if(results.begin(), results.end(), [](const auto& r) { return r.non_attributed; });
  return 100.0 * double(n) / double(results.size());
}

struct RougeScore {
  double precision = 0.0;
  double recall = 0.0;
  double f = 0.0;
};

inline std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

inline std::vector<std::string> rouge_tokens(std::string_view text) {
  std::vector<std::string> out;
  for (const auto& t : tokenize_lemmatize(text)) {
    if (t.is_punct) continue;
    std::string s = t.surface;
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    out.push_back(std::move(s));
  }
  return out;
}

/// ROUGE-L: LCS over lowercased word tokens (punctuation dropped).
inline RougeScore rouge_l_scores(std::string_view candidate, std::string_view reference) {
  const auto c = rouge_tokens(candidate);
  const auto r = rouge_tokens(reference);
  if (c.empty() && r.empty()) return {1.0, 1.0, 1.0};
  if (c.empty() || r.empty()) return {};
  const double lcs = double(lcs_length(c, r));
  if (lcs == 0.0) return {};
  RougeScore s;
  s.precision = lcs / double(c.size());
  s.recall = lcs / double(r.size());
  s.f = 2.0 * s.precision * s.recall / (s.precision + s.recall);
  return s;
}

inline double rouge_l(std::string_view candidate, std::string_view reference) {
  return rouge_l_scores(candidate, reference).f;
}

struct CostRow {
  std::string task;
  std::string method;
  std::size_t calls = 0;
  MeanSem input_chars;
  MeanSem output_chars;
};

/// Mean prompt and completion length (characters) per (task, method).
inline std::vector<CostRow> prompt_cost_report(const std::vector<CallRecord>& calls) {
  std::map<std::pair<std::string, std::string>, std::pair<std::vector<double>, std::vector<double>>> groups;
  for (const auto& c : calls) {
    auto& g = groups[{c.task, c.method}];
    g.first.push_back(double(c.prompt_chars));
    g.second.push_back(double(c.completion_chars));
  }
  std::vector<CostRow> rows;
  for (const auto& [key, lens] : groups) {
    rows.push_back({key.first, key.second, lens.first.size(), mean_sem(lens.first), mean_sem(lens.second)});
  }
  return rows;
}

}  // namespace laquer

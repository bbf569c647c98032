#pragma once

// End-to-end composition: create a session (generate or ingest), answer a
// highlight query (decontextualize, then attribute by prompt or by hidden
// states), and run the offline benchmark over a dataset of bundles.

#include <cstdio>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "laquer/decontext.hpp"
#include "laquer/generation.hpp"
#include "laquer/hidden_states.hpp"
#include "laquer/internals.hpp"
#include "laquer/json_io.hpp"
#include "laquer/lexical_states.hpp"
#include "laquer/metrics.hpp"
#include "laquer/prompt_attrib.hpp"
#include "laquer/provider.hpp"
#include "laquer/session.hpp"
#include "laquer/sources_view.hpp"
#include "laquer/synth.hpp"

namespace laquer {

struct PipelineConfig {
  GenerationOptions generation;
  DecontextOptions decontext;
  PromptAttributionOptions prompt;
  InternalsConfig internals;
};

/// Generates (vanilla, alce) or ingests (attrfirst, external) the output.
inline Session create_session(std::string id, std::vector<Document> docs, std::optional<std::string> question,
                              GenerationMethod method, ChatProvider& chat, const PipelineConfig& cfg = {},
                              const std::optional<std::string>& output_text = {},
                              const std::optional<std::string>& metadata_text = {}) {
  if (docs.empty()) throw Error(ErrorCode::InvalidArgument, "a session needs at least one document");
  validate_documents(docs);
  Session s;
  s.id = std::move(id);
  s.question = std::move(question);
  auto gen = cfg.generation;
  if (s.question) gen.instruction = *s.question;
  switch (method) {
    case GenerationMethod::Vanilla:
    case GenerationMethod::ALCE:
      if (output_text) {
        s.output = ingest_external(docs, *output_text, metadata_text);
        s.output.method = method;
      } else {
        s.output = method == GenerationMethod::Vanilla ? generate_vanilla(docs, chat, gen) : generate_alce(docs, chat, gen);
      }
      break;
    case GenerationMethod::AttrFirst:
    case GenerationMethod::External:
      if (!output_text) throw Error(ErrorCode::InvalidArgument, to_string(method) + " sessions need an output text");
      s.output = ingest_external(docs, *output_text, metadata_text);
      if (method == GenerationMethod::AttrFirst && !(s.output.metadata && s.output.metadata->has_span_offsets())) {
        throw Error(ErrorCode::InvalidArgument, "attrfirst sessions need span-level metadata");
      }
      break;
  }
  s.documents = std::move(docs);
  return s;
}

inline Session create_session_from_bundle(const BundleSpec& b, ChatProvider& chat, const PipelineConfig& cfg = {}) {
  GenerationMethod method = GenerationMethod::Vanilla;
  if (b.method) {
    method = *b.method;
  } else if (b.output_text) {
    method = GenerationMethod::External;
  }
  auto s = create_session(b.id, b.documents, b.question, method, chat, cfg, b.output_text, b.metadata_text);
  if (!b.method && b.output_text) s.output.method = ingest_external(s.documents, *b.output_text, b.metadata_text).method;
  return s;
}

/// Decontextualizes the query and attributes it. Does not touch history.
inline AttributionResult attribute_query(const Session& session, const HighlightQuery& raw, ChatProvider& chat,
                                         const TokenHiddenStates* hidden_states, const PipelineConfig& cfg = {}) {
  const auto query = normalize_query(raw.spans, raw.method, raw.use_metadata, utf8::length(session.output.text));
  if (query.method == AttributionMethod::Internals && !hidden_states) {
    throw Error(ErrorCode::MissingHiddenStates, "session '" + session.id + "' has no hidden-state dump");
  }
  const auto fact = decontextualize(query, session.output, chat, cfg.decontext);
  const auto sentences = sentences_overlapping(session.output, fact.extended_spans);
  const AttributionMetadata* md = session.output.metadata ? &*session.output.metadata : nullptr;
  const auto view = build_sources_view(session, md, sentences, query.use_metadata);

  if (query.method == AttributionMethod::Prompt) {
    auto opts = cfg.prompt;
    opts.method_label = "prompt/" + to_string(session.output.method);
    return attribute_with_prompt(fact, view, chat, opts);
  }
  std::optional<std::vector<SpanRef>> restrict_to;
  if (md && query.use_metadata) restrict_to = view.spans();
  return attribute_with_internals(fact, session, *hidden_states, restrict_to, cfg.internals);
}

/// attribute_query plus the history append.
inline AttributionResult attribute(Session& session, const HighlightQuery& raw, ChatProvider& chat,
                                   const TokenHiddenStates* hidden_states, const PipelineConfig& cfg = {}) {
  auto result = attribute_query(session, raw, chat, hidden_states, cfg);
  session.history.push_back({normalize_query(raw.spans, raw.method, raw.use_metadata), result, utc_timestamp()});
  return result;
}

// ---------------------------------------------------------------------------
// Benchmark

struct BenchmarkConfig {
  fs::path dataset;
  std::vector<AttributionMethod> methods{AttributionMethod::Prompt};
  SynthesisOptions synthesis;
  bool use_metadata = true;
  // Build hidden states from word identity when a bundle has no dump.
  bool lexical_states = false;
  std::size_t lexical_dim = 64;
  AisOptions ais;
  PipelineConfig pipeline;
};

struct QueryRecord {
  std::string bundle;
  GenerationMethod generation = GenerationMethod::Vanilla;
  AttributionMethod method = AttributionMethod::Prompt;
  std::string fact;
  SpanType span_type = SpanType::Phrase;
  AttributionResult result;
  std::size_t attributed_length = 0;
  std::size_t document_content_words = 0;  // all documents of the bundle
  std::optional<double> ais_contextualized;
  std::optional<double> ais_decontextualized;
};

struct ReportRow {
  GenerationMethod generation = GenerationMethod::Vanilla;
  AttributionMethod method = AttributionMethod::Prompt;
  std::size_t queries = 0;
  MeanSem ais_contextualized;
  MeanSem ais_decontextualized;
  MeanSem attributed_length;  // over attributed facts
  MeanSem non_attributed;     // percent
  std::optional<MeanSem> rouge_l;
  std::size_t fallbacks = 0;
  std::size_t nli_errors = 0;
};

struct EvalReport {
  std::vector<ReportRow> rows;
  std::vector<QueryRecord> queries;
  std::vector<CostRow> costs;
  std::map<std::string, std::size_t> span_types;
  std::size_t sentences = 0;
  std::size_t facts = 0;
  std::size_t discarded_facts = 0;
  std::vector<std::string> failed_bundles;

  double facts_per_sentence() const { return sentences ? double(facts) / double(sentences) : 0.0; }
};

inline EvalReport run_benchmark(const BenchmarkConfig& cfg, ChatProvider& chat_inner, NLIProvider& nli) {
  auto log_store = std::make_shared<CallLog>(false);
  LoggingChat chat(std::shared_ptr<ChatProvider>(&chat_inner, [](ChatProvider*) {}), log_store);

  EvalReport report;
  struct Acc {
    std::vector<double> con, decon, length, non_att, rouge;
    std::size_t queries = 0, fallbacks = 0, errors = 0;
  };
  std::map<std::pair<GenerationMethod, AttributionMethod>, Acc> acc;

  for (const auto& dir : list_bundles(cfg.dataset)) {
    const std::string name = dir.filename().string();
    try {
      const auto spec = load_bundle_spec(dir);
      Session session = create_session_from_bundle(spec, chat, cfg.pipeline);
      std::size_t doc_words = 0;
      for (const auto& d : session.documents) doc_words += count_content_words(d.text);

      SynthesisStats stats;
      const auto queries = synthesize_queries(session.output, chat, cfg.synthesis, &stats);
      report.sentences += stats.sentences;
      report.facts += stats.facts;
      report.discarded_facts += stats.discarded;
      for (const auto& q : queries) ++report.span_types[to_string(q.span_type)];

      std::optional<double> rouge;
      if (spec.reference) rouge = rouge_l(session.output.text, *spec.reference);

      for (const auto method : cfg.methods) {
        std::optional<TokenHiddenStates> hs;
        if (method == AttributionMethod::Internals) {
          if (fs::exists(dir / "hidden_states.lhs1")) {
            hs = load_hidden_states(dir / "hidden_states.lhs1");
          } else if (cfg.lexical_states) {
            hs = lexical_hidden_states(session, cfg.pipeline.internals.layer, cfg.lexical_dim);
          }
        }
        std::vector<std::string> facts;
        std::vector<AttributionResult> results;
        for (const auto& q : queries) {
          HighlightQuery hq = q.highlight;
          hq.method = method;
          hq.use_metadata = cfg.use_metadata;
          facts.push_back(q.fact_text);
          results.push_back(attribute_query(session, hq, chat, hs ? &*hs : nullptr, cfg.pipeline));
        }
        const auto ais = auto_ais(facts, results, session, nli, cfg.ais);

        auto& a = acc[{session.output.method, method}];
        a.errors += ais.errors;
        a.con.insert(a.con.end(), ais.per_fact_contextualized.begin(), ais.per_fact_contextualized.end());
        a.decon.insert(a.decon.end(), ais.per_fact_decontextualized.begin(), ais.per_fact_decontextualized.end());
        if (rouge) a.rouge.push_back(*rouge);

        for (std::size_t i = 0; i < queries.size(); ++i) {
          const auto& r = results[i];
          QueryRecord rec;
          rec.bundle = name;
          rec.generation = session.output.method;
          rec.method = method;
          rec.fact = queries[i].fact_text;
          rec.span_type = queries[i].span_type;
          rec.result = r;
          rec.attributed_length = attributed_length(r, session);
          rec.document_content_words = doc_words;
          ++a.queries;
          a.non_att.push_back(r.non_attributed ? 100.0 : 0.0);
          if (!r.non_attributed) a.length.push_back(double(rec.attributed_length));
          if (r.fallback_used != Fallback::None) ++a.fallbacks;
          report.queries.push_back(std::move(rec));
        }
        // Per-fact entailment, aligned with the records just added.
        std::size_t k = 0;
        const std::size_t first = report.queries.size() - queries.size();
        for (std::size_t i = 0; i < queries.size(); ++i) {
          if (results[i].non_attributed && !cfg.ais.non_attributed_as_zero) continue;
          if (k < ais.per_fact_contextualized.size() && ais.errors == 0) {
            report.queries[first + i].ais_contextualized = ais.per_fact_contextualized[k];
            report.queries[first + i].ais_decontextualized = ais.per_fact_decontextualized[k];
          }
          ++k;
        }
      }
    } catch (const std::exception& e) {
      log(LogLevel::Warn, "bundle " + name + " failed: " + e.what());
      report.failed_bundles.push_back(name + ": " + e.what());
    }
  }

  for (const auto& [key, a] : acc) {
    ReportRow row;
    row.generation = key.first;
    row.method = key.second;
    row.queries = a.queries;
    row.ais_contextualized = mean_sem(a.con);
    row.ais_decontextualized = mean_sem(a.decon);
    row.attributed_length = mean_sem(a.length);
    row.non_attributed = mean_sem(a.non_att);
    if (!a.rouge.empty()) row.rouge_l = mean_sem(a.rouge);
    row.fallbacks = a.fallbacks;
    row.nli_errors = a.errors;
    report.rows.push_back(row);
  }
  report.costs = prompt_cost_report(log_store->snapshot());
  return report;
}

// ---------------------------------------------------------------------------
// Report rendering

namespace detail {

inline std::string fmt_num(double v, int prec = 1) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", prec, v);
  return buf;
}

inline std::string fmt_ms(const MeanSem& m, int prec = 1) {
  return fmt_num(m.mean, prec) + " ± " + fmt_num(m.sem, prec);
}

inline json ms_json(const MeanSem& m) {
  // Rounded so the JSON does not depend on the last bits of a sum.
  auto r = [](double v) { return std::stod(fmt_num(v, 6)); };
  return {{"mean", r(m.mean)}, {"sem", r(m.sem)}, {"n", m.n}};
}

inline std::string pad(const std::string& s, std::size_t width) {
  const std::size_t len = utf8::length(s);
  return len >= width ? s : s + std::string(width - len, ' ');
}

inline std::string render_table(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> widths;
  for (const auto& r : rows) {
    widths.resize(std::max(widths.size(), r.size()), 0);
    for (std::size_t c = 0; c < r.size(); ++c) widths[c] = std::max(widths[c], utf8::length(r[c]));
  }
  std::string out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::string line;
    for (std::size_t c = 0; c < rows[i].size(); ++c) line += (c ? "  " : "") + pad(rows[i][c], widths[c]);
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + "\n";
    if (i == 0) {
      std::size_t total = 0;
      for (auto w : widths) total += w;
      out += std::string(total + 2 * (widths.size() - 1), '-') + "\n";
    }
  }
  return out;
}

}  // namespace detail

inline std::string report_table(const EvalReport& report) {
  std::vector<std::vector<std::string>> rows{{"Generation", "Attribution", "N", "AutoAIS Con.", "AutoAIS Decon.",
                                              "Length", "Non Att. (%)", "ROUGE-L"}};
  for (const auto& r : report.rows) {
    rows.push_back({to_string(r.generation), to_string(r.method), std::to_string(r.queries),
                    detail::fmt_ms(r.ais_contextualized), detail::fmt_ms(r.ais_decontextualized),
                    detail::fmt_ms(r.attributed_length), detail::fmt_ms(r.non_attributed),
                    r.rouge_l ? detail::fmt_ms(*r.rouge_l, 3) : "-"});
  }
  std::string out = detail::render_table(rows);

  out += "\nPrompt cost (characters)\n";
  std::vector<std::vector<std::string>> cost{{"Task", "Method", "Calls", "Input", "Output"}};
  for (const auto& c : report.costs) {
    cost.push_back({c.task, c.method, std::to_string(c.calls), detail::fmt_ms(c.input_chars),
                    detail::fmt_ms(c.output_chars)});
  }
  out += detail::render_table(cost);

  out += "\nSampled facts by span type:";
  for (const auto& [k, v] : report.span_types) out += " " + k + "=" + std::to_string(v);
  out += "\nFacts per sentence: " + detail::fmt_num(report.facts_per_sentence(), 2) + " (" +
         std::to_string(report.facts) + " facts, " + std::to_string(report.sentences) + " sentences, " +
         std::to_string(report.discarded_facts) + " below coverage)\n";
  for (const auto& f : report.failed_bundles) out += "failed: " + f + "\n";
  return out;
}

inline json report_json(const EvalReport& report) {
  json rows = json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"generation", to_string(r.generation)},
                    {"attribution", to_string(r.method)},
                    {"queries", r.queries},
                    {"auto_ais_contextualized", detail::ms_json(r.ais_contextualized)},
                    {"auto_ais_decontextualized", detail::ms_json(r.ais_decontextualized)},
                    {"mean_attributed_length_content_words", detail::ms_json(r.attributed_length)},
                    {"non_attributed_pct", detail::ms_json(r.non_attributed)},
                    {"rouge_l", r.rouge_l ? detail::ms_json(*r.rouge_l) : json(nullptr)},
                    {"fallbacks", r.fallbacks},
                    {"nli_errors", r.nli_errors}});
  }
  json costs = json::array();
  for (const auto& c : report.costs) {
    costs.push_back({{"task", c.task}, {"method", c.method}, {"calls", c.calls},
                     {"input_chars", detail::ms_json(c.input_chars)}, {"output_chars", detail::ms_json(c.output_chars)}});
  }
  json queries = json::array();
  for (const auto& q : report.queries) {
    queries.push_back({{"bundle", q.bundle},
                       {"generation", to_string(q.generation)},
                       {"attribution", to_string(q.method)},
                       {"fact", q.fact},
                       {"span_type", to_string(q.span_type)},
                       {"result", to_json(q.result)},
                       {"attributed_length", q.attributed_length},
                       {"document_content_words", q.document_content_words},
                       {"ais_contextualized", q.ais_contextualized ? json(*q.ais_contextualized) : json(nullptr)},
                       {"ais_decontextualized", q.ais_decontextualized ? json(*q.ais_decontextualized) : json(nullptr)}});
  }
  return {{"rows", rows},
          {"costs", costs},
          {"span_types", report.span_types},
          {"sentences", report.sentences},
          {"facts", report.facts},
          {"discarded_facts", report.discarded_facts},
          {"facts_per_sentence", std::stod(detail::fmt_num(report.facts_per_sentence(), 6))},
          {"failed_bundles", report.failed_bundles},
          {"queries", queries}};
}

}  // namespace laquer

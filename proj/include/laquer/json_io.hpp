#pragma once

// JSON forms of the model types, shared by the history file, the HTTP API
// and the CLI. Metadata is embedded in its line format.

#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "laquer/generation.hpp"
#include "laquer/metadata.hpp"
#include "laquer/model.hpp"

namespace laquer {

using json = nlohmann::json;

inline Provenance parse_provenance(std::string_view s) {
  if (s == "llm") return Provenance::LLM;
  if (s == "passthrough") return Provenance::PassThrough;
  throw Error(ErrorCode::InvalidArgument, "unknown provenance '" + std::string(s) + "'");
}

inline Fallback parse_fallback(std::string_view s) {
  if (s == "none") return Fallback::None;
  if (s == "metadata") return Fallback::Metadata;
  if (s == "full_documents") return Fallback::FullDocuments;
  throw Error(ErrorCode::InvalidArgument, "unknown fallback '" + std::string(s) + "'");
}

inline json span_to_json(const SpanRef& s) {
  json j{{"start", s.start}, {"end", s.end}};
  if (!s.is_output()) j["doc_id"] = s.doc_id;
  return j;
}

namespace detail {

template <typename T>
T get_field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw Error(ErrorCode::InvalidArgument, std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::InvalidArgument, std::string("field '") + key + "' has the wrong type");
  }
}

inline std::size_t get_offset(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key) || !j.at(key).is_number_unsigned()) {
    // Non-negative integers parse as unsigned; anything else is rejected.
    if (j.is_object() && j.contains(key) && j.at(key).is_number_integer() && j.at(key).get<long long>() >= 0) {
      return j.at(key).get<std::size_t>();
    }
    throw Error(ErrorCode::InvalidArgument, std::string("field '") + key + "' must be a non-negative integer");
  }
  return j.at(key).get<std::size_t>();
}

}  // namespace detail

inline SpanRef span_from_json(const json& j) {
  const std::size_t start = detail::get_offset(j, "start"), end = detail::get_offset(j, "end");
  if (j.contains("doc_id") && !j.at("doc_id").is_null()) {
    return SpanRef::in_doc(detail::get_field<std::string>(j, "doc_id"), start, end);
  }
  return SpanRef::output(start, end);
}

inline json spans_to_json(const std::vector<SpanRef>& spans) {
  json arr = json::array();
  for (const auto& s : spans) arr.push_back(span_to_json(s));
  return arr;
}

inline std::vector<SpanRef> spans_from_json(const json& j) {
  if (!j.is_array()) throw Error(ErrorCode::InvalidArgument, "spans must be an array");
  std::vector<SpanRef> out;
  for (const auto& e : j) out.push_back(span_from_json(e));
  return out;
}

inline json to_json(const DecontextualizedFact& f) {
  return {{"text", f.text}, {"extended_spans", spans_to_json(f.extended_spans)}, {"provenance", to_string(f.provenance)}};
}

inline DecontextualizedFact fact_from_json(const json& j) {
  DecontextualizedFact f;
  f.text = detail::get_field<std::string>(j, "text");
  f.extended_spans = spans_from_json(j.at("extended_spans"));
  f.provenance = parse_provenance(detail::get_field<std::string>(j, "provenance"));
  return f;
}

inline json to_json(const AttributionResult& r) {
  return {{"source_spans", spans_to_json(r.source_spans)},
          {"fact", to_json(r.fact)},
          {"fallback_used", to_string(r.fallback_used)},
          {"non_attributed", r.non_attributed},
          {"retries", r.retries}};
}

/// Same as to_json, with each source span's text added for display.
inline json to_json(const AttributionResult& r, const Session& session) {
  json j = to_json(r);
  for (std::size_t i = 0; i < r.source_spans.size(); ++i) j["source_spans"][i]["text"] = span_text(r.source_spans[i], session);
  return j;
}

inline AttributionResult result_from_json(const json& j) {
  AttributionResult r;
  r.source_spans = spans_from_json(j.at("source_spans"));
  r.fact = fact_from_json(j.at("fact"));
  r.fallback_used = parse_fallback(detail::get_field<std::string>(j, "fallback_used"));
  r.non_attributed = detail::get_field<bool>(j, "non_attributed");
  r.retries = detail::get_field<int>(j, "retries");
  return r;
}

inline json to_json(const HighlightQuery& q) {
  return {{"spans", spans_to_json(q.spans)}, {"method", to_string(q.method)}, {"use_metadata", q.use_metadata}};
}

inline HighlightQuery query_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidArgument, "query must be an object");
  HighlightQuery q;
  if (!j.contains("spans")) throw Error(ErrorCode::InvalidArgument, "missing field 'spans'");
  q.spans = spans_from_json(j.at("spans"));
  if (j.contains("method")) q.method = parse_attribution_method(detail::get_field<std::string>(j, "method"));
  if (j.contains("use_metadata")) q.use_metadata = detail::get_field<bool>(j, "use_metadata");
  return q;
}

inline json to_json(const HistoryEntry& e) {
  return {{"query", to_json(e.query)}, {"result", to_json(e.result)}, {"timestamp", e.timestamp}};
}

inline HistoryEntry history_entry_from_json(const json& j) {
  return {query_from_json(j.at("query")), result_from_json(j.at("result")), detail::get_field<std::string>(j, "timestamp")};
}

inline json to_json(const GeneratedOutput& o) {
  return {{"text", o.text},
          {"sentences", spans_to_json(o.sentences)},
          {"metadata", o.metadata ? json(serialize_metadata(*o.metadata)) : json(nullptr)},
          {"method", to_string(o.method)}};
}

inline GeneratedOutput output_from_json(const json& j) {
  GeneratedOutput o;
  o.text = detail::get_field<std::string>(j, "text");
  o.sentences = spans_from_json(j.at("sentences"));
  if (j.contains("metadata") && !j.at("metadata").is_null()) o.metadata = parse_metadata(j.at("metadata").get<std::string>());
  o.method = parse_generation_method(detail::get_field<std::string>(j, "method"));
  return o;
}

inline json to_json(const Document& d) { return {{"id", d.id}, {"text", d.text}}; }

inline std::vector<Document> documents_from_json(const json& j) {
  if (!j.is_array()) throw Error(ErrorCode::InvalidArgument, "docs must be an array");
  std::vector<Document> docs;
  for (const auto& e : j) docs.push_back({detail::get_field<std::string>(e, "id"), detail::get_field<std::string>(e, "text")});
  return docs;
}

// [{sources: [{id, text}], fact, attribution: [strings]}]
inline std::vector<Exemplar> exemplars_from_json(const json& j) {
  if (!j.is_array()) throw Error(ErrorCode::InvalidArgument, "exemplars must be an array");
  std::vector<Exemplar> out;
  for (const auto& e : j) {
    if (!e.is_object() || !e.contains("sources")) throw Error(ErrorCode::InvalidArgument, "exemplar lacks sources");
    Exemplar ex;
    ex.sources = documents_from_json(e.at("sources"));
    ex.fact = detail::get_field<std::string>(e, "fact");
    if (e.contains("attribution")) {
      if (!e.at("attribution").is_array()) throw Error(ErrorCode::InvalidArgument, "exemplar attribution must be an array");
      for (const auto& a : e.at("attribution")) {
        if (!a.is_string()) throw Error(ErrorCode::InvalidArgument, "exemplar attribution entries must be strings");
        ex.attribution.push_back(a.get<std::string>());
      }
    }
    out.push_back(std::move(ex));
  }
  return out;
}

inline std::vector<Exemplar> load_exemplars(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read exemplars " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, path.string() + ": " + e.what());
  }
  return exemplars_from_json(j);
}

inline json to_json(const Session& s) {
  json docs = json::array();
  for (const auto& d : s.documents) docs.push_back(to_json(d));
  json history = json::array();
  for (const auto& h : s.history) history.push_back(to_json(h));
  return {{"id", s.id},
          {"documents", docs},
          {"question", s.question ? json(*s.question) : json(nullptr)},
          {"output", to_json(s.output)},
          {"history", history}};
}

inline Session session_from_json(const json& j) {
  Session s;
  s.id = detail::get_field<std::string>(j, "id");
  s.documents = documents_from_json(j.at("documents"));
  if (j.contains("question") && !j.at("question").is_null()) s.question = j.at("question").get<std::string>();
  s.output = output_from_json(j.at("output"));
  for (const auto& h : j.at("history")) s.history.push_back(history_entry_from_json(h));
  return s;
}

}  // namespace laquer

#pragma once

// LHS1 hidden-state dumps.
//
//   bytes 0..3   "LHS1"
//   bytes 4..7   header length N, uint32 little-endian
//   next N bytes UTF-8 JSON header:
//                {model_id, layer, dim, n_tokens,
//                 sections: [{kind: "query"|"doc"|"output", id?, text}],
//                 tokens:   [{section_idx, start, end, surface, header?}]}
//   then         n_tokens * dim float32 little-endian, row-major
//
// Token offsets are scalar indices into their section's text.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "laquer/error.hpp"
#include "laquer/utf8.hpp"

namespace laquer {

enum class SectionKind { Query, Doc, Output };

struct HsSection {
  SectionKind kind = SectionKind::Doc;
  std::string id;  // document id for Doc sections
  std::string text;

  friend bool operator==(const HsSection&, const HsSection&) = default;
};

struct HsToken {
  std::size_t section = 0;
  std::size_t start = 0;
  std::size_t end = 0;
  std::string surface;
  bool header = false;  // section separator text, never a candidate

  friend bool operator==(const HsToken&, const HsToken&) = default;
};

/// Per-token hidden vectors of one layer for the concatenated
/// question + documents + output.
struct TokenHiddenStates {
  std::string model_id;
  int layer = 0;
  std::size_t dim = 0;
  std::vector<HsSection> sections;
  std::vector<HsToken> tokens;
  std::vector<float> matrix;  // tokens.size() * dim

  std::span<const float> row(std::size_t token) const { return {matrix.data() + token * dim, dim}; }
  SectionKind kind_of(std::size_t token) const { return sections[tokens[token].section].kind; }

  friend bool operator==(const TokenHiddenStates&, const TokenHiddenStates&) = default;
};

inline std::string to_string(SectionKind k) {
  switch (k) {
    case SectionKind::Query: return "query";
    case SectionKind::Doc: return "doc";
    case SectionKind::Output: return "output";
  }
  return "doc";
}

inline void validate_hidden_states(const TokenHiddenStates& hs) {
  if (hs.layer < 0) throw Error(ErrorCode::InvalidArgument, "layer must be non-negative");
  if (hs.dim == 0) throw Error(ErrorCode::DimMismatch, "dim must be positive");
  if (hs.matrix.size() != hs.tokens.size() * hs.dim) {
    throw Error(ErrorCode::DimMismatch, "matrix holds " + std::to_string(hs.matrix.size()) + " floats, expected " +
                                            std::to_string(hs.tokens.size() * hs.dim));
  }
  std::vector<std::size_t> lengths;
  for (const auto& s : hs.sections) lengths.push_back(utf8::length(s.text));
  for (std::size_t i = 0; i < hs.tokens.size(); ++i) {
    const auto& t = hs.tokens[i];
    if (t.section >= hs.sections.size() || t.start > t.end || t.end > lengths[t.section]) {
      throw Error(ErrorCode::TokenOffsetOutOfRange, "token " + std::to_string(i) + " has invalid offsets");
    }
  }
}

namespace detail {

inline SectionKind parse_section_kind(const std::string& s) {
  if (s == "query") return SectionKind::Query;
  if (s == "doc") return SectionKind::Doc;
  if (s == "output") return SectionKind::Output;
  throw Error(ErrorCode::InvalidArgument, "unknown section kind '" + s + "'");
}

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int k = 0; k < 4; ++k) out.push_back(static_cast<char>((v >> (8 * k)) & 0xFF));
}

inline std::uint32_t get_u32(std::string_view bytes, std::size_t at) {
  std::uint32_t v = 0;
  for (int k = 0; k < 4; ++k) v |= std::uint32_t(static_cast<unsigned char>(bytes[at + k])) << (8 * k);
  return v;
}

}  // namespace detail

inline std::string serialize_hidden_states(const TokenHiddenStates& hs) {
  validate_hidden_states(hs);
  nlohmann::ordered_json header;
  header["model_id"] = hs.model_id;
  header["layer"] = hs.layer;
  header["dim"] = hs.dim;
  header["n_tokens"] = hs.tokens.size();
  header["sections"] = nlohmann::ordered_json::array();
  for (const auto& s : hs.sections) {
    nlohmann::ordered_json js;
    js["kind"] = to_string(s.kind);
    if (s.kind == SectionKind::Doc) js["id"] = s.id;
    js["text"] = s.text;
    header["sections"].push_back(js);
  }
  header["tokens"] = nlohmann::ordered_json::array();
  for (const auto& t : hs.tokens) {
    nlohmann::ordered_json jt;
    jt["section_idx"] = t.section;
    jt["start"] = t.start;
    jt["end"] = t.end;
    jt["surface"] = t.surface;
    if (t.header) jt["header"] = true;
    header["tokens"].push_back(jt);
  }
  const std::string json = header.dump();
  std::string out = "LHS1";
  detail::put_u32(out, static_cast<std::uint32_t>(json.size()));
  out += json;
  out.reserve(out.size() + hs.matrix.size() * 4);
  for (float f : hs.matrix) detail::put_u32(out, std::bit_cast<std::uint32_t>(f));
  return out;
}

inline TokenHiddenStates parse_hidden_states(std::string_view bytes) {
  if (bytes.size() < 8 || bytes.substr(0, 4) != "LHS1") throw Error(ErrorCode::BadMagic, "missing LHS1 magic");
  const std::uint32_t header_len = detail::get_u32(bytes, 4);
  if (bytes.size() < 8 + std::size_t(header_len)) throw Error(ErrorCode::DimMismatch, "truncated header");

  TokenHiddenStates hs;
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(8, header_len));
    hs.model_id = header.at("model_id").get<std::string>();
    hs.layer = header.at("layer").get<int>();
    hs.dim = header.at("dim").get<std::size_t>();
    for (const auto& js : header.at("sections")) {
      HsSection s;
      s.kind = detail::parse_section_kind(js.at("kind").get<std::string>());
      if (s.kind == SectionKind::Doc) s.id = js.at("id").get<std::string>();
      s.text = js.at("text").get<std::string>();
      hs.sections.push_back(std::move(s));
    }
    for (const auto& jt : header.at("tokens")) {
      HsToken t;
      t.section = jt.at("section_idx").get<std::size_t>();
      t.start = jt.at("start").get<std::size_t>();
      t.end = jt.at("end").get<std::size_t>();
      t.surface = jt.value("surface", std::string());
      t.header = jt.value("header", false);
      hs.tokens.push_back(std::move(t));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("bad LHS1 header: ") + e.what());
  }
  const std::size_t n_tokens = header.at("n_tokens").get<std::size_t>();
  if (n_tokens != hs.tokens.size()) {
    throw Error(ErrorCode::DimMismatch, "header claims " + std::to_string(n_tokens) + " tokens, lists " +
                                            std::to_string(hs.tokens.size()));
  }
  const std::size_t payload = bytes.size() - 8 - header_len;
  if (payload != n_tokens * hs.dim * 4) {
    throw Error(ErrorCode::DimMismatch, "matrix has " + std::to_string(payload / 4) + " floats, expected " +
                                            std::to_string(n_tokens * hs.dim));
  }
  hs.matrix.resize(n_tokens * hs.dim);
  const std::size_t base = 8 + header_len;
  for (std::size_t i = 0; i < hs.matrix.size(); ++i) {
    hs.matrix[i] = std::bit_cast<float>(detail::get_u32(bytes, base + 4 * i));
  }
  validate_hidden_states(hs);
  return hs;
}

inline TokenHiddenStates load_hidden_states(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_hidden_states(bytes);
}

inline void write_hidden_states(const TokenHiddenStates& hs, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  const std::string bytes = serialize_hidden_states(hs);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace laquer

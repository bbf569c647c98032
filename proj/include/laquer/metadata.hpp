#pragma once

// Line-oriented attribution metadata, one record per line:
//
//   <0, doc_1.txt, [[17367, 17562]]>     span-level
//   <2, doc_3.txt>                       document-level
//
// The parser accepts only the canonical spelling (", " separators, "[s, e]"
// pairs, no leading zeros) so that parse and serialize are exact inverses.

#include <cctype>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "laquer/error.hpp"
#include "laquer/model.hpp"

namespace laquer {

namespace detail {

class RecordCursor {
 public:
  RecordCursor(std::string_view line, std::size_t line_no) : line_(line), line_no_(line_no) {}

  [[noreturn]] void fail(const std::string& what) const {
    throw MalformedRecord(line_no_, what + " at column " + std::to_string(pos_ + 1));
  }

  bool peek(std::string_view token) const { return line_.substr(pos_, token.size()) == token; }

  void expect(std::string_view token) {
    if (!peek(token)) fail("expected '" + std::string(token) + "'");
    pos_ += token.size();
  }

  std::size_t number() {
    const std::size_t begin = pos_;
    while (pos_ < line_.size() && std::isdigit(static_cast<unsigned char>(line_[pos_]))) ++pos_;
    const std::size_t len = pos_ - begin;
    if (len == 0) fail("expected a number");
    if (len > 1 && line_[begin] == '0') fail("leading zero");
    if (len > 18) fail("number too large");
    return std::stoull(std::string(line_.substr(begin, len)));
  }

  std::string identifier() {
    const std::size_t begin = pos_;
    while (pos_ < line_.size()) {
      const char c = line_[pos_];
      if (c == ',' || c == '<' || c == '>' || c == '[' || c == ']' || std::isspace(static_cast<unsigned char>(c))) break;
      ++pos_;
    }
    if (pos_ == begin) fail("expected a document id");
    return std::string(line_.substr(begin, pos_ - begin));
  }

  bool at_end() const { return pos_ == line_.size(); }

 private:
  std::string_view line_;
  std::size_t line_no_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline AttributionRecord parse_metadata_record(std::string_view line, std::size_t line_no = 1) {
  detail::RecordCursor cur(line, line_no);
  AttributionRecord rec;
  cur.expect("<");
  rec.sentence_idx = cur.number();
  cur.expect(", ");
  rec.doc_id = cur.identifier();
  if (cur.peek(", ")) {
    cur.expect(", ");
    cur.expect("[");
    std::vector<OffsetPair> pairs;
    do {
      if (!pairs.empty()) cur.expect(", ");
      cur.expect("[");
      const std::size_t s = cur.number();
      cur.expect(", ");
      const std::size_t e = cur.number();
      cur.expect("]");
      if (s >= e) cur.fail("span start must be less than end");
      pairs.emplace_back(s, e);
    } while (cur.peek(", "));
    cur.expect("]");
    rec.offsets = std::move(pairs);
  }
  cur.expect(">");
  if (!cur.at_end()) cur.fail("trailing characters");
  return rec;
}

inline std::string serialize_metadata_record(const AttributionRecord& rec) {
  std::string out = "<" + std::to_string(rec.sentence_idx) + ", " + rec.doc_id;
  if (rec.offsets) {
    out += ", [";
    for (std::size_t i = 0; i < rec.offsets->size(); ++i) {
      if (i) out += ", ";
      const auto& [s, e] = (*rec.offsets)[i];
      out += "[" + std::to_string(s) + ", " + std::to_string(e) + "]";
    }
    out += "]";
  }
  out += ">";
  return out;
}

/// Parses a whole metadata file. A single trailing newline is allowed; blank
/// lines elsewhere are malformed.
inline AttributionMetadata parse_metadata(std::string_view text) {
  AttributionMetadata md;
  if (text.empty()) return md;
  if (text.back() == '\n') text.remove_suffix(1);
  std::size_t line_no = 1;
  std::size_t begin = 0;
  while (true) {
    const std::size_t nl = text.find('\n', begin);
    const std::string_view line = text.substr(begin, nl == std::string_view::npos ? std::string_view::npos : nl - begin);
    md.records.push_back(parse_metadata_record(line, line_no));
    if (nl == std::string_view::npos) break;
    begin = nl + 1;
    ++line_no;
  }
  return md;
}

/// Canonical text: one record per line, each terminated by '\n'.
inline std::string serialize_metadata(const AttributionMetadata& md) {
  std::string out;
  for (const auto& r : md.records) {
    out += serialize_metadata_record(r);
    out += '\n';
  }
  return out;
}

}  // namespace laquer

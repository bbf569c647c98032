#pragma once

// Session bundles on disk:
//
//   <dir>/docs/<id>            one UTF-8 file per document; the file name
//                              (e.g. "doc_1.txt") is the document id
//   <dir>/output.txt           generated output (absent: generate it)
//   <dir>/metadata.laq         attribution metadata, optional
//   <dir>/question.txt         optional
//   <dir>/method.txt           generation method, optional
//   <dir>/reference.txt        reference output for ROUGE-L, optional
//   <dir>/hidden_states.lhs1   hidden-state dump, optional
//   <dir>/history.jsonl        one query/result per line, append-only

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "laquer/generation.hpp"
#include "laquer/json_io.hpp"
#include "laquer/metadata.hpp"
#include "laquer/model.hpp"
#include "laquer/sentences.hpp"

namespace laquer {

namespace fs = std::filesystem;

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::optional<std::string> read_optional(const fs::path& path) {
  if (!fs::exists(path)) return std::nullopt;
  return read_file(path);
}

inline void write_file(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error(ErrorCode::Io, "short write to " + path.string());
}

// Short text files are edited by hand; a trailing newline is not content.
inline std::string strip_final_newline(std::string s) {
  if (!s.empty() && s.back() == '\n') s.pop_back();
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

/// Everything a bundle holds before any generation happens.
struct BundleSpec {
  std::string id;
  std::vector<Document> documents;
  std::optional<std::string> question;
  std::optional<std::string> output_text;
  std::optional<std::string> metadata_text;
  std::optional<GenerationMethod> method;
  std::optional<std::string> reference;
  fs::path dir;
};

inline BundleSpec load_bundle_spec(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorCode::Io, "not a bundle directory: " + dir.string());
  BundleSpec b;
  b.dir = dir;
  b.id = dir.filename().string();
  if (b.id.empty()) b.id = dir.parent_path().filename().string();
  const fs::path docs = dir / "docs";
  if (!fs::is_directory(docs)) throw Error(ErrorCode::Io, "bundle has no docs/ directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(docs))
    if (e.is_regular_file()) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) b.documents.push_back({f.filename().string(), read_file(f)});
  validate_documents(b.documents);
  if (auto q = read_optional(dir / "question.txt")) b.question = strip_final_newline(*q);
  // output.txt is taken verbatim: metadata offsets count from its first byte.
  b.output_text = read_optional(dir / "output.txt");
  b.metadata_text = read_optional(dir / "metadata.laq");
  if (auto m = read_optional(dir / "method.txt")) b.method = parse_generation_method(trim(*m));
  if (auto r = read_optional(dir / "reference.txt")) b.reference = strip_final_newline(*r);
  return b;
}

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline std::vector<HistoryEntry> parse_history(std::string_view text) {
  std::vector<HistoryEntry> out;
  std::size_t begin = 0, line_no = 0;
  while (begin < text.size()) {
    auto end = text.find('\n', begin);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    const auto line = text.substr(begin, end - begin);
    if (!trim(line).empty()) {
      try {
        out.push_back(history_entry_from_json(json::parse(line)));
      } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidArgument, "history line " + std::to_string(line_no) + ": " + e.what());
      }
    }
    begin = end + 1;
  }
  return out;
}

/// Builds the session stored in a bundle that already has an output.
inline Session load_session(const fs::path& dir) {
  auto b = load_bundle_spec(dir);
  if (!b.output_text) throw Error(ErrorCode::NotFound, "bundle has no output.txt: " + dir.string());
  Session s;
  s.id = b.id;
  s.documents = std::move(b.documents);
  s.question = b.question;
  s.output = ingest_external(s.documents, *b.output_text, b.metadata_text);
  if (b.method) s.output.method = *b.method;
  if (auto h = read_optional(dir / "history.jsonl")) s.history = parse_history(*h);
  return s;
}

inline void save_session(const Session& s, const fs::path& dir) {
  fs::create_directories(dir / "docs");
  for (const auto& e : fs::directory_iterator(dir / "docs")) {
    const auto name = e.path().filename().string();
    if (!s.find_document(name)) fs::remove(e.path());
  }
  for (const auto& d : s.documents) {
    if (d.id.find('/') != std::string::npos || d.id == "." || d.id == "..")
      throw Error(ErrorCode::InvalidArgument, "document id cannot be used as a file name: " + d.id);
    write_file(dir / "docs" / d.id, d.text);
  }
  write_file(dir / "output.txt", s.output.text);
  write_file(dir / "method.txt", to_string(s.output.method) + "\n");
  if (s.output.metadata) {
    write_file(dir / "metadata.laq", serialize_metadata(*s.output.metadata));
  } else {
    fs::remove(dir / "metadata.laq");
  }
  if (s.question) {
    write_file(dir / "question.txt", *s.question);
  } else {
    fs::remove(dir / "question.txt");
  }
  std::string history;
  for (const auto& h : s.history) history += to_json(h).dump() + "\n";
  write_file(dir / "history.jsonl", history);
}

inline void append_history(const fs::path& dir, const HistoryEntry& entry) {
  std::ofstream out(dir / "history.jsonl", std::ios::binary | std::ios::app);
  if (!out) throw Error(ErrorCode::Io, "cannot append to " + (dir / "history.jsonl").string());
  out << to_json(entry).dump() << '\n';
}

/// Bundle directories of a dataset, sorted by name.
inline std::vector<fs::path> list_bundles(const fs::path& dataset) {
  if (!fs::is_directory(dataset)) throw Error(ErrorCode::Io, "dataset directory not found: " + dataset.string());
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dataset))
    if (e.is_directory() && fs::is_directory(e.path() / "docs")) out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace laquer

#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>

#include "laquer/error.hpp"

namespace laquer {

/// Plain-text prompt with `{slot}` placeholders. Unknown slots are left as
/// written, so literal braces in a template are harmless.
class PromptTemplate {
 public:
  PromptTemplate() = default;
  explicit PromptTemplate(std::string text) : text_(std::move(text)) {}

  static PromptTemplate load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot read prompt template " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return PromptTemplate(ss.str());
  }

  std::string render(const std::map<std::string, std::string>& slots) const {
    std::string out;
    out.reserve(text_.size());
    std::size_t i = 0;
    while (i < text_.size()) {
      if (text_[i] == '{') {
        const std::size_t close = text_.find('}', i + 1);
        if (close != std::string::npos) {
          const auto it = slots.find(text_.substr(i + 1, close - i - 1));
          if (it != slots.end()) {
            out += it->second;
            i = close + 1;
            continue;
          }
        }
      }
      out.push_back(text_[i++]);
    }
    return out;
  }

  const std::string& text() const { return text_; }

 private:
  std::string text_;
};

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

// Default templates. Each is also shipped under assets/prompts/ so it can be
// edited without rebuilding.

inline constexpr std::string_view kDecontextualizeTemplate =
    R"(Rewrite the highlighted part of a passage as one standalone sentence.

The highlighted fragments were selected by a reader from the passage below. They may depend on the rest of the passage: pronouns, elided subjects, or references such as "the company" or "this decision". Produce a single sentence that states exactly what the highlighted fragments say, adding only the minimal context from the passage that a reader needs to understand the sentence on its own (for example, replace a pronoun with the name it refers to). Do not add any claim that is not expressed by the highlighted fragments. Reuse the passage's own wording wherever possible.

Passage:
{output}

Highlighted fragments (gaps are marked with "..."):
{highlights}

Standalone sentence:)";

inline constexpr std::string_view kDecomposeTemplate =
    R"(Break the sentence below into independent atomic facts. Each fact should be a short sentence that expresses exactly one piece of information from the sentence, reusing its wording. The surrounding text is given only so that you can understand the sentence; do not extract facts from it.

Surrounding text:
{context}

Sentence:
{sentence}

List one fact per line, each starting with "- ".)";

inline constexpr std::string_view kVanillaTemplate =
    R"({instruction}

{documents}
Answer:)";

inline constexpr std::string_view kAlceTemplate =
    R"({instruction}

Write an accurate and concise answer using only the documents provided. Cite the documents that support each sentence at the end of that sentence using square brackets with the document number, for example [1] or [1][3]. Cite at least one document in every sentence.

{examples}{documents}
Answer:)";

}  // namespace laquer

#pragma once

// Deterministic offline providers driven by a JSON script.
//
// {
//   "chat": {
//     "rules": [
//       {"task": "decompose", "when": ["substring", ...],
//        "replies": [<action>, ...]}          // n-th matching call gets the
//     ],                                      // n-th reply, the last repeats
//     "default": <action>
//   },
//   "nli": {
//     "rules": [{"premise_contains": "...", "hypothesis_contains": "...", "entails": true}],
//     "default": "lexical" | true | false,
//     "threshold": 0.75
//   }
// }
//
// An action is a string (literal reply) or one of
//   {"reply": "..."}                 literal reply
//   {"fail": "message"}              throws
//   {"empty": true}                  empty reply
//   {"echo": {"after": A, "before": B, "replace": {"x": "y"}}}
//                                    the prompt text between A and B
//   {"split_clauses": {"after": A, "before": B}}
//                                    that text split at clause boundaries,
//                                    one "- " line per clause
//   {"best_source": {"max_spans": 3}}
//                                    source sentences (from an attribution
//                                    prompt) that best cover the fact

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "laquer/error.hpp"
#include "laquer/prompt_template.hpp"
#include "laquer/provider.hpp"
#include "laquer/sentences.hpp"
#include "laquer/tokenize.hpp"

namespace laquer {

namespace mock {

inline std::set<std::string> content_lemmas(std::string_view text) {
  std::set<std::string> out;
  for (const auto& t : tokenize_lemmatize(text))
    if (t.is_content) out.insert(t.lemma);
  return out;
}

inline std::string between(const std::string& text, const std::string& after, const std::string& before) {
  std::size_t b = 0;
  if (!after.empty()) {
    const auto p = text.rfind(after);
    if (p == std::string::npos) throw Error(ErrorCode::NotFound, "marker '" + after + "' not in prompt");
    b = p + after.size();
  }
  std::size_t e = text.size();
  if (!before.empty()) {
    const auto p = text.find(before, b);
    if (p == std::string::npos) throw Error(ErrorCode::NotFound, "marker '" + before + "' not in prompt");
    e = p;
  }
  return text.substr(b, e - b);
}

inline std::string replace_all(std::string s, const std::string& from, const std::string& to) {
  if (from.empty()) return s;
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
  return s;
}

/// Clause-sized pieces of a sentence, each a verbatim substring. Pieces with
/// fewer than two content words are folded into their neighbour.
inline std::vector<std::string> split_clauses(std::string_view sentence) {
  std::string s = trim(sentence);
  while (!s.empty() && (s.back() == '.' || s.back() == '!' || s.back() == '?')) s.pop_back();
  std::vector<std::string> raw;
  std::size_t begin = 0;
  const std::vector<std::string> seps = {", and ", ", but ", ", while ", ", which ", "; ", ", "};
  while (begin < s.size()) {
    std::size_t best = std::string::npos, best_len = 0;
    for (const auto& sep : seps) {
      const auto p = s.find(sep, begin);
      if (p != std::string::npos && (p < best || (p == best && sep.size() > best_len))) best = p, best_len = sep.size();
    }
    if (best == std::string::npos) {
      raw.push_back(s.substr(begin));
      break;
    }
    raw.push_back(s.substr(begin, best - begin));
    begin = best + best_len;
  }
  std::vector<std::string> out;
  for (auto& piece : raw) {
    piece = trim(piece);
    if (piece.empty()) continue;
    if (count_content_words(piece) < 2 && !out.empty()) continue;
    out.push_back(piece);
  }
  if (out.empty() && !s.empty()) out.push_back(s);
  return out;
}

/// Source texts of the last "Input:" block of an attribution prompt.
inline std::vector<std::string> attribution_sources(const std::string& prompt) {
  const auto in = prompt.rfind("Input:\n");
  const auto out = prompt.rfind("\nOutput: ");
  if (in == std::string::npos || out == std::string::npos || out < in) return {};
  std::string block = prompt.substr(in + 7, out - in - 7);
  if (!block.empty() && block.back() == '\n') block.pop_back();
  std::vector<std::string> sources;
  std::size_t pos = 0;
  for (int k = 1;; ++k) {
    const std::string head = "Source " + std::to_string(k) + ": ";
    if (block.compare(pos, head.size(), head) != 0) break;
    const std::size_t start = pos + head.size();
    const std::string next = "\n\nSource " + std::to_string(k + 1) + ": ";
    const auto end = block.find(next, start);
    sources.push_back(block.substr(start, end == std::string::npos ? std::string::npos : end - start));
    if (end == std::string::npos) break;
    pos = end + 2;
  }
  return sources;
}

/// Greedy cover of the fact's content lemmas by source sentences.
inline std::string best_source_reply(const std::string& prompt, std::size_t max_spans) {
  const auto out = prompt.rfind("\nOutput: ");
  const auto att = prompt.rfind("\n\nAttribution:");
  if (out == std::string::npos || att == std::string::npos || att < out) return {};
  const auto fact = content_lemmas(prompt.substr(out + 9, att - out - 9));

  std::vector<std::string> sentences;
  for (const auto& src : attribution_sources(prompt)) {
    const utf8::OffsetIndex index(src);
    for (const auto& s : split_sentences(src)) sentences.emplace_back(index.slice(s.start, s.end));
  }
  std::vector<std::set<std::string>> lemmas;
  for (const auto& s : sentences) lemmas.push_back(content_lemmas(s));

  std::set<std::string> covered;
  std::vector<std::size_t> picked;
  while (picked.size() < max_spans) {
    std::size_t best = sentences.size(), best_gain = 0;
    for (std::size_t i = 0; i < sentences.size(); ++i) {
      std::size_t gain = 0;
      for (const auto& l : lemmas[i]) gain += fact.count(l) && !covered.count(l);
      if (gain > best_gain) best = i, best_gain = gain;
    }
    if (best == sentences.size()) break;
    picked.push_back(best);
    for (const auto& l : lemmas[best])
      if (fact.count(l)) covered.insert(l);
  }
  std::sort(picked.begin(), picked.end());
  std::string reply;
  for (auto i : picked) reply += (reply.empty() ? "" : "; ") + sentences[i];
  return reply;
}

inline std::string run_action(const nlohmann::json& action, const std::string& prompt) {
  if (action.is_string()) return action.get<std::string>();
  if (!action.is_object()) throw Error(ErrorCode::InvalidArgument, "mock action must be a string or an object");
  if (action.contains("reply")) return action.at("reply").get<std::string>();
  if (action.contains("fail")) throw Error(ErrorCode::ProviderExhausted, action.at("fail").get<std::string>());
  if (action.contains("empty")) return {};
  if (action.contains("echo")) {
    const auto& a = action.at("echo");
    std::string text = between(prompt, a.value("after", ""), a.value("before", ""));
    if (a.contains("replace"))
      for (const auto& [from, to] : a.at("replace").items()) text = replace_all(text, from, to.get<std::string>());
    return trim(text);
  }
  if (action.contains("split_clauses")) {
    const auto& a = action.at("split_clauses");
    std::string reply;
    for (const auto& c : split_clauses(between(prompt, a.value("after", ""), a.value("before", "")))) reply += "- " + c + "\n";
    return reply;
  }
  if (action.contains("best_source")) {
    return best_source_reply(prompt, action.at("best_source").value("max_spans", std::size_t{3}));
  }
  throw Error(ErrorCode::InvalidArgument, "unknown mock action " + action.dump());
}

}  // namespace mock

/// Chat provider answering from a rule script; see the header comment.
class ScriptedChat final : public ChatProvider {
 public:
  explicit ScriptedChat(nlohmann::json script) : script_(std::move(script)) {
    if (!script_.is_object()) throw Error(ErrorCode::InvalidArgument, "chat script must be an object");
    if (script_.contains("rules") && !script_.at("rules").is_array())
      throw Error(ErrorCode::InvalidArgument, "chat script 'rules' must be an array");
    counts_.assign(script_.contains("rules") ? script_.at("rules").size() : 0, 0);
  }

  std::string complete(const std::string& prompt, const ChatParams& params) override {
    nlohmann::json action;
    {
      std::lock_guard lock(mu_);
      ++calls_;
      const auto& rules = script_.contains("rules") ? script_.at("rules") : nlohmann::json::array();
      for (std::size_t i = 0; i < rules.size() && action.is_null(); ++i) {
        if (!matches(rules[i], prompt, params)) continue;
        const auto& replies = rules[i].contains("replies") ? rules[i].at("replies") : nlohmann::json::array({rules[i].at("reply")});
        if (replies.empty()) throw Error(ErrorCode::InvalidArgument, "mock rule without replies");
        action = replies[std::min(counts_[i]++, replies.size() - 1)];
      }
      if (action.is_null()) {
        if (!script_.contains("default")) throw Error(ErrorCode::NotFound, "no mock rule matches the prompt");
        action = script_.at("default");
      }
    }
    return mock::run_action(action, prompt);
  }

  std::string name() const override { return "mock"; }

  std::size_t calls() const {
    std::lock_guard lock(mu_);
    return calls_;
  }

 private:
  static bool matches(const nlohmann::json& rule, const std::string& prompt, const ChatParams& params) {
    if (rule.contains("task") && rule.at("task").get<std::string>() != params.task) return false;
    if (rule.contains("method") && rule.at("method").get<std::string>() != params.method) return false;
    if (!rule.contains("when")) return true;
    const auto& when = rule.at("when");
    if (when.is_string()) return prompt.find(when.get<std::string>()) != std::string::npos;
    return std::all_of(when.begin(), when.end(),
                       [&](const auto& w) { return prompt.find(w.template get<std::string>()) != std::string::npos; });
  }

  nlohmann::json script_;
  mutable std::mutex mu_;
  std::vector<std::size_t> counts_;
  std::size_t calls_ = 0;
};

/// Fraction of the hypothesis's content lemmas found in the premise.
inline double lexical_support(std::string_view premise, std::string_view hypothesis) {
  const auto h = mock::content_lemmas(hypothesis);
  if (h.empty()) return 1.0;
  const auto p = mock::content_lemmas(premise);
  std::size_t hit = 0;
  for (const auto& l : h) hit += p.count(l);
  return double(hit) / double(h.size());
}

/// Rule-driven entailment; falls back to lexical containment.
class RuleNli final : public NLIProvider {
 public:
  explicit RuleNli(nlohmann::json script = nlohmann::json::object()) : script_(std::move(script)) {
    threshold_ = script_.value("threshold", 0.75);
  }

  bool entails(const std::string& premise, const std::string& hypothesis) override {
    if (script_.contains("rules")) {
      for (const auto& r : script_.at("rules")) {
        if (r.contains("premise_contains") && premise.find(r.at("premise_contains").get<std::string>()) == std::string::npos)
          continue;
        if (r.contains("hypothesis_contains") &&
            hypothesis.find(r.at("hypothesis_contains").get<std::string>()) == std::string::npos)
          continue;
        if (r.contains("fail")) throw Error(ErrorCode::ProviderExhausted, r.at("fail").get<std::string>());
        return r.at("entails").get<bool>();
      }
    }
    const auto def = script_.contains("default") ? script_.at("default") : nlohmann::json("lexical");
    if (def.is_boolean()) return def.get<bool>();
    return lexical_support(premise, hypothesis) >= threshold_;
  }

  std::string name() const override { return "mock-nli"; }

 private:
  nlohmann::json script_;
  double threshold_ = 0.75;
};

struct MockProviders {
  std::shared_ptr<ScriptedChat> chat;
  std::shared_ptr<RuleNli> nli;
};

inline MockProviders mock_providers_from_json(const nlohmann::json& j) {
  return {std::make_shared<ScriptedChat>(j.contains("chat") ? j.at("chat") : nlohmann::json::object()),
          std::make_shared<RuleNli>(j.contains("nli") ? j.at("nli") : nlohmann::json::object())};
}

inline MockProviders load_mock_script(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read mock script " + path.string());
  try {
    return mock_providers_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, "bad mock script " + path.string() + ": " + e.what());
  }
}

}  // namespace laquer

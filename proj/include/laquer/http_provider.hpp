#pragma once

// Network providers: an OpenAI-compatible chat completions endpoint and a
// minimal entailment endpoint (POST {premise, hypothesis} -> {entails}).
//
//   LAQUER_CHAT_URL    base URL, e.g. https://api.openai.com
//   LAQUER_CHAT_KEY    bearer token, optional
//   LAQUER_CHAT_MODEL  model name (default gpt-4o)
//   LAQUER_NLI_URL     entailment endpoint URL

#include <cstdlib>
#include <memory>
#include <string>
#include <utility>

#include <httplib.h>
#include <json.hpp>

#include "laquer/error.hpp"
#include "laquer/provider.hpp"

namespace laquer {

struct UrlParts {
  std::string origin;  // scheme://host[:port]
  std::string path;    // begins with '/', or empty
};

inline UrlParts split_url(const std::string& url) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos) throw Error(ErrorCode::InvalidArgument, "URL needs a scheme: " + url);
  const auto slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) return {url, ""};
  std::string path = url.substr(slash);
  while (path.size() > 1 && path.back() == '/') path.pop_back();
  return {url.substr(0, slash), path == "/" ? "" : path};
}

inline std::string env_or(const char* name, std::string fallback = {}) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : fallback;
}

class OpenAiChat final : public ChatProvider {
 public:
  OpenAiChat(std::string base_url, std::string api_key, std::string model, int timeout_s = 120)
      : url_(split_url(base_url)), key_(std::move(api_key)), model_(std::move(model)), timeout_s_(timeout_s) {
    path_ = url_.path;
    if (!path_.ends_with("/chat/completions")) path_ += path_.ends_with("/v1") ? "/chat/completions" : "/v1/chat/completions";
  }

  static std::shared_ptr<OpenAiChat> from_env() {
    const auto url = env_or("LAQUER_CHAT_URL");
    if (url.empty()) throw Error(ErrorCode::InvalidArgument, "LAQUER_CHAT_URL is not set");
    return std::make_shared<OpenAiChat>(url, env_or("LAQUER_CHAT_KEY"), env_or("LAQUER_CHAT_MODEL", "gpt-4o"));
  }

  std::string complete(const std::string& prompt, const ChatParams& params) override {
    httplib::Client cli(url_.origin);
    cli.set_read_timeout(timeout_s_, 0);
    cli.set_connection_timeout(10, 0);
    httplib::Headers headers;
    if (!key_.empty()) headers.emplace("Authorization", "Bearer " + key_);
    const nlohmann::json body{{"model", model_},
                              {"temperature", params.temperature},
                              {"max_tokens", params.max_tokens},
                              {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})}};
    auto res = cli.Post(path_, headers, body.dump(), "application/json");
    if (!res) throw Error(ErrorCode::Io, "chat request failed: " + httplib::to_string(res.error()));
    if (res->status != 200) {
      throw Error(ErrorCode::Io, "chat endpoint returned HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200));
    }
    try {
      const auto j = nlohmann::json::parse(res->body);
      const auto& content = j.at("choices").at(0).at("message").at("content");
      return content.is_null() ? std::string() : content.get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::Io, std::string("unexpected chat response: ") + e.what());
    }
  }

  std::string name() const override { return "openai:" + model_; }

 private:
  UrlParts url_;
  std::string path_;
  std::string key_;
  std::string model_;
  int timeout_s_;
};

class HttpNli final : public NLIProvider {
 public:
  explicit HttpNli(const std::string& url, int timeout_s = 60) : url_(split_url(url)), timeout_s_(timeout_s) {
    if (url_.path.empty()) url_.path = "/";
  }

  static std::shared_ptr<HttpNli> from_env() {
    const auto url = env_or("LAQUER_NLI_URL");
    if (url.empty()) throw Error(ErrorCode::InvalidArgument, "LAQUER_NLI_URL is not set");
    return std::make_shared<HttpNli>(url);
  }

  bool entails(const std::string& premise, const std::string& hypothesis) override {
    httplib::Client cli(url_.origin);
    cli.set_read_timeout(timeout_s_, 0);
    const nlohmann::json body{{"premise", premise}, {"hypothesis", hypothesis}};
    auto res = cli.Post(url_.path, body.dump(), "application/json");
    if (!res) throw Error(ErrorCode::Io, "entailment request failed: " + httplib::to_string(res.error()));
    if (res->status != 200) throw Error(ErrorCode::Io, "entailment endpoint returned HTTP " + std::to_string(res->status));
    try {
      return nlohmann::json::parse(res->body).at("entails").get<bool>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::Io, std::string("unexpected entailment response: ") + e.what());
    }
  }

  std::string name() const override { return "http-nli"; }

 private:
  UrlParts url_;
  int timeout_s_;
};

}  // namespace laquer

#pragma once

// Provider boundary: chat completion and entailment checking. Concrete
// providers live in mock_provider.hpp (offline, scripted) and
// http_provider.hpp (network).

#include <chrono>
#include <cmath>
#include <cstddef>
#include <functional>
#include <iostream>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "laquer/error.hpp"
#include "laquer/utf8.hpp"

namespace laquer {

struct ChatParams {
  double temperature = 0.0;
  int max_tokens = 1024;
  // Labels copied into the call log.
  std::string task = "default";
  std::string method = "default";
};

class ChatProvider {
 public:
  virtual ~ChatProvider() = default;
  virtual std::string complete(const std::string& prompt, const ChatParams& params) = 0;
  virtual std::string name() const = 0;
};

class NLIProvider {
 public:
  virtual ~NLIProvider() = default;
  virtual bool entails(const std::string& premise, const std::string& hypothesis) = 0;
  virtual std::string name() const = 0;
};

// ---------------------------------------------------------------------------
// Logging

enum class LogLevel { Quiet = 0, Warn = 1, Info = 2, Debug = 3 };

inline LogLevel& log_level() {
  static LogLevel level = LogLevel::Warn;
  return level;
}

inline void log(LogLevel level, const std::string& message) {
  if (static_cast<int>(level) > static_cast<int>(log_level())) return;
  static std::mutex mu;
  std::lock_guard lock(mu);
  std::clog << "[laquer] " << message << '\n';
}

struct CallRecord {
  std::string task;
  std::string method;
  std::size_t prompt_chars = 0;
  std::size_t completion_chars = 0;
  bool ok = true;
  std::string prompt;      // only when bodies are logged
  std::string completion;  // only when bodies are logged
};

/// Thread-safe append-only record of provider calls.
class CallLog {
 public:
  explicit CallLog(bool keep_bodies = false) : keep_bodies_(keep_bodies) {}

  void append(CallRecord rec) {
    if (!keep_bodies_) {
      rec.prompt.clear();
      rec.completion.clear();
    }
    std::lock_guard lock(mu_);
    records_.push_back(std::move(rec));
  }

  std::vector<CallRecord> snapshot() const {
    std::lock_guard lock(mu_);
    return records_;
  }

  bool keep_bodies() const { return keep_bodies_; }

 private:
  bool keep_bodies_;
  mutable std::mutex mu_;
  std::vector<CallRecord> records_;
};

/// Records every call of the wrapped provider into a CallLog.
class LoggingChat final : public ChatProvider {
 public:
  LoggingChat(std::shared_ptr<ChatProvider> inner, std::shared_ptr<CallLog> log)
      : inner_(std::move(inner)), log_(std::move(log)) {}

  std::string complete(const std::string& prompt, const ChatParams& params) override {
    CallRecord rec{params.task, params.method, utf8::length(prompt), 0, true, prompt, {}};
    try {
      std::string out = inner_->complete(prompt, params);
      rec.completion_chars = utf8::length(out);
      rec.completion = out;
      log_->append(std::move(rec));
      return out;
    } catch (...) {
      rec.ok = false;
      log_->append(std::move(rec));
      throw;
    }
  }

  std::string name() const override { return inner_->name(); }

 private:
  std::shared_ptr<ChatProvider> inner_;
  std::shared_ptr<CallLog> log_;
};

/// Retries transport failures with exponential backoff. The attempt budget
/// here is separate from any semantic retry loop built on top.
class RetryingChat final : public ChatProvider {
 public:
  RetryingChat(std::shared_ptr<ChatProvider> inner, int max_retries = 3,
               std::chrono::milliseconds base_delay = std::chrono::milliseconds(250))
      : inner_(std::move(inner)), max_retries_(max_retries), base_delay_(base_delay) {}

  std::string complete(const std::string& prompt, const ChatParams& params) override {
    std::string last_error;
    for (int attempt = 0; attempt <= max_retries_; ++attempt) {
      if (attempt > 0) std::this_thread::sleep_for(base_delay_ * (1 << (attempt - 1)));
      try {
        return inner_->complete(prompt, params);
      } catch (const std::exception& e) {
        last_error = e.what();
        log(LogLevel::Warn, inner_->name() + " attempt " + std::to_string(attempt + 1) + " failed: " + last_error);
      }
    }
    throw Error(ErrorCode::ProviderExhausted,
                inner_->name() + " failed after " + std::to_string(max_retries_ + 1) + " attempts: " + last_error);
  }

  std::string name() const override { return inner_->name(); }

 private:
  std::shared_ptr<ChatProvider> inner_;
  int max_retries_;
  std::chrono::milliseconds base_delay_;
};

/// Entailment from a callable; mostly for tests.
class FunctionNli final : public NLIProvider {
 public:
  explicit FunctionNli(std::function<bool(const std::string&, const std::string&)> fn) : fn_(std::move(fn)) {}
  bool entails(const std::string& premise, const std::string& hypothesis) override { return fn_(premise, hypothesis); }
  std::string name() const override { return "function"; }

 private:
  std::function<bool(const std::string&, const std::string&)> fn_;
};

/// Chat from a callable; mostly for tests.
class FunctionChat final : public ChatProvider {
 public:
  explicit FunctionChat(std::function<std::string(const std::string&, const ChatParams&)> fn)
      : fn_(std::move(fn)) {}
  std::string complete(const std::string& prompt, const ChatParams& params) override {
    std::lock_guard lock(mu_);
    return fn_(prompt, params);
  }
  std::string name() const override { return "function"; }

 private:
  std::mutex mu_;
  std::function<std::string(const std::string&, const ChatParams&)> fn_;
};

/// Runs `attempt` up to 1 + `retries` times; returns nullopt when all fail.
/// Failures are exceptions or an empty trimmed completion.
template <typename Fn>
std::optional<std::string> complete_with_retries(ChatProvider& chat, const std::string& prompt,
                                                 const ChatParams& params, int retries, Fn&& on_failure) {
  for (int attempt = 0; attempt <= retries; ++attempt) {
    try {
      std::string out = chat.complete(prompt, params);
      const auto first = out.find_first_not_of(" \t\r\n");
      if (first != std::string::npos) return out;
      on_failure(attempt + 1, "empty completion");
    } catch (const std::exception& e) {
      on_failure(attempt + 1, e.what());
    }
  }
  return std::nullopt;
}

}  // namespace laquer

#pragma once

// Session store and HTTP JSON API.
//
//   POST /sessions                     {docs:[{id,text}], question?, method, output?, metadata?}
//                                      -> {session_id}
//   GET  /sessions/{id}                -> session view
//   POST /sessions/{id}/attribute      {spans:[{start,end}], method, use_metadata}
//                                      -> attribution result
//   POST /sessions/{id}/hidden_states  LHS1 body -> {tokens, dim, layer, model_id}
//
// Errors are {error: <code>, message}.

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include <httplib.h>

#include "laquer/hidden_states.hpp"
#include "laquer/internals.hpp"
#include "laquer/json_io.hpp"
#include "laquer/pipeline.hpp"
#include "laquer/session.hpp"

namespace laquer {

class SessionStore {
 public:
  struct Entry {
    Session session;
    std::shared_ptr<const TokenHiddenStates> hidden_states;
    std::mutex mu;  // guards history and hidden_states
  };

  explicit SessionStore(std::optional<fs::path> root = {}) : root_(std::move(root)) {
    if (!root_) return;
    fs::create_directories(*root_);
    for (const auto& dir : list_bundles(*root_)) {
      try {
        auto e = std::make_shared<Entry>();
        e->session = load_session(dir);
        if (fs::exists(dir / "hidden_states.lhs1")) {
          auto hs = load_hidden_states(dir / "hidden_states.lhs1");
          check_states_match_session(hs, e->session);
          e->hidden_states = std::make_shared<const TokenHiddenStates>(std::move(hs));
        }
        sessions_[e->session.id] = e;
      } catch (const std::exception& ex) {
        log(LogLevel::Warn, "skipping stored session " + dir.string() + ": " + ex.what());
      }
    }
  }

  std::string add(Session s) {
    std::lock_guard lock(mu_);
    if (s.id.empty()) {
      do {
        s.id = "s" + std::to_string(++next_id_);
      } while (sessions_.count(s.id) || (root_ && fs::exists(*root_ / s.id)));
    } else if (sessions_.count(s.id)) {
      throw Error(ErrorCode::InvalidArgument, "session '" + s.id + "' already exists");
    }
    auto e = std::make_shared<Entry>();
    e->session = std::move(s);
    if (root_) save_session(e->session, *root_ / e->session.id);
    const std::string id = e->session.id;
    sessions_[id] = std::move(e);
    return id;
  }

  std::shared_ptr<Entry> get(const std::string& id) const {
    std::lock_guard lock(mu_);
    const auto it = sessions_.find(id);
    if (it == sessions_.end()) throw Error(ErrorCode::NotFound, "no session '" + id + "'");
    return it->second;
  }

  void append_history(Entry& e, HistoryEntry h) {
    std::lock_guard lock(e.mu);
    if (root_) laquer::append_history(*root_ / e.session.id, h);
    e.session.history.push_back(std::move(h));
  }

  void set_hidden_states(Entry& e, TokenHiddenStates hs) {
    check_states_match_session(hs, e.session);
    std::lock_guard lock(e.mu);
    if (root_) write_hidden_states(hs, *root_ / e.session.id / "hidden_states.lhs1");
    e.hidden_states = std::make_shared<const TokenHiddenStates>(std::move(hs));
  }

  std::size_t size() const {
    std::lock_guard lock(mu_);
    return sessions_.size();
  }

 private:
  std::optional<fs::path> root_;
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
  std::size_t next_id_ = 0;
};

inline int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotFound: return 404;
    case ErrorCode::MissingHiddenStates: return 409;
    case ErrorCode::EmptyResponse:
    case ErrorCode::ProviderExhausted:
    case ErrorCode::Io: return 502;
    default: return 400;
  }
}

/// Pipeline operations on a store; the HTTP layer is a thin wrapper.
class Service {
 public:
  Service(std::shared_ptr<ChatProvider> chat, std::shared_ptr<SessionStore> store, PipelineConfig cfg = {})
      : chat_(std::move(chat)), store_(std::move(store)), cfg_(std::move(cfg)) {}

  json create_session(const json& body) {
    if (!body.is_object()) throw Error(ErrorCode::InvalidArgument, "body must be a JSON object");
    if (!body.contains("docs")) throw Error(ErrorCode::InvalidArgument, "missing field 'docs'");
    auto docs = documents_from_json(body.at("docs"));
    std::optional<std::string> question, output, metadata;
    if (body.contains("question") && !body.at("question").is_null()) question = detail::get_field<std::string>(body, "question");
    if (body.contains("output") && !body.at("output").is_null()) output = detail::get_field<std::string>(body, "output");
    if (body.contains("metadata") && !body.at("metadata").is_null()) metadata = detail::get_field<std::string>(body, "metadata");
    const auto method = parse_generation_method(body.value("method", std::string("vanilla")));
    auto session = laquer::create_session(body.value("id", std::string()), std::move(docs), question, method, *chat_, cfg_,
                                          output, metadata);
    return {{"session_id", store_->add(std::move(session))}};
  }

  json get_session(const std::string& id) const {
    auto e = store_->get(id);
    std::lock_guard lock(e->mu);
    json j = to_json(e->session);
    j["has_hidden_states"] = e->hidden_states != nullptr;
    return j;
  }

  json attribute(const std::string& id, const json& body) {
    auto e = store_->get(id);
    const auto query = query_from_json(body);
    std::shared_ptr<const TokenHiddenStates> hs;
    {
      std::lock_guard lock(e->mu);
      hs = e->hidden_states;
    }
    auto result = attribute_query(e->session, query, *chat_, hs.get(), cfg_);
    store_->append_history(*e, {normalize_query(query.spans, query.method, query.use_metadata), result, utc_timestamp()});
    return to_json(result, e->session);
  }

  json upload_hidden_states(const std::string& id, std::string_view bytes) {
    auto e = store_->get(id);
    auto hs = parse_hidden_states(bytes);
    json j{{"tokens", hs.tokens.size()}, {"dim", hs.dim}, {"layer", hs.layer}, {"model_id", hs.model_id}};
    store_->set_hidden_states(*e, std::move(hs));
    return j;
  }

  void register_routes(httplib::Server& server) {
    server.Post("/sessions", [this](const httplib::Request& req, httplib::Response& res) {
      handle(res, [&] { return std::make_pair(201, create_session(parse_body(req))); });
    });
    server.Get(R"(/sessions/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      handle(res, [&] { return std::make_pair(200, get_session(req.matches[1])); });
    });
    server.Post(R"(/sessions/([^/]+)/attribute)", [this](const httplib::Request& req, httplib::Response& res) {
      handle(res, [&] { return std::make_pair(200, attribute(req.matches[1], parse_body(req))); });
    });
    server.Post(R"(/sessions/([^/]+)/hidden_states)", [this](const httplib::Request& req, httplib::Response& res) {
      handle(res, [&] { return std::make_pair(200, upload_hidden_states(req.matches[1], req.body)); });
    });
    server.Get("/health", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(R"({"status":"ok"})", "application/json");
    });
  }

 private:
  static json parse_body(const httplib::Request& req) {
    try {
      return json::parse(req.body);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::InvalidArgument, std::string("request body is not JSON: ") + e.what());
    }
  }

  template <typename Fn>
  static void handle(httplib::Response& res, Fn&& fn) {
    try {
      auto [status, body] = fn();
      res.status = status;
      res.set_content(body.dump(), "application/json");
    } catch (const Error& e) {
      res.status = http_status(e.code());
      res.set_content(json{{"error", to_string(e.code())}, {"message", e.what()}}.dump(), "application/json");
    } catch (const std::exception& e) {
      res.status = 500;
      res.set_content(json{{"error", "Internal"}, {"message", e.what()}}.dump(), "application/json");
    }
  }

  std::shared_ptr<ChatProvider> chat_;
  std::shared_ptr<SessionStore> store_;
  PipelineConfig cfg_;
};

}  // namespace laquer

// laquer: command-line front end (generate, attribute, synthesize, evaluate, serve).

#include <csignal>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <httplib.h>

#include "laquer/http_provider.hpp"
#include "laquer/laquer.hpp"
#include "laquer/service.hpp"

namespace {

using namespace laquer;

struct Providers {
  std::shared_ptr<ChatProvider> chat;
  std::shared_ptr<NLIProvider> nli;
};

Providers make_providers(const std::string& spec) {
  if (spec.rfind("mock:", 0) == 0) {
    auto m = load_mock_script(spec.substr(5));
    return {m.chat, m.nli};
  }
  if (spec == "http") {
    Providers p;
    p.chat = std::make_shared<RetryingChat>(OpenAiChat::from_env());
    if (!env_or("LAQUER_NLI_URL").empty()) p.nli = HttpNli::from_env();
    return p;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown provider '" + spec + "' (use mock:<script.json> or http)");
}

std::vector<SpanRef> parse_span_list(const std::string& text) {
  std::vector<SpanRef> spans;
  std::size_t begin = 0;
  while (begin <= text.size()) {
    auto end = text.find(',', begin);
    if (end == std::string::npos) end = text.size();
    const std::string item = text.substr(begin, end - begin);
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw Error(ErrorCode::InvalidArgument, "span '" + item + "' is not S:E");
    try {
      std::size_t used = 0;
      const auto s = std::stoull(item.substr(0, colon), &used);
      if (used != colon) throw std::invalid_argument("start");
      const std::string rest = item.substr(colon + 1);
      const auto e = std::stoull(rest, &used);
      if (used != rest.size()) throw std::invalid_argument("end");
      spans.push_back(SpanRef::output(s, e));
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::InvalidArgument, "span '" + item + "' is not S:E");
    }
    begin = end + 1;
  }
  return spans;
}

std::vector<AttributionMethod> parse_methods(const std::string& text) {
  std::vector<AttributionMethod> out;
  std::size_t begin = 0;
  while (begin <= text.size()) {
    auto end = text.find(',', begin);
    if (end == std::string::npos) end = text.size();
    out.push_back(parse_attribution_method(trim(text.substr(begin, end - begin))));
    begin = end + 1;
  }
  return out;
}

// Any of decontextualize.txt, decompose.txt, vanilla.txt, alce.txt found in
// `dir` replaces the corresponding built-in template.
void apply_prompt_dir(PipelineConfig& cfg, std::optional<PromptTemplate>& decompose, const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorCode::Io, "no prompt directory " + dir.string());
  const auto load = [&](const char* name) -> std::optional<PromptTemplate> {
    const auto path = dir / name;
    if (!fs::exists(path)) return std::nullopt;
    return PromptTemplate::load(path);
  };
  if (auto t = load("decontextualize.txt")) cfg.decontext.prompt = *t;
  if (auto t = load("vanilla.txt")) cfg.generation.vanilla_prompt = *t;
  if (auto t = load("alce.txt")) cfg.generation.alce_prompt = *t;
  decompose = load("decompose.txt");
}

httplib::Server* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Localized attribution queries over generated text"};
  app.require_subcommand(1);

  std::string provider = "http";
  std::string level = "warn";
  app.add_option("--provider", provider, "mock:<script.json> or http (reads LAQUER_CHAT_* / LAQUER_NLI_URL)")
      ->capture_default_str();
  app.add_option("--log-level", level, "quiet, warn, info or debug")->capture_default_str();
  std::string prompts_dir, exemplars_file;
  app.add_option("--prompts", prompts_dir, "Directory of prompt templates overriding the built-in ones");
  app.add_option("--exemplars", exemplars_file, "Few-shot exemplars (JSON) for attribution and ALCE generation");

  // generate
  auto* gen = app.add_subcommand("generate", "Generate the output of a bundle");
  std::string gen_bundle, gen_method = "vanilla";
  gen->add_option("--bundle", gen_bundle, "Bundle directory")->required();
  gen->add_option("--method", gen_method, "vanilla or alce")->capture_default_str();

  // attribute
  auto* att = app.add_subcommand("attribute", "Attribute highlighted output spans");
  std::string att_bundle, att_spans, att_method = "prompt", att_states;
  bool att_no_metadata = false, att_lexical = false, att_no_history = false;
  att->add_option("--bundle", att_bundle, "Bundle directory with output.txt")->required();
  att->add_option("--span", att_spans, "Highlighted output spans, S:E[,S:E] in characters")->required();
  att->add_option("--method", att_method, "prompt or internals")->capture_default_str();
  att->add_flag("--no-metadata", att_no_metadata, "Ignore the generation's attribution metadata");
  att->add_option("--hidden-states", att_states, "LHS1 dump (default: <bundle>/hidden_states.lhs1)");
  att->add_flag("--lexical-states", att_lexical, "Use word-identity states when no dump exists");
  att->add_flag("--no-history", att_no_history, "Do not append to history.jsonl");

  // synthesize
  auto* syn = app.add_subcommand("synthesize", "Sample benchmark queries from a bundle's output");
  std::string syn_bundle;
  std::size_t syn_n = kDefaultSynthesizedQueries;
  std::uint64_t syn_seed = 7;
  syn->add_option("--bundle", syn_bundle, "Bundle directory")->required();
  syn->add_option("--n", syn_n, "Number of queries")->capture_default_str()->check(CLI::PositiveNumber);
  syn->add_option("--seed", syn_seed, "Sampling seed")->capture_default_str();

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "Run the benchmark over a dataset of bundles");
  std::string ev_dataset, ev_methods = "prompt", ev_out;
  std::size_t ev_n = kDefaultSynthesizedQueries;
  std::uint64_t ev_seed = 7;
  bool ev_lexical = false, ev_exclude = false, ev_no_metadata = false;
  ev->add_option("--dataset", ev_dataset, "Directory of bundles")->required();
  ev->add_option("--methods", ev_methods, "Comma-separated: prompt,internals")->capture_default_str();
  ev->add_option("--n", ev_n, "Queries per bundle")->capture_default_str()->check(CLI::PositiveNumber);
  ev->add_option("--seed", ev_seed, "Sampling seed")->capture_default_str();
  ev->add_option("--out", ev_out, "Write the JSON report here");
  ev->add_flag("--lexical-states", ev_lexical, "Use word-identity states for bundles without a dump");
  ev->add_flag("--exclude-non-attributed", ev_exclude, "Leave non-attributed facts out of AutoAIS");
  ev->add_flag("--no-metadata", ev_no_metadata, "Ignore attribution metadata");

  // serve
  auto* srv = app.add_subcommand("serve", "Run the HTTP API");
  std::string srv_host = "127.0.0.1", srv_data;
  int srv_port = 8080;
  srv->add_option("--host", srv_host)->capture_default_str();
  srv->add_option("--port", srv_port)->capture_default_str();
  srv->add_option("--data-dir", srv_data, "Persist sessions as bundles here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (level == "quiet") log_level() = LogLevel::Quiet;
    else if (level == "warn") log_level() = LogLevel::Warn;
    else if (level == "info") log_level() = LogLevel::Info;
    else if (level == "debug") log_level() = LogLevel::Debug;
    else throw Error(ErrorCode::InvalidArgument, "unknown log level '" + level + "'");

    std::optional<PromptTemplate> synthesis_prompt;
    auto providers = make_providers(provider);
    PipelineConfig cfg;
    if (!prompts_dir.empty()) apply_prompt_dir(cfg, synthesis_prompt, prompts_dir);
    if (!exemplars_file.empty()) {
      cfg.prompt.shots = load_exemplars(exemplars_file);
      cfg.generation.alce_examples = cfg.prompt.shots;
    }

    if (*gen) {
      const auto spec = load_bundle_spec(gen_bundle);
      auto session = create_session(spec.id, spec.documents, spec.question, parse_generation_method(gen_method),
                                    *providers.chat, cfg);
      save_session(session, gen_bundle);
      std::cout << session.output.text << '\n';
      if (session.output.metadata) std::cout << serialize_metadata(*session.output.metadata);
      return 0;
    }

    if (*att) {
      auto session = load_session(att_bundle);
      HighlightQuery q{parse_span_list(att_spans), parse_attribution_method(att_method), !att_no_metadata};
      std::optional<TokenHiddenStates> hs;
      if (q.method == AttributionMethod::Internals) {
        const fs::path path = att_states.empty() ? fs::path(att_bundle) / "hidden_states.lhs1" : fs::path(att_states);
        if (fs::exists(path)) hs = load_hidden_states(path);
        else if (att_lexical) hs = lexical_hidden_states(session, cfg.internals.layer);
      }
      auto result = attribute(session, q, *providers.chat, hs ? &*hs : nullptr, cfg);
      if (!att_no_history) append_history(att_bundle, session.history.back());
      std::cout << to_json(result, session).dump(2) << '\n';
      return 0;
    }

    if (*syn) {
      auto session = load_session(syn_bundle);
      SynthesisOptions opts;
      opts.n = syn_n;
      opts.seed = syn_seed;
      if (synthesis_prompt) opts.prompt = *synthesis_prompt;
      json out = json::array();
      const utf8::OffsetIndex index(session.output.text);
      for (const auto& q : synthesize_queries(session.output, *providers.chat, opts)) {
        json spans = spans_to_json(q.highlight.spans);
        for (std::size_t i = 0; i < q.highlight.spans.size(); ++i)
          spans[i]["text"] = std::string(index.slice(q.highlight.spans[i].start, q.highlight.spans[i].end));
        out.push_back({{"fact", q.fact_text},
                       {"sentence", q.source_sentence_idx},
                       {"span_type", to_string(q.span_type)},
                       {"spans", spans}});
      }
      std::cout << out.dump(2) << '\n';
      return 0;
    }

    if (*ev) {
      if (!providers.nli) throw Error(ErrorCode::InvalidArgument, "evaluate needs an entailment provider (LAQUER_NLI_URL)");
      BenchmarkConfig bc;
      bc.dataset = ev_dataset;
      bc.methods = parse_methods(ev_methods);
      bc.synthesis.n = ev_n;
      bc.synthesis.seed = ev_seed;
      if (synthesis_prompt) bc.synthesis.prompt = *synthesis_prompt;
      bc.pipeline = cfg;
      bc.lexical_states = ev_lexical;
      bc.use_metadata = !ev_no_metadata;
      bc.ais.non_attributed_as_zero = !ev_exclude;
      const auto report = run_benchmark(bc, *providers.chat, *providers.nli);
      std::cout << report_table(report);
      if (!ev_out.empty()) write_file(ev_out, report_json(report).dump(2) + "\n");
      return report.failed_bundles.empty() ? 0 : 3;
    }

    if (*srv) {
      std::optional<fs::path> root;
      if (!srv_data.empty()) root = srv_data;
      auto store = std::make_shared<SessionStore>(root);
      Service service(providers.chat, store, cfg);
      httplib::Server server;
      service.register_routes(server);
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cerr << "listening on " << srv_host << ":" << srv_port << '\n';
      if (!server.listen(srv_host, srv_port)) throw Error(ErrorCode::Io, "cannot listen on port " + std::to_string(srv_port));
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << to_string(e.code()) << ": " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

#include <gtest/gtest.h>

#include <cstring>

#include "laquer/internals.hpp"
#include "laquer/lexical_states.hpp"
#include "support.hpp"
#include "synthetic.hpp"

using namespace laquer;

namespace {

template <typename Fn>
ErrorCode code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no laquer::Error thrown";
  return ErrorCode::Io;
}

TokenHiddenStates tiny(std::size_t dim = 8) {
  TokenHiddenStates hs;
  hs.model_id = "m";
  hs.layer = 5;
  hs.dim = dim;
  hs.sections = {{SectionKind::Doc, "d", "ab cd ef"}, {SectionKind::Output, "", "ab"}};
  hs.tokens = {{0, 0, 2, "ab", false}, {0, 3, 5, "cd", false}, {1, 0, 2, "ab", false}};
  for (std::size_t i = 0; i < 3 * dim; ++i) hs.matrix.push_back(float(i) * 0.25f - 1.0f);
  return hs;
}

// Basis-vector states: token rows given explicitly.
TokenHiddenStates with_rows(std::vector<std::vector<float>> doc_rows, std::vector<std::vector<float>> out_rows) {
  TokenHiddenStates hs;
  hs.model_id = "m";
  hs.layer = 5;
  hs.dim = doc_rows.empty() ? out_rows.front().size() : doc_rows.front().size();
  std::string dtext, otext;
  for (std::size_t i = 0; i < doc_rows.size(); ++i) {
    if (i) dtext += ' ';
    hs.tokens.push_back({0, dtext.size(), dtext.size() + 1, "x", false});
    dtext += 'x';
  }
  for (std::size_t i = 0; i < out_rows.size(); ++i) {
    if (i) otext += ' ';
    hs.tokens.push_back({1, otext.size(), otext.size() + 1, "y", false});
    otext += 'y';
  }
  hs.sections = {{SectionKind::Doc, "d", dtext}, {SectionKind::Output, "", otext}};
  for (auto& r : doc_rows) hs.matrix.insert(hs.matrix.end(), r.begin(), r.end());
  for (auto& r : out_rows) hs.matrix.insert(hs.matrix.end(), r.begin(), r.end());
  return hs;
}

}  // namespace

// ---------------------------------------------------------------- LHS1

TEST(Lhs1, RoundTripIsBitExact) {
  auto hs = tiny();
  hs.matrix[3] = std::numeric_limits<float>::denorm_min();
  hs.matrix[4] = -0.0f;
  hs.matrix[5] = std::nextafter(1.0f, 2.0f);
  const auto bytes = serialize_hidden_states(hs);
  EXPECT_EQ(bytes.substr(0, 4), "LHS1");
  const auto back = parse_hidden_states(bytes);
  EXPECT_EQ(back.tokens, hs.tokens);
  EXPECT_EQ(back.sections, hs.sections);
  ASSERT_EQ(back.matrix.size(), 24u);
  EXPECT_EQ(std::memcmp(back.matrix.data(), hs.matrix.data(), 24 * sizeof(float)), 0);
  EXPECT_EQ(serialize_hidden_states(back), bytes);

  testing_support::TempDir dir;
  write_hidden_states(hs, dir.path() / "x.lhs1");
  EXPECT_EQ(testing_support::slurp(dir.path() / "x.lhs1"), bytes);
  EXPECT_EQ(load_hidden_states(dir.path() / "x.lhs1"), back);
}

TEST(Lhs1, LittleEndianLayout) {
  const auto hs = tiny(1);
  const auto bytes = serialize_hidden_states(hs);
  std::uint32_t len = 0;
  for (int k = 3; k >= 0; --k) len = (len << 8) | static_cast<unsigned char>(bytes[4 + k]);
  const auto header = nlohmann::json::parse(bytes.substr(8, len));
  EXPECT_EQ(header["n_tokens"], 3);
  EXPECT_EQ(header["dim"], 1);
  EXPECT_EQ(header["sections"][0]["id"], "d");
  EXPECT_EQ(bytes.size(), 8 + len + 12);
  // -1.0f = 0xBF800000, stored low byte first.
  EXPECT_EQ(static_cast<unsigned char>(bytes[8 + len + 3]), 0xBF);
  EXPECT_EQ(static_cast<unsigned char>(bytes[8 + len + 2]), 0x80);
}

TEST(Lhs1, Errors) {
  auto bytes = serialize_hidden_states(tiny());
  EXPECT_EQ(code_of([&] { parse_hidden_states("LHS2" + bytes.substr(4)); }), ErrorCode::BadMagic);
  EXPECT_EQ(code_of([&] { parse_hidden_states("LH"); }), ErrorCode::BadMagic);
  // Matrix one row short.
  EXPECT_EQ(code_of([&] { parse_hidden_states(bytes.substr(0, bytes.size() - 8 * 4)); }), ErrorCode::DimMismatch);

  auto bad = tiny();
  bad.tokens[1].end = 99;
  EXPECT_EQ(code_of([&] { parse_hidden_states(serialize_hidden_states(bad)); }), ErrorCode::TokenOffsetOutOfRange);
  EXPECT_EQ(code_of([] { load_hidden_states("/nonexistent/x.lhs1"); }), ErrorCode::Io);
}

TEST(Lhs1, HeaderClaimsMoreTokens) {
  auto hs = tiny();
  auto bytes = serialize_hidden_states(hs);
  std::uint32_t len = 0;
  for (int k = 3; k >= 0; --k) len = (len << 8) | static_cast<unsigned char>(bytes[4 + k]);
  auto header = nlohmann::ordered_json::parse(bytes.substr(8, len));
  header["n_tokens"] = 4;
  header["tokens"].push_back(header["tokens"][0]);
  const std::string h = header.dump();
  std::string rebuilt = "LHS1";
  for (int k = 0; k < 4; ++k) rebuilt += char((h.size() >> (8 * k)) & 0xFF);
  rebuilt += h + bytes.substr(8 + len);
  EXPECT_EQ(code_of([&] { parse_hidden_states(rebuilt); }), ErrorCode::DimMismatch);
}

// ---------------------------------------------------------------- sub-tasks

TEST(Internals, CosineSanity) {
  const std::vector<double> x{0.3, -1.2, 2.0}, y{-0.3, 1.2, -2.0};
  EXPECT_NEAR(cosine(std::span<const double>(x), std::span<const double>(x)), 1.0, 1e-6);
  EXPECT_NEAR(cosine(std::span<const double>(x), std::span<const double>(y)), -1.0, 1e-6);
  const std::vector<double> z(3, 0.0);
  EXPECT_EQ(code_of([&] { cosine(std::span<const double>(x), std::span<const double>(z)); }), ErrorCode::ZeroVector);
}

TEST(Internals, ExtractiveIdenticalAndOrthogonal) {
  const auto hs = with_rows({{1, 0, 0}, {0, 1, 0}}, {{0, 1, 0}, {0, 0, 1}});
  EXPECT_EQ(identify_extractive_tokens({2, 3}, hs, {}), std::vector<std::size_t>{2});
  EXPECT_EQ(code_of([&] { identify_extractive_tokens({0}, hs, {}); }), ErrorCode::InvalidArgument);
}

TEST(Internals, ExtractiveMonotoneInTheta) {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<std::vector<float>> d, o;
    for (int i = 0; i < 12; ++i) d.push_back(synthetic::unit_vector(rng, 6, 6));
    for (int i = 0; i < 8; ++i) o.push_back(synthetic::unit_vector(rng, 6, 6));
    const auto hs = with_rows(d, o);
    std::vector<std::size_t> outs;
    for (std::size_t i = 12; i < 20; ++i) outs.push_back(i);
    std::vector<std::size_t> prev = outs;
    for (double theta = 0.05; theta <= 1.0; theta += 0.05) {
      InternalsConfig cfg;
      cfg.theta = theta;
      const auto cur = identify_extractive_tokens(outs, hs, cfg);
      EXPECT_TRUE(std::includes(prev.begin(), prev.end(), cur.begin(), cur.end()));
      prev = cur;
    }
  }
}

TEST(Internals, SpanRepresentation) {
  const auto hs = with_rows({{1, 0, 0}, {0, 1, 0}, {0, 1, 0}}, {{0, 0, 1}});
  EXPECT_EQ(span_representation({0, 1}, hs), (std::vector<double>{0.5, 0.5, 0.0}));
  EXPECT_EQ(span_representation({1, 2}, hs), (std::vector<double>{0.0, 1.0, 0.0}));
  EXPECT_EQ(span_representation({3}, hs), (std::vector<double>{0.0, 0.0, 1.0}));
  EXPECT_EQ(code_of([&] { span_representation({}, hs); }), ErrorCode::EmptySpan);
}

TEST(Internals, AnchorTieBreakAndCount) {
  const auto hs = with_rows({{1, 1}, {1, 1}, {1, 1}, {1, 1}}, {{1, 0}});
  InternalsConfig cfg;
  cfg.anchor_count = 2;
  EXPECT_EQ(find_anchor_tokens({1.0, 0.0}, hs, cfg), (std::vector<std::size_t>{0, 1}));
  cfg.anchor_count = 10;
  EXPECT_EQ(find_anchor_tokens({1.0, 0.0}, hs, cfg).size(), 4u);

  const auto ranked = with_rows({{0, 1}, {1, 1}, {1, 0}}, {{1, 0}});
  EXPECT_EQ(find_anchor_tokens({1.0, 0.0}, ranked, cfg), (std::vector<std::size_t>{2, 1, 0}));
}

TEST(Internals, WindowOfLengthOne) {
  std::mt19937_64 rng(5);
  auto in = synthetic::make_instance(rng, {16, 40, 1, 5, 2, 2});
  InternalsConfig cfg;
  cfg.window_max = 1;
  const auto mean = span_representation(in.planted_output, in.hs);
  const auto anchors = find_anchor_tokens(mean, in.hs, cfg);
  const auto w = best_window(anchors, mean, in.hs, cfg);
  ASSERT_TRUE(w);
  EXPECT_EQ(w->first, w->last);
  EXPECT_EQ(w->first, anchors.front());
  EXPECT_FALSE(best_window({}, mean, in.hs, cfg));
}

TEST(Internals, VerbatimCopyScoresOne) {
  std::mt19937_64 rng(6);
  auto in = synthetic::make_instance(rng, {32, 40, 1, 5, 0, 0});
  const auto mean = span_representation(in.planted_output, in.hs);
  InternalsConfig cfg;
  const auto w = best_window(find_anchor_tokens(mean, in.hs, cfg), mean, in.hs, cfg);
  ASSERT_TRUE(w);
  EXPECT_NEAR(w->score, 1.0, 1e-9);
  EXPECT_EQ(w->span, in.planted_span);
}

TEST(Internals, PlantedSignalMatchesOracle) {
  std::mt19937_64 rng(2024);
  for (int rep = 0; rep < 30; ++rep) {
    synthetic::InstanceShape shape;
    shape.dim = 8 + rep % 5 * 8;
    shape.doc_tokens = 40;
    shape.docs = 1 + rep % 2;
    shape.plant_len = 5;
    auto in = synthetic::make_instance(rng, shape);
    InternalsConfig cfg;
    cfg.window_max = 1 + std::size_t(rep) % 30;
    const auto docs = synthetic::oracle_doc_tokens(in.hs);
    EXPECT_EQ(candidate_doc_tokens(in.hs), docs);
    const auto ext = identify_extractive_tokens(in.output_tokens, in.hs, cfg);
    EXPECT_EQ(ext, in.planted_output);
    EXPECT_EQ(ext, synthetic::oracle_extractive(in.hs, in.output_tokens, docs, cfg.theta));

    const auto mean = span_representation(ext, in.hs);
    const auto anchors = find_anchor_tokens(mean, in.hs, cfg);
    EXPECT_EQ(anchors, synthetic::oracle_anchors(in.hs, mean, docs, cfg.anchor_count));
    if (shape.dim >= 32) {
      EXPECT_NE(std::find(in.planted_doc.begin(), in.planted_doc.end(), anchors.front()), in.planted_doc.end());
    }
    const auto w = best_window(anchors, mean, in.hs, cfg);
    const auto o = synthetic::oracle_best_window(in.hs, synthetic::oracle_mean(in.hs, ext), anchors, docs,
                                                 cfg.window_max);
    ASSERT_TRUE(w && o);
    EXPECT_EQ(w->first, o->first) << "rep " << rep;
    EXPECT_EQ(w->last, o->last) << "rep " << rep;
  }
}

TEST(Internals, CenteredWindowsAreASubset) {
  std::mt19937_64 rng(8);
  auto in = synthetic::make_instance(rng, {16, 50, 1, 6, 1, 1});
  InternalsConfig cfg;
  const auto mean = span_representation(in.planted_output, in.hs);
  const auto anchors = find_anchor_tokens(mean, in.hs, cfg);
  const auto all = best_window(anchors, mean, in.hs, cfg);
  cfg.centered_windows = true;
  const auto centered = best_window(anchors, mean, in.hs, cfg);
  ASSERT_TRUE(all && centered);
  EXPECT_LE(centered->score, all->score + 1e-12);
}

// ---------------------------------------------------------------- end to end

TEST(Internals, EndToEndVerbatimCopy) {
  std::mt19937_64 rng(99);
  for (int rep = 0; rep < 10; ++rep) {
    auto in = synthetic::make_instance(rng, {64, 80, 2, 3 + std::size_t(rep) % 6, 4, 4});
    const DecontextualizedFact fact{"f", {in.output_span}, Provenance::LLM};
    const auto r = attribute_with_internals(fact, in.session, in.hs);
    EXPECT_EQ(r.source_spans, std::vector<SpanRef>{in.planted_span});
    EXPECT_FALSE(r.non_attributed);
  }
}

TEST(Internals, NothingExtractiveIsNonAttributed) {
  std::mt19937_64 rng(3);
  auto in = synthetic::make_instance(rng, {16, 30, 1, 3, 2, 2});
  // Highlight only the noise words before the copy.
  const auto& t = in.hs.tokens[in.output_tokens[1]];
  const DecontextualizedFact fact{"f", {SpanRef::output(0, t.end)}, Provenance::LLM};
  const auto r = attribute_with_internals(fact, in.session, in.hs);
  EXPECT_TRUE(r.non_attributed);
  EXPECT_TRUE(r.source_spans.empty());
}

TEST(Internals, RestrictionFindsBestInsideAllowedSpans) {
  std::mt19937_64 rng(17);
  for (int rep = 0; rep < 10; ++rep) {
    auto in = synthetic::make_instance(rng, {16, 60, 2, 4, 2, 2});
    // Allow every document except the one holding the copy.
    std::vector<SpanRef> allowed;
    for (const auto& d : in.session.documents) {
      if (d.id != in.planted_span.doc_id) allowed.push_back(SpanRef::in_doc(d.id, 0, utf8::length(d.text)));
    }
    InternalsConfig cfg;
    cfg.theta = 0.3;  // with the copy excluded, lower the bar so something is extractive
    const auto docs = synthetic::oracle_doc_tokens(in.hs, &allowed);
    const auto ext = synthetic::oracle_extractive(in.hs, in.output_tokens, docs, cfg.theta);
    const DecontextualizedFact fact{"f", {in.output_span}, Provenance::LLM};
    const auto r = attribute_with_internals(fact, in.session, in.hs, allowed, cfg);
    if (ext.empty()) {
      EXPECT_TRUE(r.non_attributed);
      continue;
    }
    for (const auto& s : r.source_spans) EXPECT_NE(s.doc_id, in.planted_span.doc_id);

    // Restricting never beats the unrestricted window for the planted run.
    const auto mean = span_representation(in.planted_output, in.hs);
    const auto unrestricted = best_window(find_anchor_tokens(mean, in.hs, cfg), mean, in.hs, cfg);
    const auto rdocs = candidate_doc_tokens(in.hs, allowed);
    const auto restricted =
        best_window(find_anchor_tokens(mean, in.hs, cfg, rdocs), mean, in.hs, cfg, rdocs);
    ASSERT_TRUE(unrestricted && restricted);
    EXPECT_LE(restricted->score, unrestricted->score + 1e-12);
    const auto o = synthetic::oracle_best_window(in.hs, synthetic::oracle_mean(in.hs, in.planted_output),
                                                 synthetic::oracle_anchors(in.hs, mean, docs, cfg.anchor_count), docs,
                                                 cfg.window_max);
    ASSERT_TRUE(o);
    EXPECT_EQ(restricted->first, o->first);
    EXPECT_EQ(restricted->last, o->last);
  }
}

TEST(Internals, RejectsMismatchedStates) {
  std::mt19937_64 rng(1);
  auto in = synthetic::make_instance(rng, {8, 20, 1, 3, 1, 1});
  const DecontextualizedFact fact{"f", {in.output_span}, Provenance::LLM};
  InternalsConfig cfg;
  cfg.layer = 7;
  EXPECT_EQ(code_of([&] { attribute_with_internals(fact, in.session, in.hs, std::nullopt, cfg); }),
            ErrorCode::InvalidArgument);
  cfg = {};
  cfg.theta = 0.0;
  EXPECT_EQ(code_of([&] { attribute_with_internals(fact, in.session, in.hs, std::nullopt, cfg); }),
            ErrorCode::InvalidArgument);
  auto other = in.session;
  other.output.text = "changed.";
  EXPECT_EQ(code_of([&] { attribute_with_internals(fact, other, in.hs); }), ErrorCode::InvalidArgument);
}

TEST(Internals, DeterministicResults) {
  std::mt19937_64 a(77), b(77);
  auto x = synthetic::make_instance(a, {24, 90, 2, 5, 3, 3});
  auto y = synthetic::make_instance(b, {24, 90, 2, 5, 3, 3});
  const DecontextualizedFact fact{"f", {x.output_span}, Provenance::LLM};
  EXPECT_EQ(attribute_with_internals(fact, x.session, x.hs), attribute_with_internals(fact, y.session, y.hs));
}

// ---------------------------------------------------------------- lexical states

TEST(LexicalStates, SameLemmaSameVector) {
  const auto a = lexical_vector("label", 32);
  EXPECT_EQ(a, lexical_vector("label", 32));
  EXPECT_NE(a, lexical_vector("labels", 32));
  double n = 0;
  for (float f : a) n += double(f) * f;
  EXPECT_NEAR(n, 1.0, 1e-6);
}

TEST(LexicalStates, CoverSessionAndAttributeCopiedClause) {
  Session s;
  s.documents = {{"doc_1.txt", "Consumers deserve to know what they are eating. Farmers disagree strongly."},
                 {"doc_2.txt", "Labeling costs money."}};
  s.question = "Should food be labeled?";
  s.output.text = "Farmers disagree strongly about labels.";
  s.output.sentences = split_sentences(s.output.text);
  const auto hs = lexical_hidden_states(s);
  EXPECT_EQ(hs.sections.size(), 4u);
  EXPECT_EQ(hs.sections[0].kind, SectionKind::Query);
  EXPECT_NO_THROW(validate_hidden_states(hs));
  const auto back = parse_hidden_states(serialize_hidden_states(hs));
  EXPECT_EQ(back, hs);

  const DecontextualizedFact fact{"f", {SpanRef::output(0, 25)}, Provenance::LLM};
  const auto r = attribute_with_internals(fact, s, hs);
  ASSERT_EQ(r.source_spans.size(), 1u);
  EXPECT_EQ(span_text(r.source_spans[0], s), "Farmers disagree strongly");
}

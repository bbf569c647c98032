#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "laquer/align.hpp"
#include "laquer/edit_script.hpp"
#include "laquer/fuzzy.hpp"
#include "laquer/metadata.hpp"
#include "laquer/model.hpp"
#include "laquer/sentences.hpp"
#include "laquer/tokenize.hpp"
#include "laquer/utf8.hpp"

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

std::size_t levenshtein(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::vector<std::vector<std::size_t>> d(a.size() + 1, std::vector<std::size_t>(b.size() + 1));
  for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i)
    for (std::size_t j = 1; j <= b.size(); ++j)
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
  return d[a.size()][b.size()];
}

std::string sliced(const std::string& text, const SpanRef& s) { return utf8::slice(text, s.start, s.end); }

}  // namespace

// ---------------------------------------------------------------- utf8

TEST(Utf8, RoundTripsMultibyte) {
  const std::string s = "naïve café 😀 ok";
  const auto u = utf8::decode(s);
  EXPECT_EQ(u.size(), 15u);
  EXPECT_EQ(utf8::encode(u), s);
  EXPECT_EQ(utf8::length(s), 15u);
  EXPECT_EQ(utf8::slice(s, 11, 12), "😀");
  EXPECT_EQ(utf8::scalar_offset(s, utf8::byte_offset(s, 13)), 13u);
}

TEST(Utf8, RejectsInvalid) {
  EXPECT_EQ(code_of([] { utf8::decode("\xff"); }), ErrorCode::InvalidUtf8);
  EXPECT_EQ(code_of([] { utf8::decode("\xc3"); }), ErrorCode::InvalidUtf8);
  EXPECT_EQ(code_of([] { utf8::decode("\xed\xa0\x80"); }), ErrorCode::InvalidUtf8);  // surrogate
  EXPECT_EQ(code_of([] { utf8::decode("\xc0\xaf"); }), ErrorCode::InvalidUtf8);      // overlong
}

TEST(Utf8, OffsetIndexSlices) {
  const std::string s = "a😀b";
  utf8::OffsetIndex idx(s);
  EXPECT_EQ(idx.size(), 3u);
  EXPECT_EQ(idx.slice(1, 3), "😀b");
  EXPECT_EQ(code_of([&] { idx.slice(2, 4); }), ErrorCode::OffsetOutOfRange);
}

// ---------------------------------------------------------------- model

TEST(NormalizeQuery, MergesOverlaps) {
  auto q = normalize_query({SpanRef::output(5, 10), SpanRef::output(8, 14)});
  ASSERT_EQ(q.spans.size(), 1u);
  EXPECT_EQ(q.spans[0], SpanRef::output(5, 14));
}

TEST(NormalizeQuery, IdentityAndSort) {
  EXPECT_EQ(normalize_query({SpanRef::output(0, 3)}).spans, std::vector<SpanRef>{SpanRef::output(0, 3)});
  const auto q = normalize_query({SpanRef::output(20, 25), SpanRef::output(0, 3)});
  EXPECT_EQ(q.spans, (std::vector<SpanRef>{SpanRef::output(0, 3), SpanRef::output(20, 25)}));
}

TEST(NormalizeQuery, Errors) {
  EXPECT_EQ(code_of([] { normalize_query({}); }), ErrorCode::EmptyQuery);
  EXPECT_EQ(code_of([] { normalize_query({SpanRef::in_doc("d", 0, 3)}); }), ErrorCode::TargetMismatch);
  EXPECT_EQ(code_of([] { normalize_query({SpanRef::output(3, 3)}); }), ErrorCode::OffsetOutOfRange);
  EXPECT_EQ(code_of([] { normalize_query({SpanRef::output(0, 9)}, AttributionMethod::Prompt, true, 8); }),
            ErrorCode::OffsetOutOfRange);
}

TEST(NormalizeQuery, IsIdempotent) {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<SpanRef> spans;
    const int n = 1 + int(rng() % 5);
    for (int i = 0; i < n; ++i) {
      const std::size_t s = rng() % 50;
      spans.push_back(SpanRef::output(s, s + 1 + rng() % 10));
    }
    const auto once = normalize_query(spans);
    EXPECT_EQ(normalize_query(once.spans), once);
    for (std::size_t i = 1; i < once.spans.size(); ++i) EXPECT_LT(once.spans[i - 1].end, once.spans[i].start);
  }
}

TEST(Session, UnknownDocument) {
  Session s;
  s.documents = {{"a", "x"}};
  EXPECT_EQ(code_of([&] { s.document("b"); }), ErrorCode::UnknownDocId);
  EXPECT_EQ(s.document_index("a"), 0u);
}

TEST(Validation, DuplicateDocumentIds) {
  EXPECT_EQ(code_of([] { validate_documents({{"a", "x"}, {"a", "y"}}); }), ErrorCode::InvalidArgument);
}

// ---------------------------------------------------------------- metadata

TEST(Metadata, ParsesSpanRecord) {
  const auto r = parse_metadata_record("<0, doc_1.txt, [[17367, 17562]]>");
  EXPECT_EQ(r.sentence_idx, 0u);
  EXPECT_EQ(r.doc_id, "doc_1.txt");
  ASSERT_TRUE(r.offsets);
  EXPECT_EQ(*r.offsets, (std::vector<OffsetPair>{{17367, 17562}}));
  EXPECT_EQ(serialize_metadata_record(r), "<0, doc_1.txt, [[17367, 17562]]>");
}

TEST(Metadata, ParsesDocumentRecord) {
  const auto r = parse_metadata_record("<2, doc_3.txt>");
  EXPECT_EQ(r.sentence_idx, 2u);
  EXPECT_EQ(r.doc_id, "doc_3.txt");
  EXPECT_FALSE(r.offsets);
  EXPECT_EQ(serialize_metadata_record(r), "<2, doc_3.txt>");
}

TEST(Metadata, RejectsMalformed) {
  for (const char* bad : {"<0, d.txt, [[5,2]]>", "<0, d.txt, [[5, 2]]>", "<0, d.txt, [[5, 5]]>", "<-1, d.txt>",
                          "<0 d.txt>", "0, d.txt", "<0, d.txt, []>", "<0, d.txt, [[1, 2]>", "<00, d.txt>",
                          "<0, , [[1, 2]]>", "<0, d.txt> ", " <0, d.txt>", "<0, d.txt, [[1, 2], ]>", ""}) {
    EXPECT_THROW(parse_metadata_record(bad), MalformedRecord) << bad;
  }
}

TEST(Metadata, FileRoundTrip) {
  const std::string text = "<0, doc_1.txt, [[17367, 17562]]>\n<0, doc_2.txt>\n<3, b.txt, [[0, 4], [9, 12]]>\n";
  const auto md = parse_metadata(text);
  ASSERT_EQ(md.records.size(), 3u);
  EXPECT_EQ(serialize_metadata(md), text);
  EXPECT_TRUE(md.has_span_offsets());
}

TEST(Metadata, ReportsLineNumber) {
  try {
    parse_metadata("<0, a>\n<1, b, [[3, 1]]>\n");
    FAIL();
  } catch (const MalformedRecord& e) {
    EXPECT_EQ(e.line_no(), 2u);
    EXPECT_EQ(e.code(), ErrorCode::MalformedRecord);
  }
}

TEST(Metadata, ValidationAgainstDocuments) {
  const std::vector<Document> docs{{"doc_1.txt", "short"}};
  EXPECT_EQ(code_of([&] { validate_metadata(parse_metadata("<0, doc_9.txt>\n"), docs, 1); }), ErrorCode::UnknownDocId);
  EXPECT_EQ(code_of([&] { validate_metadata(parse_metadata("<0, doc_1.txt, [[0, 99]]>\n"), docs, 1); }),
            ErrorCode::OffsetOutOfRange);
  EXPECT_EQ(code_of([&] { validate_metadata(parse_metadata("<4, doc_1.txt>\n"), docs, 2); }),
            ErrorCode::OffsetOutOfRange);
}

// ---------------------------------------------------------------- tokenize

TEST(Tokenize, LemmatizesVerbForms) {
  const auto toks = tokenize_lemmatize("promoting understanding");
  ASSERT_EQ(toks.size(), 2u);
  EXPECT_EQ(toks[0].lemma, "promote");
  EXPECT_EQ(toks[1].lemma, "understanding");
  EXPECT_EQ(tokenize_lemmatize("promotes")[0].lemma, "promote");
}

TEST(Tokenize, EmptyText) { EXPECT_TRUE(tokenize_lemmatize("").empty()); }

TEST(Tokenize, StopwordsAndDigits) {
  const auto toks = tokenize_lemmatize("The 911 calls");
  ASSERT_EQ(toks.size(), 3u);
  EXPECT_EQ(toks[0].surface, "The");
  EXPECT_EQ(toks[0].lemma, "the");
  EXPECT_FALSE(toks[0].is_content);
  EXPECT_EQ(toks[1].lemma, "911");
  EXPECT_TRUE(toks[1].is_content);
  EXPECT_EQ(toks[2].lemma, "call");
  EXPECT_TRUE(toks[2].is_content);
}

TEST(Tokenize, OffsetsAreScalar) {
  const std::string text = "Café's 4:30 p.m. don't—ok";
  for (const auto& t : tokenize_lemmatize(text)) EXPECT_EQ(utf8::slice(text, t.start, t.end), t.surface);
  const auto toks = tokenize_lemmatize(text);
  std::vector<std::string> surfaces;
  for (const auto& t : toks) surfaces.push_back(t.surface);
  EXPECT_EQ(surfaces, (std::vector<std::string>{"Café", "'s", "4:30", "p", ".", "m", ".", "do", "n't", "—", "ok"}));
}

TEST(Tokenize, StopwordListSize) {
  EXPECT_EQ(kStopwords.size(), 179u);
  std::set<std::string_view> unique(kStopwords.begin(), kStopwords.end());
  EXPECT_EQ(unique.size(), 179u);
  EXPECT_TRUE(is_stopword("they"));
  EXPECT_FALSE(is_stopword("eating"));
}

TEST(Tokenize, CountsContentWords) {
  // they/to/what/they/are are stopwords: deserve, know, eating remain.
  EXPECT_EQ(count_content_words("They deserve to know what they are eating"), 3u);
}

// ---------------------------------------------------------------- edit script

TEST(EditScript, Examples) {
  using V = std::vector<std::string>;
  EXPECT_EQ(edit_script(V{"cat", "sat"}, V{"cat", "sat"}), (std::vector<EditOp>{EditOp::Equal, EditOp::Equal}));
  EXPECT_EQ(edit_script(V{"the", "cat", "sat"}, V{"cat", "sat"}),
            (std::vector<EditOp>{EditOp::Delete, EditOp::Equal, EditOp::Equal}));
  EXPECT_EQ(script_cost(edit_script(V{"a", "b"}, V{"b", "a"})), 2u);
  EXPECT_TRUE(edit_script(V{}, V{}).empty());
  // Cost ties keep the shared word.
  EXPECT_EQ(edit_script(V{"b", "x", "x", "a"}, V{"a", "b"}),
            (std::vector<EditOp>{EditOp::Delete, EditOp::Delete, EditOp::Delete, EditOp::Equal, EditOp::Insert}));
  EXPECT_EQ(edit_script(V{}, V{"x"}), std::vector<EditOp>{EditOp::Insert});
}

TEST(EditScript, CostMatchesDistanceAndReplays) {
  std::mt19937 rng(11);
  const std::vector<std::string> vocab{"a", "b", "c", "d"};
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<std::string> a(rng() % 9), b(rng() % 9);
    for (auto& x : a) x = vocab[rng() % vocab.size()];
    for (auto& x : b) x = vocab[rng() % vocab.size()];
    const auto ops = edit_script(a, b);
    EXPECT_EQ(script_cost(ops), levenshtein(a, b));
    // Replaying the script turns a into b.
    std::size_t i = 0, j = 0;
    for (auto op : ops) {
      switch (op) {
        case EditOp::Equal: EXPECT_EQ(a[i], b[j]); ++i, ++j; break;
        case EditOp::Substitute: EXPECT_NE(a[i], b[j]); ++i, ++j; break;
        case EditOp::Delete: ++i; break;
        case EditOp::Insert: ++j; break;
      }
    }
    EXPECT_EQ(i, a.size());
    EXPECT_EQ(j, b.size());
  }
}

TEST(EditScript, IndelScriptKeepsLongestCommonSubsequence) {
  using V = std::vector<std::string>;
  // Levenshtein prefers substitutions here and keeps nothing.
  const V a{"gun", "be", "rarely", "use", "in", "self", "defense", "the"}, b{"the", "of", "gun"};
  const auto lev = edit_script(a, b);
  EXPECT_EQ(std::count(lev.begin(), lev.end(), EditOp::Equal), 0);
  const auto ops = indel_script(a, b);
  EXPECT_EQ(std::count(ops.begin(), ops.end(), EditOp::Equal), 1);
  EXPECT_EQ(std::count(ops.begin(), ops.end(), EditOp::Substitute), 0);

  std::mt19937 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    V x(rng() % 10), y(rng() % 10);
    for (auto& w : x) w = std::string(1, char('a' + rng() % 4));
    for (auto& w : y) w = std::string(1, char('a' + rng() % 4));
    // LCS by the textbook DP.
    std::vector<std::vector<std::size_t>> L(x.size() + 1, std::vector<std::size_t>(y.size() + 1, 0));
    for (std::size_t i = 1; i <= x.size(); ++i)
      for (std::size_t j = 1; j <= y.size(); ++j)
        L[i][j] = x[i - 1] == y[j - 1] ? L[i - 1][j - 1] + 1 : std::max(L[i - 1][j], L[i][j - 1]);
    const auto s2 = indel_script(x, y);
    EXPECT_EQ(std::size_t(std::count(s2.begin(), s2.end(), EditOp::Equal)), L[x.size()][y.size()]);
  }
}

// ---------------------------------------------------------------- sentences

TEST(Sentences, Examples) {
  EXPECT_EQ(split_sentences("A. B.").size(), 2u);
  EXPECT_TRUE(split_sentences("").empty());
  const std::string t = "Crews answered calls around 4:30 p.m. at Penn Park. Nobody was hurt.";
  const auto s = split_sentences(t);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(sliced(t, s[0]), "Crews answered calls around 4:30 p.m. at Penn Park.");
  EXPECT_EQ(sliced(t, s[1]), "Nobody was hurt.");
}

TEST(Sentences, AbbreviationsAndQuotes) {
  const std::string t = "Dr. Smith met Mr. Jones in the U.S. today. \"It went well,\" she said. Done!";
  const auto s = split_sentences(t);
  ASSERT_EQ(s.size(), 3u);
  EXPECT_EQ(sliced(t, s[0]), "Dr. Smith met Mr. Jones in the U.S. today.");
  EXPECT_EQ(sliced(t, s[1]), "\"It went well,\" she said.");
  const std::string late = "They met at 9 p.m. The talks failed.";
  EXPECT_EQ(split_sentences(late).size(), 2u);
  EXPECT_EQ(split_sentences("Line one\nLine two").size(), 2u);
}

TEST(Sentences, CoverNonSpaceText) {
  const std::string t = "First one. Second (really) one? Third one!  Fourth";
  std::string joined;
  for (const auto& s : split_sentences(t)) joined += sliced(t, s);
  std::string compact = t;
  compact.erase(std::remove(compact.begin(), compact.end(), ' '), compact.end());
  joined.erase(std::remove(joined.begin(), joined.end(), ' '), joined.end());
  EXPECT_EQ(joined, compact);
}

// ---------------------------------------------------------------- fuzzy

TEST(Fuzzy, ExactMatch) {
  const auto m = fuzzy_locate(std::string_view("cat"), std::string_view("the cat sat"), 0);
  ASSERT_TRUE(m);
  EXPECT_EQ(m->distance, 0u);
  EXPECT_EQ(m->span.start, 4u);
  EXPECT_EQ(m->span.end, 7u);
}

TEST(Fuzzy, OneTypo) {
  const std::string src = "Tonight: Voters in 11 states will pick their governors tonight.";
  const std::string pat = "Voters in 11 states wil pick";
  const auto m = fuzzy_locate(std::string_view(pat), std::string_view(src), fuzzy_budget(utf8::length(pat)));
  ASSERT_TRUE(m);
  EXPECT_EQ(m->distance, 1u);
  EXPECT_EQ(utf8::slice(src, m->span.start, m->span.end), "Voters in 11 states will pick");
}

TEST(Fuzzy, AbsentBeyondBudget) {
  EXPECT_FALSE(fuzzy_locate(std::string_view("quantum chromodynamics"), std::string_view("apples and pears"), 2));
}

TEST(Fuzzy, Budget) {
  EXPECT_EQ(fuzzy_budget(1), 1u);
  EXPECT_EQ(fuzzy_budget(10), 1u);
  EXPECT_EQ(fuzzy_budget(11), 2u);
  EXPECT_EQ(fuzzy_budget(28), 3u);
  EXPECT_EQ(fuzzy_budget(1000), 20u);
}

TEST(Fuzzy, MatchesExhaustiveWindowOracle) {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    std::u32string src(5 + rng() % 25, U'a'), pat(1 + rng() % 6, U'a');
    for (auto& c : src) c = U'a' + rng() % 3;
    for (auto& c : pat) c = U'a' + rng() % 3;
    const std::size_t budget = rng() % 4;
    std::optional<std::tuple<std::size_t, std::size_t, std::size_t>> best;  // dist, start, end
    for (std::size_t s = 0; s <= src.size(); ++s)
      for (std::size_t e = s + 1; e <= src.size(); ++e) {
        std::vector<std::string> a, b;
        for (char32_t c : pat) a.push_back(std::string(1, char(c)));
        for (std::size_t k = s; k < e; ++k) b.push_back(std::string(1, char(src[k])));
        const std::tuple<std::size_t, std::size_t, std::size_t> cand{levenshtein(a, b), s, e};
        if (!best || cand < *best) best = cand;
      }
    const auto m = fuzzy_locate(std::u32string_view(pat), std::u32string_view(src), budget);
    const auto exact = src.find(pat);
    if (exact != std::u32string::npos) {
      ASSERT_TRUE(m);
      EXPECT_EQ(m->distance, 0u);
      EXPECT_EQ(m->span.start, exact);
    } else if (std::get<0>(*best) <= budget && std::get<0>(*best) < pat.size()) {
      ASSERT_TRUE(m) << trial;
      EXPECT_EQ(m->distance, std::get<0>(*best));
      EXPECT_EQ(m->span.start, std::get<1>(*best));
      EXPECT_EQ(m->span.end, std::get<2>(*best));
    } else {
      EXPECT_FALSE(m && m->distance > budget);
    }
  }
}

// ---------------------------------------------------------------- align

TEST(Align, DecomposedFactToSentence) {
  const std::string text =
      "Exposing students to texts from different religions can be beneficial for their learning, as it helps them "
      "understand the development and advancement of societies, promoting understanding, respect, and fellowship.";
  const auto r = align_fact_to_text("Exposing students to texts from different religions promotes understanding", text);
  ASSERT_EQ(r.output_spans.size(), 2u);
  EXPECT_EQ(sliced(text, r.output_spans[0]), "Exposing students to texts from different religions");
  EXPECT_EQ(sliced(text, r.output_spans[1]), "promoting understanding");
  EXPECT_DOUBLE_EQ(r.coverage.ratio(), 1.0);
}

TEST(Align, IdenticalFact) {
  const std::string text = "Judge Brett Kavanaugh faced intense scrutiny.";
  const auto r = align_fact_to_text(text, text);
  ASSERT_EQ(r.output_spans.size(), 1u);
  EXPECT_EQ(sliced(text, r.output_spans[0]), "Judge Brett Kavanaugh faced intense scrutiny");
  EXPECT_DOUBLE_EQ(r.coverage.ratio(), 1.0);
}

TEST(Align, TranspositionNeedsRecursion) {
  const std::string text = "beta x x alpha";
  const auto r = align_fact_to_text("alpha beta", text);
  EXPECT_EQ(r.coverage.content_aligned, 2u);
  ASSERT_EQ(r.output_spans.size(), 2u);
  EXPECT_EQ(sliced(text, r.output_spans[0]), "beta");
  EXPECT_EQ(sliced(text, r.output_spans[1]), "alpha");
}

TEST(Align, ShortTransposedRemainderStillAligns) {
  const std::string text =
      "Guns are rarely used in self-defense, are frequently stolen and used by criminals, and their presence makes "
      "conflicts more likely to become violent.";
  const auto r = align_fact_to_text("The presence of gun make conflict more likely to become violent.", text);
  EXPECT_DOUBLE_EQ(r.coverage.ratio(), 1.0);
  ASSERT_EQ(r.output_spans.size(), 2u);
  EXPECT_EQ(sliced(text, r.output_spans[0]), "Guns");
  EXPECT_EQ(sliced(text, r.output_spans[1]), "presence makes conflicts more likely to become violent");
}

TEST(Align, OffsetShiftsSpans) {
  const std::string text = "The calls came early.";
  const auto r = align_fact_to_text("calls came", text, 100);
  ASSERT_EQ(r.output_spans.size(), 1u);
  EXPECT_EQ(r.output_spans[0], SpanRef::output(104, 114));
}

TEST(Align, DigitsAlignInsideAbbreviatedTimes) {
  const std::string text =
      "The Los Angeles County Fire Department responded to multiple 911 calls around 4:30 p.m. at Penn Park.";
  const auto r = align_fact_to_text("The 911 calls were made around 4:30.", text);
  std::vector<std::string> parts;
  for (const auto& s : r.output_spans) parts.push_back(sliced(text, s));
  EXPECT_NE(std::find(parts.begin(), parts.end(), "911 calls around 4:30"), parts.end());
  EXPECT_EQ(r.coverage.content_total, 5u);  // 911, call, make, around, 4:30
  EXPECT_EQ(r.coverage.content_aligned, 4u);
}

TEST(Align, EmptyFact) {
  const auto r = align_fact_to_text("", "anything here");
  EXPECT_TRUE(r.output_spans.empty());
  EXPECT_EQ(r.coverage.content_total, 0u);
}

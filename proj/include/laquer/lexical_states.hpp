#pragma once

// Offline stand-in for a model's hidden-state dump: every token's vector is
// a fixed pseudo-random unit vector derived from its lemma, so identical
// words are identical states and unrelated words are nearly orthogonal.
// Useful for exercising the internals method without running a model.

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "laquer/hidden_states.hpp"
#include "laquer/model.hpp"
#include "laquer/tokenize.hpp"

namespace laquer {

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::vector<float> lexical_vector(std::string_view lemma, std::size_t dim) {
  std::uint64_t state = fnv1a(lemma);
  std::vector<double> v(dim);
  double norm = 0.0;
  for (auto& x : v) {
    // Sum of four uniforms in [-1, 1): roughly Gaussian, cheap, portable.
    double s = 0.0;
    for (int k = 0; k < 4; ++k) s += double(splitmix64(state) >> 11) * (2.0 / 9007199254740992.0) - 1.0;
    x = s;
    norm += s * s;
  }
  norm = std::sqrt(norm);
  std::vector<float> out(dim);
  for (std::size_t k = 0; k < dim; ++k) out[k] = static_cast<float>(v[k] / norm);
  return out;
}

inline TokenHiddenStates lexical_hidden_states(const Session& session, int layer = 5, std::size_t dim = 64) {
  TokenHiddenStates hs;
  hs.model_id = "lexical-hash-" + std::to_string(dim);
  hs.layer = layer;
  hs.dim = dim;
  const auto add_section = [&](SectionKind kind, const std::string& id, const std::string& text) {
    const std::size_t idx = hs.sections.size();
    hs.sections.push_back({kind, id, text});
    for (const auto& tok : tokenize_lemmatize(text)) {
      hs.tokens.push_back({idx, tok.start, tok.end, tok.surface, false});
      const auto v = lexical_vector(tok.lemma, dim);
      hs.matrix.insert(hs.matrix.end(), v.begin(), v.end());
    }
  };
  if (session.question) add_section(SectionKind::Query, {}, *session.question);
  for (const auto& d : session.documents) add_section(SectionKind::Doc, d.id, d.text);
  add_section(SectionKind::Output, {}, session.output.text);
  return hs;
}

}  // namespace laquer

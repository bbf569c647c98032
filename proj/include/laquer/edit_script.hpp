#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace laquer {

/// Delete consumes an element of the source sequence, Insert one of the
/// target, Equal/Substitute one of each.
enum class EditOp { Equal, Insert, Delete, Substitute };

/// Minimal-cost Levenshtein script turning `a` into `b`.
///
/// Among scripts of minimal cost, those with the most Equal operations are
/// preferred (so a shared word is never traded for a substitution of equal
/// cost). Costs are computed over suffixes and the script is read front to
/// back, preferring Equal > Substitute > Delete > Insert at every step, so
/// the remaining ties resolve to the leftmost matches.
namespace detail {

template <typename T>
std::vector<EditOp> min_script(std::span<const T> a, std::span<const T> b, bool allow_substitute) {
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  // key = cost * K - equals for a[i..] vs b[j..]; lower is better.
  const long long K = static_cast<long long>(std::max(n, m)) + 1;
  std::vector<long long> key((n + 1) * (m + 1));
  const auto at = [&](std::size_t i, std::size_t j) -> long long& { return key[i * (m + 1) + j]; };
  for (std::size_t i = 0; i <= n; ++i) at(i, m) = static_cast<long long>(n - i) * K;
  for (std::size_t j = 0; j <= m; ++j) at(n, j) = static_cast<long long>(m - j) * K;
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t j = m; j-- > 0;) {
      const long long indel = std::min(at(i + 1, j), at(i, j + 1)) + K;
      if (a[i] == b[j]) {
        at(i, j) = std::min(at(i + 1, j + 1) - 1, indel);
      } else {
        at(i, j) = allow_substitute ? std::min(at(i + 1, j + 1) + K, indel) : indel;
      }
    }
  }
  std::vector<EditOp> ops;
  ops.reserve(std::max(n, m));
  std::size_t i = 0, j = 0;
  while (i < n || j < m) {
    const long long here = at(i, j);
    if (i < n && j < m && a[i] == b[j] && at(i + 1, j + 1) - 1 == here) {
      ops.push_back(EditOp::Equal);
      ++i, ++j;
    } else if (allow_substitute && i < n && j < m && a[i] != b[j] && at(i + 1, j + 1) + K == here) {
      ops.push_back(EditOp::Substitute);
      ++i, ++j;
    } else if (i < n && at(i + 1, j) + K == here) {
      ops.push_back(EditOp::Delete);
      ++i;
    } else {
      ops.push_back(EditOp::Insert);
      ++j;
    }
  }
  return ops;
}

}  // namespace detail

template <typename T>
std::vector<EditOp> edit_script(std::span<const T> a, std::span<const T> b) {
  return detail::min_script(a, b, true);
}

inline std::vector<EditOp> edit_script(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  return edit_script<std::string>(std::span<const std::string>(a), std::span<const std::string>(b));
}

/// Script without substitutions: a longest common subsequence of `a` and `b`
/// becomes the Equal operations.
inline std::vector<EditOp> indel_script(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  return detail::min_script(std::span<const std::string>(a), std::span<const std::string>(b), false);
}

/// Number of non-Equal operations.
inline std::size_t script_cost(const std::vector<EditOp>& ops) {
  return static_cast<std::size_t>(std::count_if(ops.begin(), ops.end(), [](EditOp op) { return op != EditOp::Equal; }));
}

}  // namespace laquer

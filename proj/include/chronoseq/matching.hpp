#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace chronoseq {

/// Maximum number of events allowed between consecutive matched pattern
/// elements; nullopt means unbounded.
using MaxGap = std::optional<std::size_t>;

/// Among all gap-legal embeddings of `pattern` in `seq` whose first index is
/// >= `from`, returns one with the smallest last index (nullopt if none).
/// Earliest-end is what makes greedy non-overlapping counting and greedy
/// chain assignment exact. Ties on the end resolve to the latest-starting
/// predecessor chain found by backtracking.
template <typename T>
std::optional<std::vector<std::size_t>> earliest_embedding(std::span<const T> seq, std::span<const T> pattern,
                                                           std::size_t from, MaxGap max_gap) {
  const std::size_t m = pattern.size();
  if (m == 0 || from >= seq.size()) return std::nullopt;
  constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

  // reach[k] holds, ascending, every index j where element k can end a legal
  // partial embedding starting at or after `from`.
  std::vector<std::vector<std::size_t>> reach(m);
  std::vector<std::size_t> latest(m, npos);
  for (std::size_t j = from; j < seq.size(); ++j) {
    // Walk levels downward so that level k sees level k-1 from strictly earlier j.
    for (std::size_t k = m; k-- > 0;) {
      if (!(seq[j] == pattern[k])) continue;
      bool ok = false;
      if (k == 0) {
        ok = true;
      } else if (latest[k - 1] != npos) {
        ok = !max_gap || j - latest[k - 1] - 1 <= *max_gap;
      }
      if (ok) {
        reach[k].push_back(j);
        latest[k] = j;
      }
    }
    if (latest[m - 1] == j) {
      std::vector<std::size_t> idx(m);
      idx[m - 1] = j;
      for (std::size_t k = m - 1; k-- > 0;) {
        const std::size_t next = idx[k + 1];
        // Latest predecessor before `next` is always within the gap if any is.
        std::size_t chosen = npos;
        for (auto it = reach[k].rbegin(); it != reach[k].rend(); ++it) {
          if (*it < next) {
            chosen = *it;
            break;
          }
        }
        idx[k] = chosen;
      }
      return idx;
    }
  }
  return std::nullopt;
}

/// Leftmost-greedy non-overlapping occurrences: repeatedly take the
/// earliest-ending embedding that starts after the previous one ended.
template <typename T>
std::vector<std::vector<std::size_t>> greedy_occurrences(std::span<const T> seq, std::span<const T> pattern,
                                                         MaxGap max_gap) {
  std::vector<std::vector<std::size_t>> out;
  std::size_t from = 0;
  while (auto emb = earliest_embedding(seq, pattern, from, max_gap)) {
    from = emb->back() + 1;
    out.push_back(std::move(*emb));
  }
  return out;
}

}  // namespace chronoseq

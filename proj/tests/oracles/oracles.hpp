#pragma once

// Reference implementations used only by tests. They enumerate instead of
// searching, and share no code with the library's matching or mining paths.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <vector>

namespace oracle {

using Seq = std::vector<int>;
using Gap = std::optional<std::size_t>;  // nullopt = unbounded

inline bool gap_legal(const std::vector<std::size_t>& idx, Gap gap) {
  for (std::size_t k = 1; k < idx.size(); ++k) {
    if (idx[k] <= idx[k - 1]) return false;
    if (gap && idx[k] - idx[k - 1] - 1 > *gap) return false;
  }
  return true;
}

// Every gap-legal index subset of `day` up to max_len elements, as (indices, pattern).
inline void for_each_embedding(const Seq& day, Gap gap, std::size_t max_len,
                               const std::function<void(const std::vector<std::size_t>&, const Seq&)>& fn) {
  const std::size_t n = day.size();
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << n); ++mask) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < n; ++i)
      if (mask >> i & 1) idx.push_back(i);
    if (idx.size() > max_len || !gap_legal(idx, gap)) continue;
    Seq pat;
    for (auto i : idx) pat.push_back(day[i]);
    fn(idx, pat);
  }
}

// pattern -> number of days holding at least one gap-legal embedding.
inline std::map<Seq, std::size_t> all_supports(const std::vector<Seq>& days, Gap gap, std::size_t max_len) {
  std::map<Seq, std::size_t> support;
  for (const auto& day : days) {
    std::set<Seq> seen;
    for_each_embedding(day, gap, max_len, [&](const auto&, const Seq& p) { seen.insert(p); });
    for (const auto& p : seen) ++support[p];
  }
  return support;
}

inline std::map<Seq, std::size_t> frequent(const std::vector<Seq>& days, Gap gap, std::size_t max_len,
                                           std::size_t min_support) {
  auto all = all_supports(days, gap, max_len);
  std::map<Seq, std::size_t> out;
  for (auto& [p, s] : all)
    if (s >= min_support) out.emplace(p, s);
  return out;
}

// All embeddings of one pattern, as index lists.
inline std::vector<std::vector<std::size_t>> embeddings(const Seq& day, const Seq& pattern, Gap gap) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> cur;
  std::function<void(std::size_t)> rec = [&](std::size_t start) {
    if (cur.size() == pattern.size()) {
      if (gap_legal(cur, gap)) out.push_back(cur);
      return;
    }
    for (std::size_t i = start; i < day.size(); ++i) {
      if (day[i] != pattern[cur.size()]) continue;
      cur.push_back(i);
      rec(i + 1);
      cur.pop_back();
    }
  };
  if (!pattern.empty()) rec(0);
  return out;
}

// Largest number of embeddings whose index spans [first, last] are pairwise disjoint.
inline std::size_t max_disjoint_occurrences(const Seq& day, const Seq& pattern, Gap gap) {
  const auto embs = embeddings(day, pattern, gap);
  // best[p] = most embeddings using only positions >= p
  std::vector<std::size_t> best(day.size() + 2, 0);
  for (std::size_t p = day.size() + 1; p-- > 0;) {
    std::size_t b = p + 1 < best.size() ? best[p + 1] : 0;
    for (const auto& e : embs)
      if (e.front() >= p) b = std::max(b, 1 + best[e.back() + 1]);
    best[p] = b;
  }
  return best[0];
}

// Whether the chain of patterns can be embedded in order, each ending before the next begins.
inline bool chain_exists(const Seq& day, const std::vector<Seq>& chain, Gap gap) {
  std::vector<std::vector<std::vector<std::size_t>>> per;
  for (const auto& f : chain) per.push_back(embeddings(day, f, gap));
  std::function<bool(std::size_t, std::size_t)> rec = [&](std::size_t k, std::size_t from) {
    if (k == chain.size()) return true;
    for (const auto& e : per[k])
      if (e.front() >= from && rec(k + 1, e.back() + 1)) return true;
    return false;
  };
  return rec(0, 0);
}

// Type-7 quantile read off the piecewise-linear curve through (i/(n-1), x_(i)).
inline double quantile(std::vector<double> xs, double q) {
  std::sort(xs.begin(), xs.end());
  if (xs.size() == 1) return xs[0];
  const double step = 1.0 / static_cast<double>(xs.size() - 1);
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    const double p0 = step * static_cast<double>(i), p1 = step * static_cast<double>(i + 1);
    if (q <= p1 + 1e-15) {
      const double f = (q - p0) / (p1 - p0);
      return xs[i] + f * (xs[i + 1] - xs[i]);
    }
  }
  return xs.back();
}

// PAA by replicating each sample `segments` times and averaging blocks of n.
inline std::vector<double> paa(const std::vector<double>& x, std::size_t segments) {
  std::vector<double> up;
  for (double v : x)
    for (std::size_t r = 0; r < segments; ++r) up.push_back(v);
  std::vector<double> out(segments, 0.0);
  const std::size_t n = x.size();
  for (std::size_t j = 0; j < segments; ++j) {
    double s = 0.0;
    for (std::size_t i = j * n; i < (j + 1) * n; ++i) s += up[i];
    out[j] = s / static_cast<double>(n);
  }
  return out;
}

// Standard normal quantile by bisection on the CDF.
inline double normal_quantile(double p) {
  double lo = -10.0, hi = 10.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double cdf = 0.5 * std::erfc(-mid / std::sqrt(2.0));
    (cdf < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

inline std::vector<double> breakpoints(std::size_t alphabet) {
  std::vector<double> b;
  for (std::size_t i = 1; i < alphabet; ++i) b.push_back(normal_quantile(double(i) / double(alphabet)));
  return b;
}

inline char sax_letter(double v, std::size_t alphabet) {
  const auto b = breakpoints(alphabet);
  std::size_t s = 0;
  while (s < b.size() && v >= b[s]) ++s;
  return static_cast<char>('a' + s);
}

}  // namespace oracle

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "chronoseq/mining.hpp"

namespace chronoseq {

/// Selector for the part of a cohort day adjoining the focal chain. BETWEEN
/// carries a 0-based gap index: between(i) lies between focal i and focal i+1.
struct Region {
  enum class Kind { before, after, between };
  Kind kind = Kind::before;
  std::size_t index = 0;

  static Region before() { return {Kind::before, 0}; }
  static Region after() { return {Kind::after, 0}; }
  static Region between(std::size_t i) { return {Kind::between, i}; }

  /// `before`, `after` or `between:<i>`.
  std::string to_string() const;
  static std::optional<Region> parse(std::string_view text);

  /// Throws Error{validation} if the selector does not exist for a chain of `chain_length`.
  void validate(std::size_t chain_length) const;

  friend bool operator==(const Region&, const Region&) = default;
};

/// One occurrence per focal, strictly ordered: the last matched event of focal
/// i precedes the first matched event of focal i+1.
struct ChainAssignment {
  std::uint32_t day_index = 0;
  std::vector<std::vector<std::size_t>> focals;  // matched event indices per focal
};

/// Greedy chain assignment: each focal takes its earliest-ending legal
/// embedding after the previous focal. Earliest-end choice cannot block a
/// later focal, so this finds an assignment whenever one exists.
template <typename T>
std::optional<std::vector<std::vector<std::size_t>>> assign_chain(std::span<const T> seq,
                                                                  std::span<const std::vector<T>> chain,
                                                                  MaxGap max_gap) {
  std::vector<std::vector<std::size_t>> out;
  std::size_t from = 0;
  for (const auto& focal : chain) {
    auto emb = earliest_embedding(seq, std::span<const T>(focal), from, max_gap);
    if (!emb) return std::nullopt;
    from = emb->back() + 1;
    out.push_back(std::move(*emb));
  }
  return out;
}

/// Convenience overload on a day string and symbol-label patterns.
std::optional<std::vector<std::vector<std::size_t>>> assign_chain(const DayString& day,
                                                                  std::span<const std::vector<std::string>> chain,
                                                                  MaxGap max_gap);

/// Half-open event-index span [first, second) of a region within one day.
std::pair<std::size_t, std::size_t> region_span(const ChainAssignment& a, Region r, std::size_t day_size);

struct Timeline {
  std::string id;
  std::string run_id;
  std::vector<std::string> focal_chain;  // FrequentSequence ids
  std::vector<std::uint32_t> cohort;     // day indices into the run, ascending
  std::vector<ChainAssignment> assignments;  // parallel to cohort
  std::optional<std::string> parent_id;
  std::uint64_t version = 0;

  std::vector<DayKey> cohort_keys(const MiningRun& run) const;
};

struct CohortResult {
  std::vector<std::uint32_t> days;
  std::vector<ChainAssignment> assignments;
};

/// Days of the run holding a chain assignment. With `within`, only those days
/// are scanned. Unknown sequence ids throw Error{not_found}.
CohortResult compute_cohort(const MiningRun& run, std::span<const std::string> focal_chain,
                            std::optional<std::span<const std::uint32_t>> within = std::nullopt);

Timeline create_timeline(const MiningRun& run, std::string id, std::vector<std::string> focal_chain);

/// Inserts a focal at `position` (0..chain length). The cohort is recomputed
/// within the current cohort.
Timeline add_focal(const MiningRun& run, const Timeline& t, const std::string& sequence_id, std::size_t position);

/// Removes the focal at `position`; the cohort is recomputed against the full
/// run. Removing the only focal is rejected: the caller dissolves the timeline.
Timeline remove_focal(const MiningRun& run, const Timeline& t, std::size_t position);

Timeline clone_timeline(const Timeline& t, std::string new_id);

struct AdjacentSequence {
  std::string sequence_id;
  std::vector<std::string> symbols;
  std::size_t region_support = 0;
  std::size_t total_occurrences = 0;
  double mean_offset_s = 0.0;
  std::size_t rank = 0;  // 1-based
};

struct AdjacencyPage {
  std::vector<AdjacentSequence> items;
  std::size_t total = 0;
  std::size_t page = 0;
  std::size_t page_size = 0;
};

/// Region corpus: for each cohort day, the day's events inside the region span.
/// `offsets[i]` maps local index 0 of region day i back to the original day.
struct RegionCorpus {
  std::vector<DayString> days;
  std::vector<std::size_t> offsets;
};

RegionCorpus region_corpus(const MiningRun& run, const Timeline& t, Region r);

/// Every frequent sequence of the region corpus, mined with the run's
/// configuration (support resolved against cohort size), in rank order.
std::vector<AdjacentSequence> adjacent_all(const MiningRun& run, const Timeline& t, Region r);

/// One page of `adjacent_all`; `page` is 0-based.
AdjacencyPage adjacent(const MiningRun& run, const Timeline& t, Region r, std::size_t top_n = 10,
                       std::size_t page = 0);

struct SupportDelta {
  std::vector<std::string> pattern;
  std::size_t support_a = 0;
  std::size_t support_b = 0;
};

struct RegionDiff {
  Region selector;
  std::vector<std::vector<std::string>> only_a;
  std::vector<std::vector<std::string>> only_b;
  std::vector<SupportDelta> deltas;  // shared patterns whose support differs
};

struct ComparisonReport {
  std::size_t a_only = 0;
  std::size_t b_only = 0;
  std::size_t shared = 0;
  double jaccard = 1.0;
  std::vector<RegionDiff> regions;
};

/// Cohort overlap and per-region adjacency differences. Timelines from
/// different runs throw Error{validation}.
ComparisonReport compare_timelines(const MiningRun& run, const Timeline& a, const Timeline& b);

}  // namespace chronoseq

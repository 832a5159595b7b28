#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "chronoseq/events.hpp"
#include "chronoseq/matching.hpp"

namespace chronoseq {

/// Minimum support, either an absolute day count or a fraction of all days.
class SupportThreshold {
 public:
  static SupportThreshold absolute(std::int64_t days);
  static SupportThreshold fraction(double f);

  bool is_fraction() const { return is_fraction_; }
  double value() const { return value_; }

  /// Day count for a corpus of `n_days`; fractions round up, never below 1.
  std::size_t resolve(std::size_t n_days) const;

  friend bool operator==(const SupportThreshold&, const SupportThreshold&) = default;

 private:
  SupportThreshold(bool frac, double v) : is_fraction_(frac), value_(v) {}
  bool is_fraction_ = false;
  double value_ = 1.0;
};

struct MiningConfig {
  SupportThreshold min_support = SupportThreshold::fraction(0.2);
  MaxGap max_gap = 2;
  std::size_t max_len = 6;
  std::size_t min_len_display = 2;

  void validate() const;
};

enum class Quadrant { ordinary, habitual, rare, focusworthy };
std::string_view to_string(Quadrant q);

struct ScatterStats {
  std::size_t days_count = 0;
  double avg_per_day = 0.0;
  Quadrant quadrant = Quadrant::rare;
};

/// Quadrant boundaries: x at `x_mid` days, y at `y_mid` occurrences per day.
struct ScatterAxes {
  double x_mid = 0.0;
  double y_mid = 3.0;

  static ScatterAxes for_dataset(std::size_t total_days) { return {static_cast<double>(total_days) / 2.0, 3.0}; }
};

struct Occurrence {
  std::string participant_id;
  Date day;
  std::vector<std::size_t> event_indices;
  Instant start_time;  // start of the first matched event
  Instant end_time;    // end of the last matched event

  friend bool operator==(const Occurrence&, const Occurrence&) = default;
};

struct FrequentSequence {
  std::string id;
  std::vector<std::string> symbols;
  std::size_t support_days = 0;
  std::size_t total_occurrences = 0;
  std::vector<double> intra_offsets;       // mean seconds from occurrence start, per element
  std::vector<std::uint32_t> day_indices;  // supporting days, ascending
  ScatterStats scatter;
};

/// Content hash of a symbol list; equal patterns get equal ids in every run.
std::string pattern_id(std::span<const std::string> symbols);

/// Alphabet-coded view of a corpus of day strings.
struct EncodedCorpus {
  std::vector<std::string> alphabet;  // sorted labels
  std::vector<std::vector<std::uint32_t>> days;

  static EncodedCorpus build(std::span<const DayString> days);
  std::optional<std::uint32_t> code(std::string_view label) const;
};

/// Gap-constrained PrefixSpan. Returns every pattern of length <= max_len whose
/// support (days with >= 1 legal occurrence) meets the resolved threshold,
/// ordered by support descending then symbols lexicographically. Each result
/// carries repetitive-occurrence statistics and scatter coordinates against
/// `axes` (defaults to half the corpus days / 3 per day).
std::vector<FrequentSequence> mine(std::span<const DayString> days, const MiningConfig& cfg,
                                   std::optional<ScatterAxes> axes = std::nullopt);

/// Non-overlapping occurrences of `pattern` in a day, leftmost-greedy by
/// earliest end. Consecutive matched elements have at most max_gap events between them.
std::vector<Occurrence> find_occurrences(std::span<const std::string> pattern, const DayString& day,
                                         MaxGap max_gap);

/// Display set: sequences of length >= min_len_display that have no strict
/// prefix among the other displayed sequences. Returns indices into `sequences`.
std::vector<std::size_t> minimal_prefix_filter(std::span<const FrequentSequence> sequences,
                                               std::size_t min_len_display);

ScatterStats scatter_stats(std::size_t days_count, std::size_t total_occurrences, const ScatterAxes& axes);
ScatterStats scatter_stats(const FrequentSequence& seq, const ScatterAxes& axes);

/// A completed mining run over an immutable corpus.
struct MiningRun {
  std::string run_id;
  std::string derivation_id;
  MiningConfig config;
  std::shared_ptr<const std::vector<DayString>> days;
  EncodedCorpus corpus;
  std::vector<FrequentSequence> sequences;

  const FrequentSequence* find(std::string_view sequence_id) const;
  /// Occurrences of a run sequence across all its supporting days.
  std::vector<Occurrence> occurrences(const FrequentSequence& seq) const;
  void reindex();

 private:
  std::map<std::string, std::size_t, std::less<>> by_id_;
};

MiningRun make_run(std::string run_id, std::string derivation_id, std::shared_ptr<const std::vector<DayString>> days,
                   const MiningConfig& cfg);

}  // namespace chronoseq

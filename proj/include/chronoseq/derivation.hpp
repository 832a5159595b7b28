#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "chronoseq/events.hpp"
#include "chronoseq/samples.hpp"

namespace chronoseq {

struct DerivationConfig {
  std::int64_t interval_s = 300;
  std::int64_t gap_threshold_s = 3600;
  double low_quantile = 0.25;
  double high_quantile = 0.75;
  // Fixed stress cut points in normalized units; per-participant quantiles when unset.
  std::optional<double> stress_low;
  std::optional<double> stress_high;

  /// Throws Error{validation} when the configuration is inconsistent.
  void validate() const;
};

/// Quantile of sorted values by linear interpolation between order statistics
/// (h = (n-1)q, the "type 7" estimator). Requires a non-empty input.
double quantile_sorted(std::span<const double> sorted, double q);

struct NormalizedSeries {
  Series series;
  std::optional<std::string> warning;
};

/// Min-max scales a series to [0,1]. With `sentinel` set, matching values are
/// excluded from the statistics and pass through unchanged. A constant series
/// maps to zeros and carries a warning.
NormalizedSeries normalize_stream(const Series& series, std::optional<double> sentinel = std::nullopt);

struct LevelThresholds {
  double low = 0.0;
  double high = 0.0;
};

/// One interval_s-aligned window with a classified level.
struct LabeledInterval {
  std::string participant_id;
  Instant start;
  Instant end;
  Level activity = Level::none;
  StressLevel stress = StressLevel::none;
};

Level classify(double mean, const LevelThresholds& t);

/// Thresholds from the configured quantiles of the finite, non-sentinel values.
std::optional<LevelThresholds> quantile_thresholds(const Series& normalized, const DerivationConfig& cfg,
                                                   std::optional<double> sentinel = std::nullopt);

/// Labels every window that holds at least one activity sample. Inputs are
/// normalized series; `stress` may be null. Stress is `unknown` when the window
/// holds only sentinel (or no) stress samples and `masked` when activity is high.
std::vector<LabeledInterval> discretize(const std::string& participant, const Series& activity,
                                        const Series* stress, const DerivationConfig& cfg);

/// Merges runs of identical labels into events. A run breaks on a label change,
/// on a missing-data gap longer than gap_threshold_s, on a participant change or
/// at midnight. Input must be sorted by (participant, start).
std::vector<EventRecord> merge_intervals(std::span<const LabeledInterval> intervals,
                                         const DerivationConfig& cfg);

/// Runs of value 1 become SMOKE events lasting from the first sample to the last
/// sample plus one sample period. Runs also break at gaps above gap_threshold_s
/// and at midnight.
std::vector<EventRecord> derive_smoke_events(const std::string& participant, const Series& smoking,
                                             const DerivationConfig& cfg);

struct DerivationResult {
  std::vector<EventRecord> events;  // canonical order: participant, day, day order
  std::vector<DayString> days;
  std::vector<std::string> warnings;
};

/// Full pipeline over every participant (parallel per participant, deterministic output).
DerivationResult derive_events(const SampleTable& table, const DerivationConfig& cfg);

/// Orders events canonically: by participant, day, then in-day order.
void sort_events(std::vector<EventRecord>& events);

}  // namespace chronoseq

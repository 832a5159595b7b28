#pragma once

#include <compare>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "chronoseq/time.hpp"

namespace chronoseq {

enum class EventKind { activity_stress, smoke, motif };
enum class Level { none, low, high };
enum class StressLevel { none, low, high, unknown, masked };

std::string_view to_string(EventKind k);
std::string_view to_string(Level l);
std::string_view to_string(StressLevel l);
std::optional<EventKind> parse_event_kind(std::string_view s);
std::optional<Level> parse_level(std::string_view s);
std::optional<StressLevel> parse_stress_level(std::string_view s);

/// A discrete, labeled, time-bounded event. `activity`/`stress` are meaningful
/// for activity_stress events only, `motif_id` for motif events only.
struct EventRecord {
  std::string participant_id;
  Date day;
  Instant start;
  Instant end;
  EventKind kind = EventKind::activity_stress;
  Level activity = Level::none;
  StressLevel stress = StressLevel::none;
  std::string motif_id;

  std::int64_t duration_s() const { return (end - start).count(); }

  friend bool operator==(const EventRecord&, const EventRecord&) = default;
};

/// Canonical ordering inside a day: start, then kind name, then end, then motif id.
bool day_order_less(const EventRecord& a, const EventRecord& b);

/// Alphabet label of an event: `AS:<activity>/<stress>`, `SMOKE`, `MOTIF:<id>`.
/// Durations and clock times are not part of the symbol.
std::string event_symbol(const EventRecord& e);

/// Splits an interval [start, end) at every midnight it crosses.
std::vector<std::pair<Instant, Instant>> split_at_midnight(Instant start, Instant end);

struct DayKey {
  std::string participant_id;
  Date day;

  auto operator<=>(const DayKey&) const = default;
  bool operator==(const DayKey&) const = default;
};

/// Events of one participant's midnight-to-midnight day, in canonical order.
struct DayString {
  std::string participant_id;
  Date day;
  std::vector<EventRecord> events;

  DayKey key() const { return {participant_id, day}; }
  std::vector<std::string> symbols() const;
};

/// Groups events by (participant, day) and orders each day canonically.
/// Events must already be split at midnight. Output is sorted by key.
std::vector<DayString> segment_days(std::vector<EventRecord> events);

/// True when no two events of the same participant, kind (and motif id) overlap.
bool per_kind_non_overlapping(const std::vector<EventRecord>& events);

}  // namespace chronoseq

#include "chronoseq/events.hpp"

#include <algorithm>
#include <map>
#include <tuple>

namespace chronoseq {

std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::activity_stress: return "ACTIVITY_STRESS";
    case EventKind::smoke: return "SMOKE";
    case EventKind::motif: return "MOTIF";
  }
  return "ACTIVITY_STRESS";
}

std::string_view to_string(Level l) {
  switch (l) {
    case Level::none: return "none";
    case Level::low: return "low";
    case Level::high: return "high";
  }
  return "none";
}

std::string_view to_string(StressLevel l) {
  switch (l) {
    case StressLevel::none: return "none";
    case StressLevel::low: return "low";
    case StressLevel::high: return "high";
    case StressLevel::unknown: return "unknown";
    case StressLevel::masked: return "masked";
  }
  return "none";
}

std::optional<EventKind> parse_event_kind(std::string_view s) {
  for (auto k : {EventKind::activity_stress, EventKind::smoke, EventKind::motif})
    if (to_string(k) == s) return k;
  return std::nullopt;
}

std::optional<Level> parse_level(std::string_view s) {
  for (auto l : {Level::none, Level::low, Level::high})
    if (to_string(l) == s) return l;
  return std::nullopt;
}

std::optional<StressLevel> parse_stress_level(std::string_view s) {
  for (auto l : {StressLevel::none, StressLevel::low, StressLevel::high, StressLevel::unknown,
                 StressLevel::masked})
    if (to_string(l) == s) return l;
  return std::nullopt;
}

bool day_order_less(const EventRecord& a, const EventRecord& b) {
  return std::forward_as_tuple(a.start, to_string(a.kind), a.end, a.motif_id) <
         std::forward_as_tuple(b.start, to_string(b.kind), b.end, b.motif_id);
}

std::string event_symbol(const EventRecord& e) {
  switch (e.kind) {
    case EventKind::activity_stress:
      return "AS:" + std::string(to_string(e.activity)) + "/" + std::string(to_string(e.stress));
    case EventKind::smoke: return "SMOKE";
    case EventKind::motif: return "MOTIF:" + e.motif_id;
  }
  return {};
}

std::vector<std::pair<Instant, Instant>> split_at_midnight(Instant start, Instant end) {
  std::vector<std::pair<Instant, Instant>> parts;
  while (start < end) {
    const Instant cut = std::min(end, next_midnight(start));
    parts.emplace_back(start, cut);
    start = cut;
  }
  return parts;
}

std::vector<std::string> DayString::symbols() const {
  std::vector<std::string> out;
  out.reserve(events.size());
  for (const auto& e : events) out.push_back(event_symbol(e));
  return out;
}

std::vector<DayString> segment_days(std::vector<EventRecord> events) {
  std::map<DayKey, std::vector<EventRecord>> grouped;
  for (auto& e : events) {
    DayKey key{e.participant_id, e.day};
    grouped[std::move(key)].push_back(std::move(e));
  }
  std::vector<DayString> days;
  days.reserve(grouped.size());
  for (auto& [key, evs] : grouped) {
    std::sort(evs.begin(), evs.end(), day_order_less);
    days.push_back({key.participant_id, key.day, std::move(evs)});
  }
  return days;
}

bool per_kind_non_overlapping(const std::vector<EventRecord>& events) {
  using Key = std::tuple<std::string, EventKind, std::string>;
  std::map<Key, std::vector<std::pair<Instant, Instant>>> spans;
  for (const auto& e : events) spans[{e.participant_id, e.kind, e.motif_id}].emplace_back(e.start, e.end);
  for (auto& [_, v] : spans) {
    std::sort(v.begin(), v.end());
    for (std::size_t i = 1; i < v.size(); ++i)
      if (v[i].first < v[i - 1].second) return false;
  }
  return true;
}

}  // namespace chronoseq

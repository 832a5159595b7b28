#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace chronoseq {

/// UTC instant at second resolution.
using Instant = std::chrono::sys_seconds;
/// UTC calendar date.
using Date = std::chrono::sys_days;

constexpr std::int64_t kSecondsPerDay = 86400;

inline std::int64_t epoch_seconds(Instant t) { return t.time_since_epoch().count(); }
inline Instant from_epoch(std::int64_t s) { return Instant{std::chrono::seconds{s}}; }

inline Date day_of(Instant t) { return std::chrono::floor<std::chrono::days>(t); }
inline Instant midnight(Date d) { return Instant{d}; }
inline Instant next_midnight(Instant t) { return Instant{day_of(t) + std::chrono::days{1}}; }

/// Parses `2024-01-01T09:00:00Z` or integer epoch seconds.
std::optional<Instant> parse_timestamp(std::string_view text);
std::optional<Date> parse_date(std::string_view text);

std::string format_instant(Instant t);  // 2024-01-01T09:00:00Z
std::string format_date(Date d);        // 2024-01-01

}  // namespace chronoseq

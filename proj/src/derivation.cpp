#include "chronoseq/derivation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "chronoseq/error.hpp"

namespace chronoseq {
namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

bool is_sentinel(double v, std::optional<double> sentinel) { return sentinel && v == *sentinel; }

EventRecord make_event(const std::string& participant, Instant start, Instant end, EventKind kind) {
  EventRecord e;
  e.participant_id = participant;
  e.day = day_of(start);
  e.start = start;
  e.end = end;
  e.kind = kind;
  return e;
}

// Median spacing, ignoring gaps that count as sensor inactivity. Falls back to
// the timestamp resolution.
std::int64_t sample_period(const Series& s, std::int64_t gap_threshold_s) {
  std::vector<std::int64_t> d;
  for (std::size_t i = 1; i < s.size(); ++i)
    if (s.t[i] - s.t[i - 1] <= gap_threshold_s) d.push_back(s.t[i] - s.t[i - 1]);
  if (d.empty()) return 1;
  std::nth_element(d.begin(), d.begin() + d.size() / 2, d.end());
  return std::max<std::int64_t>(1, d[d.size() / 2]);
}

}  // namespace

void DerivationConfig::validate() const {
  if (interval_s <= 0) fail(ErrorCode::validation, "interval_s must be positive");
  if (kSecondsPerDay % interval_s != 0) fail(ErrorCode::validation, "interval_s must divide 86400");
  if (gap_threshold_s <= 0) fail(ErrorCode::validation, "gap_threshold_s must be positive");
  if (!(low_quantile > 0.0 && low_quantile < 1.0) || !(high_quantile > 0.0 && high_quantile < 1.0))
    fail(ErrorCode::validation, "quantiles must lie in (0,1)");
  if (!(low_quantile < high_quantile)) fail(ErrorCode::validation, "low_quantile must be below high_quantile");
  if (stress_low.has_value() != stress_high.has_value())
    fail(ErrorCode::validation, "stress_low and stress_high must be set together");
  if (stress_low && !(*stress_low < *stress_high))
    fail(ErrorCode::validation, "stress_low must be below stress_high");
}

double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) fail(ErrorCode::validation, "quantile of empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

NormalizedSeries normalize_stream(const Series& series, std::optional<double> sentinel) {
  NormalizedSeries out;
  out.series = series;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (double v : series.v) {
    if (is_sentinel(v, sentinel) || !std::isfinite(v)) continue;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const bool degenerate = !(hi > lo);
  if (degenerate && !series.empty()) out.warning = "constant stream: all values normalized to 0";
  for (double& v : out.series.v) {
    if (is_sentinel(v, sentinel) || !std::isfinite(v)) continue;
    v = degenerate ? 0.0 : (v - lo) / (hi - lo);
  }
  return out;
}

Level classify(double mean, const LevelThresholds& t) {
  if (mean < t.low) return Level::none;
  if (mean < t.high) return Level::low;
  return Level::high;
}

std::optional<LevelThresholds> quantile_thresholds(const Series& normalized, const DerivationConfig& cfg,
                                                   std::optional<double> sentinel) {
  std::vector<double> values;
  values.reserve(normalized.size());
  for (double v : normalized.v)
    if (!is_sentinel(v, sentinel) && std::isfinite(v)) values.push_back(v);
  if (values.empty()) return std::nullopt;
  std::sort(values.begin(), values.end());
  return LevelThresholds{quantile_sorted(values, cfg.low_quantile), quantile_sorted(values, cfg.high_quantile)};
}

std::vector<LabeledInterval> discretize(const std::string& participant, const Series& activity,
                                        const Series* stress, const DerivationConfig& cfg) {
  std::vector<LabeledInterval> out;
  const auto act_thr = quantile_thresholds(activity, cfg);
  if (!act_thr) return out;

  std::optional<LevelThresholds> stress_thr;
  if (cfg.stress_low) {
    stress_thr = LevelThresholds{*cfg.stress_low, *cfg.stress_high};
  } else if (stress) {
    stress_thr = quantile_thresholds(*stress, cfg, kStressUnavailable);
  }

  const std::int64_t w = cfg.interval_s;
  std::size_t si = 0;
  std::size_t i = 0;
  while (i < activity.size()) {
    const std::int64_t window = floor_div(activity.t[i], w);
    const std::int64_t begin = window * w;
    const std::int64_t end = begin + w;

    double sum = 0.0;
    std::size_t n = 0;
    for (; i < activity.size() && activity.t[i] < end; ++i) {
      sum += activity.v[i];
      ++n;
    }

    double ssum = 0.0;
    std::size_t sn = 0;
    if (stress) {
      while (si < stress->size() && stress->t[si] < begin) ++si;
      for (; si < stress->size() && stress->t[si] < end; ++si) {
        const double v = stress->v[si];
        if (v == kStressUnavailable) continue;
        ssum += v;
        ++sn;
      }
    }

    LabeledInterval iv;
    iv.participant_id = participant;
    iv.start = from_epoch(begin);
    iv.end = from_epoch(end);
    iv.activity = classify(sum / static_cast<double>(n), *act_thr);
    if (iv.activity == Level::high) {
      iv.stress = StressLevel::masked;
    } else if (sn == 0 || !stress_thr) {
      iv.stress = StressLevel::unknown;
    } else {
      switch (classify(ssum / static_cast<double>(sn), *stress_thr)) {
        case Level::none: iv.stress = StressLevel::none; break;
        case Level::low: iv.stress = StressLevel::low; break;
        case Level::high: iv.stress = StressLevel::high; break;
      }
    }
    out.push_back(std::move(iv));
  }
  return out;
}

std::vector<EventRecord> merge_intervals(std::span<const LabeledInterval> intervals,
                                         const DerivationConfig& cfg) {
  std::vector<EventRecord> out;
  for (const auto& iv : intervals) {
    if (!out.empty()) {
      auto& last = out.back();
      const bool joinable = last.participant_id == iv.participant_id && last.activity == iv.activity &&
                            last.stress == iv.stress && day_of(iv.start) == last.day &&
                            iv.start >= last.end && (iv.start - last.end).count() <= cfg.gap_threshold_s;
      if (joinable) {
        last.end = std::max(last.end, iv.end);
        continue;
      }
    }
    // Windows never straddle midnight, but re-fed events of any width might.
    for (auto [s, e] : split_at_midnight(iv.start, iv.end)) {
      EventRecord ev = make_event(iv.participant_id, s, e, EventKind::activity_stress);
      ev.activity = iv.activity;
      ev.stress = iv.stress;
      out.push_back(std::move(ev));
    }
  }
  return out;
}

std::vector<EventRecord> derive_smoke_events(const std::string& participant, const Series& smoking,
                                             const DerivationConfig& cfg) {
  std::vector<EventRecord> out;
  const std::int64_t period = sample_period(smoking, cfg.gap_threshold_s);
  std::size_t i = 0;
  while (i < smoking.size()) {
    if (smoking.v[i] != 1.0) {
      ++i;
      continue;
    }
    const std::int64_t first = smoking.t[i];
    std::int64_t last = first;
    ++i;
    while (i < smoking.size() && smoking.v[i] == 1.0 && smoking.t[i] - last <= cfg.gap_threshold_s) {
      last = smoking.t[i];
      ++i;
    }
    for (auto [s, e] : split_at_midnight(from_epoch(first), from_epoch(last + period)))
      out.push_back(make_event(participant, s, e, EventKind::smoke));
  }
  return out;
}

void sort_events(std::vector<EventRecord>& events) {
  std::sort(events.begin(), events.end(), [](const EventRecord& a, const EventRecord& b) {
    if (a.participant_id != b.participant_id) return a.participant_id < b.participant_id;
    if (a.day != b.day) return a.day < b.day;
    return day_order_less(a, b);
  });
}

DerivationResult derive_events(const SampleTable& table, const DerivationConfig& cfg) {
  cfg.validate();

  struct Work {
    const std::string* participant;
    const ParticipantStreams* streams;
    std::vector<EventRecord> events;
    std::vector<std::string> warnings;
  };
  std::vector<Work> work;
  for (const auto& [pid, per_stream] : table.participants()) work.push_back({&pid, &per_stream, {}, {}});

  auto run = [&cfg](Work& w) {
    const auto& pid = *w.participant;
    auto find = [&](std::string_view name) -> const Series* {
      auto it = w.streams->find(name);
      return it == w.streams->end() ? nullptr : &it->second;
    };
    if (const Series* act = find(streams::activity)) {
      auto norm_act = normalize_stream(*act);
      if (norm_act.warning) w.warnings.push_back(pid + "/activity: " + *norm_act.warning);
      std::optional<NormalizedSeries> norm_stress;
      if (const Series* st = find(streams::stress)) {
        norm_stress = normalize_stream(*st, kStressUnavailable);
        if (norm_stress->warning) w.warnings.push_back(pid + "/stress: " + *norm_stress->warning);
      }
      auto intervals = discretize(pid, norm_act.series, norm_stress ? &norm_stress->series : nullptr, cfg);
      w.events = merge_intervals(intervals, cfg);
    }
    if (const Series* sm = find(streams::smoking)) {
      auto smoke = derive_smoke_events(pid, *sm, cfg);
      w.events.insert(w.events.end(), smoke.begin(), smoke.end());
    }
    sort_events(w.events);
  };

  const unsigned threads = std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(),
                                                          static_cast<unsigned>(work.size())));
  std::atomic<std::size_t> next{0};
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t k = next++; k < work.size(); k = next++) run(work[k]);
      });
    }
  }

  DerivationResult result;
  for (auto& w : work) {
    result.events.insert(result.events.end(), std::make_move_iterator(w.events.begin()),
                         std::make_move_iterator(w.events.end()));
    result.warnings.insert(result.warnings.end(), w.warnings.begin(), w.warnings.end());
  }
  result.days = segment_days(result.events);
  return result;
}

}  // namespace chronoseq

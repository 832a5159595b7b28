#pragma once

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "chronoseq/events.hpp"
#include "chronoseq/samples.hpp"
#include "chronoseq/time.hpp"
#include "oracles/oracles.hpp"

namespace fx {

using namespace chronoseq;

// 2024-01-01T00:00:00Z
inline constexpr std::int64_t kDay0 = 1704067200;

inline EventRecord as_event(const std::string& pid, std::int64_t start, std::int64_t end, Level a, StressLevel s) {
  EventRecord e;
  e.participant_id = pid;
  e.start = from_epoch(start);
  e.end = from_epoch(end);
  e.day = day_of(e.start);
  e.kind = EventKind::activity_stress;
  e.activity = a;
  e.stress = s;
  return e;
}

// Small integer codes <-> distinct event labels, so corpora can be written as digits.
inline EventRecord coded_event(const std::string& pid, std::int64_t day_start, std::size_t pos, int code) {
  static const std::pair<Level, StressLevel> table[] = {
      {Level::none, StressLevel::none}, {Level::none, StressLevel::low}, {Level::low, StressLevel::low},
      {Level::low, StressLevel::high},  {Level::high, StressLevel::masked}};
  const std::int64_t s = day_start + static_cast<std::int64_t>(pos) * 600;
  if (code == 5) {
    EventRecord e = as_event(pid, s, s + 300, Level::none, StressLevel::none);
    e.kind = EventKind::smoke;
    return e;
  }
  auto [a, st] = table[code];
  return as_event(pid, s, s + 300, a, st);
}

inline std::string label_of(int code) {
  return event_symbol(coded_event("p", kDay0, 0, code));
}

inline std::map<std::string, int> label_codes() {
  std::map<std::string, int> m;
  for (int c = 0; c <= 5; ++c) m[label_of(c)] = c;
  return m;
}

inline std::vector<std::string> labels(const oracle::Seq& codes) {
  std::vector<std::string> out;
  for (int c : codes) out.push_back(label_of(c));
  return out;
}

inline oracle::Seq codes(const std::vector<std::string>& symbols) {
  static const auto m = label_codes();
  oracle::Seq out;
  for (const auto& s : symbols) out.push_back(m.at(s));
  return out;
}

// One DayString per sequence; participants cycle so keys stay unique.
inline std::vector<DayString> days_from_codes(const std::vector<oracle::Seq>& seqs) {
  std::vector<EventRecord> events;
  for (std::size_t d = 0; d < seqs.size(); ++d) {
    const std::string pid = "p" + std::to_string(d % 3);
    const std::int64_t day_start = kDay0 + static_cast<std::int64_t>(d / 3) * kSecondsPerDay;
    for (std::size_t i = 0; i < seqs[d].size(); ++i) events.push_back(coded_event(pid, day_start, i, seqs[d][i]));
  }
  auto days = segment_days(std::move(events));
  return days;
}

// segment_days sorts by key; this returns the code sequences in that same order.
inline std::vector<oracle::Seq> codes_of_days(const std::vector<DayString>& days) {
  std::vector<oracle::Seq> out;
  for (const auto& d : days) out.push_back(codes(d.symbols()));
  return out;
}

inline std::vector<oracle::Seq> random_corpus(std::mt19937_64& rng, std::size_t max_days = 10, int alphabet = 5,
                                              std::size_t max_events = 8) {
  std::uniform_int_distribution<std::size_t> nd(1, max_days), ne(1, max_events);
  std::uniform_int_distribution<int> sym(0, alphabet - 1);
  std::vector<oracle::Seq> out(nd(rng));
  for (auto& day : out) {
    day.resize(ne(rng));
    for (auto& c : day) c = sym(rng);
  }
  return out;
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag = "chronoseq") {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            (tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

// Constant-valued 1 Hz run [start, end) of one stream.
inline void fill(SampleTable& t, const std::string& pid, std::string_view stream, std::int64_t start,
                 std::int64_t end, double value) {
  for (std::int64_t s = start; s < end; ++s) t.add(pid, stream, s, value);
}

// Activity (and stress) at 1 Hz over `bouts` wear periods per day. Activity
// levels change every few minutes; stress is a probability with dropouts.
inline SampleTable synthetic_table(std::size_t participants, std::size_t days, std::size_t bouts,
                                   std::int64_t bout_s, std::uint64_t seed, bool with_smoking = false) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 0.05);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  SampleTable t;
  for (std::size_t p = 0; p < participants; ++p) {
    const std::string pid = "p" + std::to_string(p + 1000).substr(1);
    for (std::size_t d = 0; d < days; ++d) {
      const std::int64_t day = kDay0 + static_cast<std::int64_t>(d) * kSecondsPerDay;
      const std::int64_t spacing = kSecondsPerDay / static_cast<std::int64_t>(bouts + 1);
      for (std::size_t b = 0; b < bouts; ++b) {
        const std::int64_t start = day + spacing * static_cast<std::int64_t>(b + 1) - bout_s / 2;
        double level = u(rng), stress = u(rng);
        bool smoking = false;
        for (std::int64_t s = start; s < start + bout_s; ++s) {
          if ((s - start) % 420 == 0) {
            level = u(rng);
            stress = std::clamp(stress + noise(rng) * 6, 0.0, 1.0);
            smoking = with_smoking && u(rng) < 0.05;
          }
          t.add(pid, streams::activity, s, std::max(0.0, level + noise(rng)));
          const double sv = u(rng) < 0.02 ? kStressUnavailable : std::clamp(stress + noise(rng), 0.0, 1.0);
          t.add(pid, streams::stress, s, sv);
          if (with_smoking) t.add(pid, streams::smoking, s, smoking ? 1.0 : 0.0);
        }
      }
    }
  }
  t.finalize();
  return t;
}

struct Plant {
  std::string participant_id;
  int shape = 0;
  std::int64_t start = 0;
  std::int64_t end = 0;
};

struct PlantedData {
  SampleTable table;
  std::vector<Plant> plants;
};

// Unit-variance shapes over [0,1).
inline double shape_value(int shape, double x) {
  switch (shape) {
    case 0: return std::exp(-std::pow((x - 0.5) / 0.12, 2));   // bump
    case 1: return std::sin(2 * std::numbers::pi * x);          // cycle
    default: return x;                                           // ramp
  }
}

// White noise with `copies` of each of `shapes` planted at random, non-adjacent
// positions. snr is the variance ratio of planted signal to noise.
inline PlantedData planted_motifs(std::uint64_t seed, int shapes = 2, int copies = 3, double snr = 3.0,
                                  std::size_t participants = 3, std::int64_t length_s = 6 * 3600,
                                  std::int64_t window_s = 1800, const std::string& stream = "signal") {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);

  // Scale each shape to the requested variance over one window.
  std::vector<double> scale(shapes);
  for (int s = 0; s < shapes; ++s) {
    double m = 0, m2 = 0;
    for (std::int64_t i = 0; i < window_s; ++i) {
      const double v = shape_value(s, double(i) / double(window_s));
      m += v;
      m2 += v * v;
    }
    m /= double(window_s);
    const double var = m2 / double(window_s) - m * m;
    scale[s] = std::sqrt(snr / var);
  }

  PlantedData out;
  std::vector<std::vector<std::pair<std::int64_t, int>>> slots(participants);
  // Each plant gets a slot of 2 windows so copies never touch.
  const std::int64_t slot_len = 2 * window_s;
  const std::int64_t nslots = length_s / slot_len;
  std::vector<std::pair<std::size_t, std::int64_t>> all;
  for (std::size_t p = 0; p < participants; ++p)
    for (std::int64_t k = 0; k < nslots; ++k) all.emplace_back(p, k);
  std::shuffle(all.begin(), all.end(), rng);

  std::size_t next = 0;
  for (int s = 0; s < shapes; ++s) {
    for (int c = 0; c < copies; ++c) {
      auto [p, k] = all.at(next++);
      std::uniform_int_distribution<std::int64_t> jitter(0, slot_len - window_s);
      slots[p].emplace_back(k * slot_len + jitter(rng), s);
    }
  }

  for (std::size_t p = 0; p < participants; ++p) {
    const std::string pid = "m" + std::to_string(p);
    const std::int64_t t0 = kDay0 + 6 * 3600;
    std::vector<double> v(static_cast<std::size_t>(length_s));
    for (auto& x : v) x = noise(rng);
    for (auto [at, s] : slots[p]) {
      for (std::int64_t i = 0; i < window_s; ++i)
        v[static_cast<std::size_t>(at + i)] += scale[s] * shape_value(s, double(i) / double(window_s));
      out.plants.push_back({pid, s, t0 + at, t0 + at + window_s});
    }
    for (std::int64_t i = 0; i < length_s; ++i) out.table.add(pid, stream, t0 + i, v[static_cast<std::size_t>(i)]);
  }
  out.table.finalize();
  return out;
}

inline std::int64_t overlap(std::int64_t a0, std::int64_t a1, std::int64_t b0, std::int64_t b1) {
  return std::max<std::int64_t>(0, std::min(a1, b1) - std::max(a0, b0));
}

}  // namespace fx

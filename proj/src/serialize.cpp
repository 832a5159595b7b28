#include "chronoseq/serialize.hpp"

#include <cmath>

#include "chronoseq/error.hpp"

namespace chronoseq {
namespace {

template <typename T>
T get_field(const json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    fail(ErrorCode::validation, std::string("field '") + key + "' has the wrong type");
  }
}

std::string require_string(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_string()) fail(ErrorCode::validation, std::string("missing field '") + key + "'");
  return j.at(key).get<std::string>();
}

Instant require_instant(const json& j, const char* key) {
  auto t = parse_timestamp(require_string(j, key));
  if (!t) fail(ErrorCode::validation, std::string("bad timestamp in '") + key + "'");
  return *t;
}

void reject_unknown(const json& j, std::initializer_list<std::string_view> known) {
  if (!j.is_object()) fail(ErrorCode::validation, "configuration must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (auto k : known) ok = ok || key == k;
    if (!ok) fail(ErrorCode::validation, "unknown configuration key '" + key + "'");
  }
}

}  // namespace

json to_json(const EventRecord& e) {
  json j{{"participant_id", e.participant_id},
         {"day", format_date(e.day)},
         {"start", format_instant(e.start)},
         {"end", format_instant(e.end)},
         {"kind", to_string(e.kind)}};
  if (e.kind == EventKind::activity_stress) {
    j["activity_level"] = to_string(e.activity);
    j["stress_level"] = to_string(e.stress);
  }
  if (e.kind == EventKind::motif) j["motif_id"] = e.motif_id;
  return j;
}

EventRecord event_from_json(const json& j) {
  EventRecord e;
  e.participant_id = require_string(j, "participant_id");
  auto day = parse_date(require_string(j, "day"));
  if (!day) fail(ErrorCode::validation, "bad day");
  e.day = *day;
  e.start = require_instant(j, "start");
  e.end = require_instant(j, "end");
  auto kind = parse_event_kind(require_string(j, "kind"));
  if (!kind) fail(ErrorCode::validation, "bad event kind");
  e.kind = *kind;
  if (e.kind == EventKind::activity_stress) {
    auto a = parse_level(require_string(j, "activity_level"));
    auto s = parse_stress_level(require_string(j, "stress_level"));
    if (!a || !s) fail(ErrorCode::validation, "bad event level");
    e.activity = *a;
    e.stress = *s;
  }
  if (e.kind == EventKind::motif) e.motif_id = require_string(j, "motif_id");
  return e;
}

json to_json(const DerivationConfig& c) {
  json j{{"interval_s", c.interval_s},
         {"gap_threshold_s", c.gap_threshold_s},
         {"low_quantile", c.low_quantile},
         {"high_quantile", c.high_quantile}};
  if (c.stress_low) j["stress_low"] = *c.stress_low;
  if (c.stress_high) j["stress_high"] = *c.stress_high;
  return j;
}

DerivationConfig derivation_config_from_json(const json& j) {
  reject_unknown(j, {"interval_s", "gap_threshold_s", "low_quantile", "high_quantile", "stress_low", "stress_high"});
  DerivationConfig c;
  c.interval_s = get_field<std::int64_t>(j, "interval_s", c.interval_s);
  c.gap_threshold_s = get_field<std::int64_t>(j, "gap_threshold_s", c.gap_threshold_s);
  c.low_quantile = get_field<double>(j, "low_quantile", c.low_quantile);
  c.high_quantile = get_field<double>(j, "high_quantile", c.high_quantile);
  if (j.contains("stress_low")) c.stress_low = get_field<double>(j, "stress_low", 0.0);
  if (j.contains("stress_high")) c.stress_high = get_field<double>(j, "stress_high", 1.0);
  c.validate();
  return c;
}

json to_json(const MiningConfig& c) {
  json j{{"max_len", c.max_len}, {"min_len_display", c.min_len_display}};
  j["max_gap"] = c.max_gap ? json(*c.max_gap) : json("unbounded");
  if (c.min_support.is_fraction()) {
    j["min_support"] = c.min_support.value();
  } else {
    j["min_support"] = static_cast<std::int64_t>(c.min_support.value());
  }
  return j;
}

MiningConfig mining_config_from_json(const json& j) {
  reject_unknown(j, {"min_support", "max_gap", "max_len", "min_len_display"});
  MiningConfig c;
  if (j.contains("min_support")) {
    const auto& ms = j.at("min_support");
    // Integers are day counts, reals in (0,1] are fractions of all days.
    if (ms.is_number_integer() || ms.is_number_unsigned()) {
      c.min_support = SupportThreshold::absolute(ms.get<std::int64_t>());
    } else if (ms.is_number_float()) {
      const double v = ms.get<double>();
      if (v > 1.0 && v == std::floor(v)) {
        c.min_support = SupportThreshold::absolute(static_cast<std::int64_t>(v));
      } else {
        c.min_support = SupportThreshold::fraction(v);
      }
    } else {
      fail(ErrorCode::validation, "min_support must be a number");
    }
  }
  if (j.contains("max_gap")) {
    const auto& g = j.at("max_gap");
    if (g.is_string() && g.get<std::string>() == "unbounded") {
      c.max_gap = std::nullopt;
    } else if (g.is_number_integer() && g.get<std::int64_t>() >= 0) {
      c.max_gap = g.get<std::size_t>();
    } else {
      fail(ErrorCode::validation, "max_gap must be a non-negative integer or \"unbounded\"");
    }
  }
  const auto max_len = get_field<std::int64_t>(j, "max_len", static_cast<std::int64_t>(c.max_len));
  const auto min_disp = get_field<std::int64_t>(j, "min_len_display", static_cast<std::int64_t>(c.min_len_display));
  if (max_len < 1) fail(ErrorCode::validation, "max_len must be >= 1");
  if (min_disp < 1) fail(ErrorCode::validation, "min_len_display must be >= 1");
  c.max_len = static_cast<std::size_t>(max_len);
  c.min_len_display = static_cast<std::size_t>(min_disp);
  return c;
}

json to_json(const MotifConfig& c) {
  json j{{"stream", c.stream},       {"window_s", c.window_s}, {"stride_s", c.stride()},
         {"paa_segments", c.paa_segments}, {"sax_alphabet", c.sax_alphabet}, {"k", c.k},
         {"seed", c.seed},           {"match_threshold", c.match_threshold}};
  return j;
}

MotifConfig motif_config_from_json(const json& j) {
  reject_unknown(j, {"stream", "window_s", "stride_s", "paa_segments", "sax_alphabet", "k", "seed", "match_threshold"});
  MotifConfig c;
  c.stream = get_field<std::string>(j, "stream", c.stream);
  c.window_s = get_field<std::int64_t>(j, "window_s", c.window_s);
  if (j.contains("stride_s")) c.stride_s = get_field<std::int64_t>(j, "stride_s", c.stride());
  const auto segs = get_field<std::int64_t>(j, "paa_segments", static_cast<std::int64_t>(c.paa_segments));
  const auto alpha = get_field<std::int64_t>(j, "sax_alphabet", static_cast<std::int64_t>(c.sax_alphabet));
  const auto k = get_field<std::int64_t>(j, "k", static_cast<std::int64_t>(c.k));
  if (segs < 1 || alpha < 1 || k < 1) fail(ErrorCode::validation, "paa_segments, sax_alphabet and k must be positive");
  c.paa_segments = static_cast<std::size_t>(segs);
  c.sax_alphabet = static_cast<std::size_t>(alpha);
  c.k = static_cast<std::size_t>(k);
  c.seed = get_field<std::uint64_t>(j, "seed", c.seed);
  c.match_threshold = get_field<double>(j, "match_threshold", c.match_threshold);
  c.validate();
  return c;
}

json to_json(const IngestReport& r) {
  json rejected = json::array();
  for (const auto& row : r.rejected) rejected.push_back({{"line", row.line}, {"reason", row.reason}});
  return {{"rows", r.rows},
          {"accepted", r.accepted},
          {"rejected", r.rejected.size()},
          {"rejected_rows", rejected},
          {"duplicates", r.duplicates},
          {"participants", r.participants.size()},
          {"participant_ids", r.participants}};
}

json to_json(const Occurrence& o) {
  return {{"participant_id", o.participant_id},
          {"day", format_date(o.day)},
          {"event_indices", o.event_indices},
          {"start_time", format_instant(o.start_time)},
          {"end_time", format_instant(o.end_time)}};
}

Occurrence occurrence_from_json(const json& j) {
  Occurrence o;
  o.participant_id = require_string(j, "participant_id");
  auto day = parse_date(require_string(j, "day"));
  if (!day) fail(ErrorCode::validation, "bad day");
  o.day = *day;
  o.event_indices = j.at("event_indices").get<std::vector<std::size_t>>();
  o.start_time = require_instant(j, "start_time");
  o.end_time = require_instant(j, "end_time");
  return o;
}

json to_json(const ScatterStats& s) {
  return {{"x", s.days_count}, {"y", s.avg_per_day}, {"quadrant", to_string(s.quadrant)}};
}

json to_json(const FrequentSequence& s) {
  return {{"id", s.id},
          {"symbols", s.symbols},
          {"support_days", s.support_days},
          {"total_occurrences", s.total_occurrences},
          {"intra_offsets", s.intra_offsets},
          {"day_indices", s.day_indices},
          {"scatter", to_json(s.scatter)}};
}

FrequentSequence sequence_from_json(const json& j) {
  FrequentSequence s;
  s.id = j.at("id").get<std::string>();
  s.symbols = j.at("symbols").get<std::vector<std::string>>();
  s.support_days = j.at("support_days").get<std::size_t>();
  s.total_occurrences = j.at("total_occurrences").get<std::size_t>();
  s.intra_offsets = j.at("intra_offsets").get<std::vector<double>>();
  s.day_indices = j.at("day_indices").get<std::vector<std::uint32_t>>();
  const auto& sc = j.at("scatter");
  s.scatter.days_count = sc.at("x").get<std::size_t>();
  s.scatter.avg_per_day = sc.at("y").get<double>();
  const auto q = sc.at("quadrant").get<std::string>();
  for (auto cand : {Quadrant::ordinary, Quadrant::habitual, Quadrant::rare, Quadrant::focusworthy})
    if (to_string(cand) == q) s.scatter.quadrant = cand;
  return s;
}

json to_json(const DayString& d) {
  json events = json::array();
  for (const auto& e : d.events) {
    json ej = to_json(e);
    ej["symbol"] = event_symbol(e);
    events.push_back(std::move(ej));
  }
  return {{"participant_id", d.participant_id}, {"day", format_date(d.day)}, {"events", std::move(events)}};
}

json to_json(const MotifOccurrence& o) {
  return {{"participant_id", o.participant_id},
          {"start", format_instant(o.start)},
          {"end", format_instant(o.end)},
          {"distance", o.distance}};
}

MotifOccurrence motif_occurrence_from_json(const json& j) {
  return {require_string(j, "participant_id"), require_instant(j, "start"), require_instant(j, "end"),
          j.at("distance").get<double>()};
}

json to_json(const AdjacentSequence& a) {
  return {{"sequence_id", a.sequence_id},
          {"symbols", a.symbols},
          {"region_support", a.region_support},
          {"total_occurrences", a.total_occurrences},
          {"mean_offset_s", a.mean_offset_s},
          {"rank", a.rank}};
}

json to_json(const AdjacencyPage& p) {
  json items = json::array();
  for (const auto& a : p.items) items.push_back(to_json(a));
  return {{"items", std::move(items)}, {"total", p.total}, {"page", p.page}, {"page_size", p.page_size}};
}

json to_json(const ComparisonReport& r) {
  json regions = json::array();
  for (const auto& d : r.regions) {
    json deltas = json::array();
    for (const auto& x : d.deltas)
      deltas.push_back({{"pattern", x.pattern}, {"support_a", x.support_a}, {"support_b", x.support_b}});
    regions.push_back(
        {{"selector", d.selector.to_string()}, {"only_a", d.only_a}, {"only_b", d.only_b}, {"deltas", deltas}});
  }
  return {{"cohort", {{"a_only", r.a_only}, {"b_only", r.b_only}, {"shared", r.shared}, {"jaccard", r.jaccard}}},
          {"regions", std::move(regions)}};
}

json to_json(const Timeline& t, const MiningRun& run) {
  json cohort = json::array();
  for (const auto& k : t.cohort_keys(run))
    cohort.push_back({{"participant_id", k.participant_id}, {"day", format_date(k.day)}});
  json j{{"id", t.id},
         {"run_id", t.run_id},
         {"focal_chain", t.focal_chain},
         {"cohort_size", t.cohort.size()},
         {"cohort", std::move(cohort)},
         {"version", t.version}};
  j["parent_id"] = t.parent_id ? json(*t.parent_id) : json(nullptr);
  return j;
}

}  // namespace chronoseq

#include "chronoseq/samples.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

#include "chronoseq/error.hpp"

namespace chronoseq {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool parse_double(std::string_view s, double& out) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size() && std::isfinite(out);
}

// Splits on commas; returns false if the field count is not exactly four.
bool split4(std::string_view line, std::string_view (&fields)[4]) {
  std::size_t n = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      if (n == 4) return false;
      fields[n++] = trim(line.substr(start, i - start));
      start = i + 1;
    }
  }
  return n == 4;
}

}  // namespace

void SampleTable::add(const SensorSample& s) {
  add(s.participant_id, s.stream, epoch_seconds(s.timestamp), s.value);
}

void SampleTable::add(std::string_view participant, std::string_view stream, std::int64_t ts,
                      double value) {
  auto pit = data_.find(participant);
  if (pit == data_.end()) pit = data_.emplace(std::string(participant), ParticipantStreams{}).first;
  auto sit = pit->second.find(stream);
  if (sit == pit->second.end()) sit = pit->second.emplace(std::string(stream), Series{}).first;
  sit->second.push_back(ts, value);
}

std::size_t SampleTable::finalize() {
  std::size_t dropped = 0;
  for (auto& [pid, per_stream] : data_) {
    for (auto& [name, series] : per_stream) {
      const bool sorted = std::is_sorted(series.t.begin(), series.t.end());
      if (!sorted) {
        std::vector<std::size_t> order(series.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return series.t[a] < series.t[b]; });
        Series s;
        s.t.reserve(order.size());
        s.v.reserve(order.size());
        for (auto i : order) s.push_back(series.t[i], series.v[i]);
        series = std::move(s);
      }
      std::size_t w = 0;
      for (std::size_t r = 0; r < series.size(); ++r) {
        if (w > 0 && series.t[r] == series.t[w - 1]) {
          ++dropped;
          continue;
        }
        series.t[w] = series.t[r];
        series.v[w] = series.v[r];
        ++w;
      }
      series.t.resize(w);
      series.v.resize(w);
    }
  }
  return dropped;
}

const Series* SampleTable::find(std::string_view participant, std::string_view stream) const {
  auto pit = data_.find(participant);
  if (pit == data_.end()) return nullptr;
  auto sit = pit->second.find(stream);
  return sit == pit->second.end() ? nullptr : &sit->second;
}

std::vector<std::string> SampleTable::participant_ids() const {
  std::vector<std::string> ids;
  ids.reserve(data_.size());
  for (const auto& [pid, _] : data_) ids.push_back(pid);
  return ids;
}

std::size_t SampleTable::sample_count() const {
  std::size_t n = 0;
  for (const auto& [_, per_stream] : data_)
    for (const auto& [__, s] : per_stream) n += s.size();
  return n;
}

std::map<std::string, std::size_t> SampleTable::counts_per_stream() const {
  std::map<std::string, std::size_t> out;
  for (const auto& [_, per_stream] : data_)
    for (const auto& [name, s] : per_stream) out[name] += s.size();
  return out;
}

IngestResult ingest_csv(std::string_view csv) {
  if (trim(csv).empty()) fail(ErrorCode::validation, "empty CSV source");

  IngestResult result;
  auto& report = result.report;

  std::size_t pos = 0;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (pos < csv.size()) {
    std::size_t eol = csv.find('\n', pos);
    if (eol == std::string_view::npos) eol = csv.size();
    std::string_view line = trim(csv.substr(pos, eol - pos));
    pos = eol + 1;
    ++line_no;

    if (!header_seen) {
      if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.remove_prefix(3);  // BOM
      std::string_view h[4];
      if (!split4(line, h) || h[0] != "participant_id" || h[1] != "stream" || h[2] != "timestamp" ||
          h[3] != "value") {
        fail(ErrorCode::validation, "CSV header must be participant_id,stream,timestamp,value");
      }
      header_seen = true;
      continue;
    }
    if (line.empty()) continue;
    ++report.rows;

    std::string_view f[4];
    if (!split4(line, f)) {
      report.rejected.push_back({line_no, "expected 4 fields"});
      continue;
    }
    if (f[0].empty()) {
      report.rejected.push_back({line_no, "empty participant_id"});
      continue;
    }
    if (f[1].empty()) {
      report.rejected.push_back({line_no, "empty stream"});
      continue;
    }
    auto ts = parse_timestamp(f[2]);
    if (!ts) {
      report.rejected.push_back({line_no, "bad timestamp"});
      continue;
    }
    double value = 0.0;
    if (!parse_double(f[3], value)) {
      report.rejected.push_back({line_no, "non-numeric value"});
      continue;
    }
    if (f[1] == streams::stress && value != kStressUnavailable && (value < 0.0 || value > 1.0)) {
      report.rejected.push_back({line_no, "stress value outside [0,1] and not -1"});
      continue;
    }
    if (f[1] == streams::smoking && value != 0.0 && value != 1.0) {
      report.rejected.push_back({line_no, "smoking value not 0 or 1"});
      continue;
    }
    result.table.add(f[0], f[1], epoch_seconds(*ts), value);
    ++report.accepted;
  }
  if (!header_seen) fail(ErrorCode::validation, "CSV header missing");
  if (report.rows == 0) fail(ErrorCode::validation, "CSV contains no data rows");

  report.duplicates = result.table.finalize();
  report.accepted -= report.duplicates;
  report.participants = result.table.participant_ids();
  return result;
}

std::string to_csv(const SampleTable& table) {
  std::string out = "participant_id,stream,timestamp,value\n";
  char buf[64];
  for (const auto& [pid, per_stream] : table.participants()) {
    for (const auto& [name, s] : per_stream) {
      for (std::size_t i = 0; i < s.size(); ++i) {
        out += pid;
        out += ',';
        out += name;
        out += ',';
        auto r = std::to_chars(buf, buf + sizeof buf, s.t[i]);
        out.append(buf, r.ptr);
        out += ',';
        r = std::to_chars(buf, buf + sizeof buf, s.v[i]);
        out.append(buf, r.ptr);
        out += '\n';
      }
    }
  }
  return out;
}

}  // namespace chronoseq

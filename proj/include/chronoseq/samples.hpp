#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "chronoseq/time.hpp"

namespace chronoseq {

namespace streams {
inline constexpr std::string_view activity = "activity";
inline constexpr std::string_view stress = "stress";
inline constexpr std::string_view smoking = "smoking";
}  // namespace streams

/// Stress value meaning "no inference available".
inline constexpr double kStressUnavailable = -1.0;

struct SensorSample {
  std::string participant_id;
  std::string stream;
  Instant timestamp;
  double value = 0.0;
};

/// Column-oriented samples of one (participant, stream), strictly increasing in time.
struct Series {
  std::vector<std::int64_t> t;  // epoch seconds
  std::vector<double> v;

  std::size_t size() const { return t.size(); }
  bool empty() const { return t.empty(); }
  void push_back(std::int64_t ts, double value) {
    t.push_back(ts);
    v.push_back(value);
  }
};

using ParticipantStreams = std::map<std::string, Series, std::less<>>;

/// All samples of a dataset, keyed participant -> stream.
class SampleTable {
 public:
  void add(const SensorSample& s);
  void add(std::string_view participant, std::string_view stream, std::int64_t ts, double value);

  /// Sorts every series by time and drops repeated timestamps (first row wins).
  /// Returns the number of dropped duplicates.
  std::size_t finalize();

  const std::map<std::string, ParticipantStreams, std::less<>>& participants() const { return data_; }
  const Series* find(std::string_view participant, std::string_view stream) const;

  std::vector<std::string> participant_ids() const;
  std::size_t sample_count() const;
  std::map<std::string, std::size_t> counts_per_stream() const;

 private:
  std::map<std::string, ParticipantStreams, std::less<>> data_;
};

struct RejectedRow {
  std::size_t line = 0;  // 1-based, header is line 1
  std::string reason;
};

struct IngestReport {
  std::size_t rows = 0;  // data rows seen
  std::size_t accepted = 0;
  std::vector<RejectedRow> rejected;
  std::size_t duplicates = 0;
  std::vector<std::string> participants;
};

struct IngestResult {
  SampleTable table;
  IngestReport report;
};

/// Parses `participant_id,stream,timestamp,value` CSV text. Malformed rows are
/// rejected and reported; an empty source or a missing header throws.
IngestResult ingest_csv(std::string_view csv);

/// Writes a table back to CSV in canonical (participant, stream, time) order.
std::string to_csv(const SampleTable& table);

}  // namespace chronoseq

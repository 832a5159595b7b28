#pragma once

#include <json.hpp>

#include "chronoseq/alignment.hpp"
#include "chronoseq/derivation.hpp"
#include "chronoseq/mining.hpp"
#include "chronoseq/motif.hpp"
#include "chronoseq/samples.hpp"

namespace chronoseq {

using json = nlohmann::json;

json to_json(const EventRecord& e);
EventRecord event_from_json(const json& j);

json to_json(const DerivationConfig& c);
/// Missing keys keep their defaults; unknown or ill-typed values throw Error{validation}.
DerivationConfig derivation_config_from_json(const json& j);

json to_json(const MiningConfig& c);
MiningConfig mining_config_from_json(const json& j);

json to_json(const MotifConfig& c);
MotifConfig motif_config_from_json(const json& j);

json to_json(const IngestReport& r);
json to_json(const Occurrence& o);
Occurrence occurrence_from_json(const json& j);
json to_json(const ScatterStats& s);
json to_json(const FrequentSequence& s);
FrequentSequence sequence_from_json(const json& j);
json to_json(const DayString& d);
json to_json(const MotifOccurrence& o);
MotifOccurrence motif_occurrence_from_json(const json& j);
json to_json(const AdjacentSequence& a);
json to_json(const AdjacencyPage& p);
json to_json(const ComparisonReport& r);
json to_json(const Timeline& t, const MiningRun& run);

/// One compact JSON document per line, each terminated by '\n'.
template <typename Range, typename Fn>
std::string to_json_lines(const Range& items, Fn&& convert) {
  std::string out;
  for (const auto& item : items) {
    out += convert(item).dump();
    out += '\n';
  }
  return out;
}

}  // namespace chronoseq

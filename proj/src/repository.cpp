#include "chronoseq/repository.hpp"

#include <algorithm>

#include "chronoseq/error.hpp"
#include "chronoseq/hash.hpp"
#include "chronoseq/serialize.hpp"

namespace chronoseq {

std::string dataset_address(std::string_view csv) { return content_id(csv); }

std::string derivation_address(std::string_view dataset_id, const DerivationConfig& cfg) {
  return content_id("derive|" + std::string(dataset_id) + "|" + to_json(cfg).dump());
}

std::string promotion_address(std::string_view base_derivation_id, std::string_view motif_id) {
  return content_id("promote|" + std::string(base_derivation_id) + "|" + std::string(motif_id));
}

std::string run_address(std::string_view derivation_id, const MiningConfig& cfg) {
  return content_id("mine|" + std::string(derivation_id) + "|" + to_json(cfg).dump());
}

std::string motif_run_address(std::string_view dataset_id, const MotifConfig& cfg) {
  return content_id("motif|" + std::string(dataset_id) + "|" + to_json(cfg).dump());
}

std::string serialize_derivation(const Derivation& d) {
  json head{{"derivation_id", d.derivation_id},
            {"dataset_id", d.dataset_id},
            {"config", to_json(d.config)},
            {"promoted_motifs", d.promoted_motifs},
            {"warnings", d.warnings},
            {"event_count", d.events.size()}};
  head["base_derivation"] = d.base_derivation ? json(*d.base_derivation) : json(nullptr);
  std::string out = head.dump();
  out += '\n';
  out += to_json_lines(d.events, [](const EventRecord& e) { return to_json(e); });
  return out;
}

Derivation parse_derivation(std::string_view payload) {
  Derivation d;
  std::size_t pos = 0;
  bool first = true;
  try {
    while (pos < payload.size()) {
      std::size_t nl = payload.find('\n', pos);
      if (nl == std::string_view::npos) nl = payload.size();
      const auto line = payload.substr(pos, nl - pos);
      pos = nl + 1;
      if (line.empty()) continue;
      const json j = json::parse(line);
      if (first) {
        d.derivation_id = j.at("derivation_id").get<std::string>();
        d.dataset_id = j.at("dataset_id").get<std::string>();
        d.config = derivation_config_from_json(j.at("config"));
        d.promoted_motifs = j.at("promoted_motifs").get<std::vector<std::string>>();
        d.warnings = j.at("warnings").get<std::vector<std::string>>();
        if (!j.at("base_derivation").is_null()) d.base_derivation = j.at("base_derivation").get<std::string>();
        d.events.reserve(j.at("event_count").get<std::size_t>());
        first = false;
      } else {
        d.events.push_back(event_from_json(j));
      }
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::checksum, std::string("malformed derivation artifact: ") + e.what());
  }
  d.days = std::make_shared<const std::vector<DayString>>(segment_days(d.events));
  return d;
}

std::string serialize_run(const MiningRun& run) {
  json seqs = json::array();
  for (const auto& s : run.sequences) seqs.push_back(to_json(s));
  json doc{{"run_id", run.run_id},
           {"derivation_id", run.derivation_id},
           {"config", to_json(run.config)},
           {"total_days", run.days ? run.days->size() : 0},
           {"sequences", std::move(seqs)}};
  return doc.dump();
}

MiningRun parse_run(std::string_view payload, std::shared_ptr<const std::vector<DayString>> days) {
  MiningRun run;
  try {
    const json doc = json::parse(payload);
    run.run_id = doc.at("run_id").get<std::string>();
    run.derivation_id = doc.at("derivation_id").get<std::string>();
    run.config = mining_config_from_json(doc.at("config"));
    for (const auto& s : doc.at("sequences")) run.sequences.push_back(sequence_from_json(s));
  } catch (const json::exception& e) {
    fail(ErrorCode::checksum, std::string("malformed run artifact: ") + e.what());
  }
  run.days = std::move(days);
  run.corpus = EncodedCorpus::build(*run.days);
  run.reindex();
  return run;
}

std::string serialize_motif_run(const MotifRun& run) {
  json motifs = json::array();
  for (const auto& m : run.motifs) {
    json occ = json::array();
    for (const auto& o : m.occurrences) occ.push_back(to_json(o));
    motifs.push_back({{"motif_id", m.motif_id},
                      {"sax_word", m.sax_word},
                      {"centroid", std::vector<double>(m.centroid.data(), m.centroid.data() + m.centroid.size())},
                      {"member_count", m.member_count},
                      {"occurrence_count", m.occurrences.size()},
                      {"occurrences", std::move(occ)}});
  }
  json doc{{"motif_run_id", run.motif_run_id},
           {"dataset_id", run.dataset_id},
           {"config", to_json(run.config)},
           {"objective", run.clustering.objective},
           {"iterations", run.clustering.iterations},
           {"motifs", std::move(motifs)}};
  return doc.dump();
}

MotifRun parse_motif_run(std::string_view payload) {
  MotifRun run;
  try {
    const json doc = json::parse(payload);
    run.motif_run_id = doc.at("motif_run_id").get<std::string>();
    run.dataset_id = doc.at("dataset_id").get<std::string>();
    run.config = motif_config_from_json(doc.at("config"));
    run.clustering.objective = doc.at("objective").get<std::vector<double>>();
    run.clustering.iterations = doc.at("iterations").get<std::size_t>();
    const auto& motifs = doc.at("motifs");
    run.clustering.centroids.resize(static_cast<Eigen::Index>(motifs.size()),
                                    static_cast<Eigen::Index>(run.config.paa_segments));
    Eigen::Index row = 0;
    for (const auto& mj : motifs) {
      Motif m;
      m.motif_id = mj.at("motif_id").get<std::string>();
      m.sax_word = mj.at("sax_word").get<std::string>();
      const auto c = mj.at("centroid").get<std::vector<double>>();
      m.centroid = Eigen::Map<const Eigen::VectorXd>(c.data(), static_cast<Eigen::Index>(c.size()));
      m.member_count = mj.at("member_count").get<std::size_t>();
      for (const auto& o : mj.at("occurrences")) m.occurrences.push_back(motif_occurrence_from_json(o));
      if (m.centroid.size() == run.clustering.centroids.cols()) run.clustering.centroids.row(row) = m.centroid.transpose();
      ++row;
      run.motifs.push_back(std::move(m));
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::checksum, std::string("malformed motif run artifact: ") + e.what());
  }
  return run;
}

Repository::Repository(std::filesystem::path root) : store_(std::move(root)) {}

void Repository::set_head(std::string_view kind, const std::string& id) {
  store_.update_index([&](json& index) { index["head"][std::string(kind)] = id; });
}

std::optional<std::string> Repository::head(std::string_view kind) const {
  const json index = store_.read_index();
  if (!index.contains("head") || !index["head"].contains(std::string(kind))) return std::nullopt;
  return index["head"][std::string(kind)].get<std::string>();
}

Repository::IngestOutcome Repository::ingest(std::string csv) {
  auto result = ingest_csv(csv);
  if (result.report.accepted == 0) fail(ErrorCode::validation, "no valid rows in CSV");
  const std::string id = dataset_address(csv);
  store_.put(kinds::dataset, id, csv);
  auto ds = std::make_shared<Dataset>();
  ds->dataset_id = id;
  ds->table = std::move(result.table);
  ds->report = result.report;
  {
    std::lock_guard lock(mutex_);
    datasets_[id] = std::move(ds);
  }
  set_head(kinds::dataset, id);
  return {id, std::move(result.report)};
}

std::shared_ptr<const Dataset> Repository::dataset(const std::string& id) {
  {
    std::lock_guard lock(mutex_);
    if (auto it = datasets_.find(id); it != datasets_.end()) return it->second;
  }
  const std::string csv = store_.get(kinds::dataset, id);
  auto result = ingest_csv(csv);
  auto ds = std::make_shared<Dataset>();
  ds->dataset_id = id;
  ds->table = std::move(result.table);
  ds->report = std::move(result.report);
  std::lock_guard lock(mutex_);
  return datasets_.emplace(id, std::move(ds)).first->second;
}

std::shared_ptr<const Derivation> Repository::derive(const std::string& dataset_id, const DerivationConfig& cfg) {
  cfg.validate();
  const std::string id = derivation_address(dataset_id, cfg);
  std::shared_ptr<const Derivation> out;
  if (store_.contains(kinds::derivation, id)) {
    out = derivation(id);
  } else {
    auto ds = dataset(dataset_id);
    auto result = derive_events(ds->table, cfg);
    auto d = std::make_shared<Derivation>();
    d->derivation_id = id;
    d->dataset_id = dataset_id;
    d->config = cfg;
    d->warnings = std::move(result.warnings);
    d->events = std::move(result.events);
    d->days = std::make_shared<const std::vector<DayString>>(std::move(result.days));
    store_.put(kinds::derivation, id, serialize_derivation(*d));
    std::lock_guard lock(mutex_);
    out = derivations_.emplace(id, std::move(d)).first->second;
  }
  store_.update_index([&](json& index) {
    index["latest_derivation"][dataset_id] = id;
    index["head"][std::string(kinds::derivation)] = id;
  });
  return out;
}

std::shared_ptr<const Derivation> Repository::derivation(const std::string& id) {
  {
    std::lock_guard lock(mutex_);
    if (auto it = derivations_.find(id); it != derivations_.end()) return it->second;
  }
  auto d = std::make_shared<const Derivation>(parse_derivation(store_.get(kinds::derivation, id)));
  std::lock_guard lock(mutex_);
  return derivations_.emplace(id, std::move(d)).first->second;
}

std::optional<std::string> Repository::latest_derivation(const std::string& dataset_id) const {
  const json index = store_.read_index();
  if (!index.contains("latest_derivation") || !index["latest_derivation"].contains(dataset_id)) return std::nullopt;
  return index["latest_derivation"][dataset_id].get<std::string>();
}

std::shared_ptr<const MiningRun> Repository::mine(const std::string& derivation_id, const MiningConfig& cfg) {
  cfg.validate();
  const std::string id = run_address(derivation_id, cfg);
  std::shared_ptr<const MiningRun> out;
  if (store_.contains(kinds::run, id)) {
    out = run(id);
  } else {
    auto d = derivation(derivation_id);
    auto r = std::make_shared<MiningRun>(make_run(id, derivation_id, d->days, cfg));
    store_.put(kinds::run, id, serialize_run(*r));
    std::lock_guard lock(mutex_);
    out = runs_.emplace(id, std::move(r)).first->second;
  }
  set_head(kinds::run, id);
  return out;
}

std::shared_ptr<const MiningRun> Repository::run(const std::string& id) {
  {
    std::lock_guard lock(mutex_);
    if (auto it = runs_.find(id); it != runs_.end()) return it->second;
  }
  const std::string payload = store_.get(kinds::run, id);
  const std::string derivation_id = json::parse(payload).at("derivation_id").get<std::string>();
  auto d = derivation(derivation_id);
  auto r = std::make_shared<const MiningRun>(parse_run(payload, d->days));
  std::lock_guard lock(mutex_);
  return runs_.emplace(id, std::move(r)).first->second;
}

std::shared_ptr<const MotifRun> Repository::motif(const std::string& dataset_id, const MotifConfig& cfg) {
  cfg.validate();
  const std::string id = motif_run_address(dataset_id, cfg);
  std::shared_ptr<const MotifRun> out;
  if (store_.contains(kinds::motif_run, id)) {
    out = motif_run(id);
  } else {
    auto ds = dataset(dataset_id);
    const FeatureSet features = window_transform(ds->table, cfg);
    auto r = std::make_shared<MotifRun>(cluster_motifs(features, cfg, id));
    r->dataset_id = dataset_id;
    const FeatureSet scan = scan_windows(ds->table, cfg);
    for (auto& m : r->motifs) m.occurrences = locate_motif(m, scan, cfg);
    store_.put(kinds::motif_run, id, serialize_motif_run(*r));
    std::lock_guard lock(mutex_);
    out = motif_runs_.emplace(id, std::move(r)).first->second;
  }
  store_.update_index([&](json& index) {
    for (const auto& m : out->motifs) index["motifs"][m.motif_id] = id;
    index["head"][std::string(kinds::motif_run)] = id;
  });
  return out;
}

std::shared_ptr<const MotifRun> Repository::motif_run(const std::string& id) {
  {
    std::lock_guard lock(mutex_);
    if (auto it = motif_runs_.find(id); it != motif_runs_.end()) return it->second;
  }
  auto r = std::make_shared<const MotifRun>(parse_motif_run(store_.get(kinds::motif_run, id)));
  std::lock_guard lock(mutex_);
  return motif_runs_.emplace(id, std::move(r)).first->second;
}

Repository::Promotion Repository::promote(const std::string& motif_id) {
  const json index = store_.read_index();
  if (!index.contains("motifs") || !index["motifs"].contains(motif_id))
    fail(ErrorCode::not_found, "unknown motif " + motif_id);
  auto mrun = motif_run(index["motifs"][motif_id].get<std::string>());
  const Motif* motif = mrun->find(motif_id);
  if (!motif) fail(ErrorCode::not_found, "unknown motif " + motif_id);

  auto base_id = latest_derivation(mrun->dataset_id);
  if (!base_id) fail(ErrorCode::validation, "dataset " + mrun->dataset_id + " has no derivation; run derive first");
  auto base = derivation(*base_id);
  if (std::find(base->promoted_motifs.begin(), base->promoted_motifs.end(), motif_id) != base->promoted_motifs.end())
    return {base->derivation_id, motif_id, 0};

  const std::string id = promotion_address(base->derivation_id, motif_id);
  std::shared_ptr<const Derivation> promoted;
  if (store_.contains(kinds::derivation, id)) {
    promoted = derivation(id);
  } else {
    auto d = std::make_shared<Derivation>();
    d->derivation_id = id;
    d->dataset_id = base->dataset_id;
    d->config = base->config;
    d->base_derivation = base->derivation_id;
    d->promoted_motifs = base->promoted_motifs;
    d->promoted_motifs.push_back(motif_id);
    d->warnings = base->warnings;
    d->events = promote_motif(*motif, base->events);
    d->days = std::make_shared<const std::vector<DayString>>(segment_days(d->events));
    store_.put(kinds::derivation, id, serialize_derivation(*d));
    std::lock_guard lock(mutex_);
    promoted = derivations_.emplace(id, std::move(d)).first->second;
  }
  store_.update_index([&](json& idx) {
    idx["latest_derivation"][promoted->dataset_id] = id;
    idx["head"][std::string(kinds::derivation)] = id;
  });
  return {id, motif_id, promoted->events.size() - base->events.size()};
}

}  // namespace chronoseq

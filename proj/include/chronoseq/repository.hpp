#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "chronoseq/derivation.hpp"
#include "chronoseq/mining.hpp"
#include "chronoseq/motif.hpp"
#include "chronoseq/store.hpp"

namespace chronoseq {

namespace kinds {
inline constexpr std::string_view dataset = "dataset";
inline constexpr std::string_view derivation = "derivation";
inline constexpr std::string_view run = "run";
inline constexpr std::string_view motif_run = "motif-run";
}  // namespace kinds

struct Dataset {
  std::string dataset_id;
  SampleTable table;
  IngestReport report;
};

struct Derivation {
  std::string derivation_id;
  std::string dataset_id;
  DerivationConfig config;
  std::optional<std::string> base_derivation;  // set for motif promotions
  std::vector<std::string> promoted_motifs;
  std::vector<std::string> warnings;
  std::vector<EventRecord> events;
  std::shared_ptr<const std::vector<DayString>> days;
};

// Artifact payload codecs. parse(serialize(x)) re-serializes to identical bytes.
std::string serialize_derivation(const Derivation& d);
Derivation parse_derivation(std::string_view payload);
std::string serialize_run(const MiningRun& run);
MiningRun parse_run(std::string_view payload, std::shared_ptr<const std::vector<DayString>> days);
std::string serialize_motif_run(const MotifRun& run);
MotifRun parse_motif_run(std::string_view payload);

// Content addresses of each stage, from its inputs and configuration.
std::string dataset_address(std::string_view csv);
std::string derivation_address(std::string_view dataset_id, const DerivationConfig& cfg);
std::string promotion_address(std::string_view base_derivation_id, std::string_view motif_id);
std::string run_address(std::string_view derivation_id, const MiningConfig& cfg);
std::string motif_run_address(std::string_view dataset_id, const MotifConfig& cfg);

/// Typed pipeline over an ArtifactStore with in-memory caches. Every stage is
/// content addressed: repeating it with the same inputs returns the stored artifact.
class Repository {
 public:
  explicit Repository(std::filesystem::path root);

  ArtifactStore& store() { return store_; }

  struct IngestOutcome {
    std::string dataset_id;
    IngestReport report;
  };
  IngestOutcome ingest(std::string csv);
  std::shared_ptr<const Dataset> dataset(const std::string& id);

  std::shared_ptr<const Derivation> derive(const std::string& dataset_id, const DerivationConfig& cfg);
  std::shared_ptr<const Derivation> derivation(const std::string& id);
  /// Most recent derivation (or promotion) of a dataset.
  std::optional<std::string> latest_derivation(const std::string& dataset_id) const;

  std::shared_ptr<const MiningRun> mine(const std::string& derivation_id, const MiningConfig& cfg);
  std::shared_ptr<const MiningRun> run(const std::string& id);

  std::shared_ptr<const MotifRun> motif(const std::string& dataset_id, const MotifConfig& cfg);
  std::shared_ptr<const MotifRun> motif_run(const std::string& id);

  struct Promotion {
    std::string derivation_id;
    std::string motif_id;
    std::size_t events_added = 0;
  };
  /// Adds a motif's occurrences as MOTIF events to the dataset's latest
  /// derivation. Promoting an already promoted motif returns the same derivation.
  Promotion promote(const std::string& motif_id);

  /// Last artifact id written for a kind, if any.
  std::optional<std::string> head(std::string_view kind) const;

 private:
  void set_head(std::string_view kind, const std::string& id);

  ArtifactStore store_;
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<const Dataset>> datasets_;
  std::map<std::string, std::shared_ptr<const Derivation>> derivations_;
  std::map<std::string, std::shared_ptr<const MiningRun>> runs_;
  std::map<std::string, std::shared_ptr<const MotifRun>> motif_runs_;
};

}  // namespace chronoseq

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "chronoseq/error.hpp"
#include "chronoseq/serialize.hpp"
#include "chronoseq/service.hpp"
#include "chronoseq/store.hpp"

using namespace chronoseq;
using nlohmann::json;

namespace {

std::string env_or(const char* name, std::string fallback) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : fallback;
}

// The config file is a JSON object. A section named after the subcommand wins
// over top-level keys, so one file can drive the whole pipeline.
json load_config(const std::string& path, const std::string& section) {
  if (path.empty()) return json::object();
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    fail(ErrorCode::validation, "config " + path + " is not valid JSON: " + e.what());
  }
  if (!j.is_object()) fail(ErrorCode::validation, "config " + path + " must be a JSON object");
  if (j.contains(section)) {
    if (!j.at(section).is_object()) fail(ErrorCode::validation, "config section '" + section + "' must be an object");
    return j.at(section);
  }
  for (const char* s : {"derive", "mine", "motif", "serve", "ingest"}) j.erase(s);
  return j;
}

// Flags arrive as text; numbers and "unbounded" are decoded like JSON scalars.
json scalar(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error&) {
    return text;
  }
}

std::string resolve_dataset(Repository& repo, const std::string& given) {
  if (!given.empty()) return given;
  auto head = repo.head(kinds::dataset);
  if (!head) fail(ErrorCode::validation, "no dataset ingested yet; run `chronoseq ingest --input <csv>` first");
  return *head;
}

struct Common {
  std::string config;
  std::string data_dir = env_or("CHRONOSEQ_DATA_DIR", "chronoseq-data");
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "JSON config file")->check(CLI::ExistingFile);
  cmd->add_option("--data-dir", c.data_dir, "artifact directory (env CHRONOSEQ_DATA_DIR)");
}

volatile std::sig_atomic_t g_stop = 0;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"chronoseq: event derivation, sequence mining and alignment over sensor streams"};
  app.set_version_flag("--version", CHRONOSEQ_VERSION);
  app.require_subcommand(1);

  Common common;

  auto* ingest = app.add_subcommand("ingest", "ingest a CSV of participant_id,stream,timestamp,value rows");
  add_common(ingest, common);
  std::string input;
  ingest->add_option("--input", input, "CSV file")->required()->check(CLI::ExistingFile);

  auto* derive = app.add_subcommand("derive", "derive activity/stress/smoke events");
  add_common(derive, common);
  std::string dataset, derivation, export_path;
  std::optional<std::string> interval, gap, low_q, high_q;
  derive->add_option("--dataset", dataset, "dataset id (default: last ingested)");
  derive->add_option("--interval", interval, "aggregation interval in seconds");
  derive->add_option("--gap", gap, "gap threshold in seconds");
  derive->add_option("--low-quantile", low_q);
  derive->add_option("--high-quantile", high_q);
  derive->add_option("--export", export_path, "also write events as JSON Lines to this file");

  auto* mine = app.add_subcommand("mine", "mine frequent sequences from a derivation");
  add_common(mine, common);
  std::optional<std::string> min_support, max_gap, max_len, min_len_display;
  mine->add_option("--dataset", dataset, "dataset id (default: last ingested)");
  mine->add_option("--derivation", derivation, "derivation id (default: latest for the dataset)");
  mine->add_option("--min-support", min_support, "absolute day count or fraction in (0,1]");
  mine->add_option("--max-gap", max_gap, "intervening events allowed, or 'unbounded'");
  mine->add_option("--max-len", max_len);
  mine->add_option("--min-len-display", min_len_display);

  auto* motif = app.add_subcommand("motif", "discover motifs in a raw stream");
  add_common(motif, common);
  std::optional<std::string> stream, window, stride, segments, alphabet, k, seed, threshold;
  motif->add_option("--dataset", dataset, "dataset id (default: last ingested)");
  motif->add_option("--stream", stream);
  motif->add_option("--window", window, "window length in seconds");
  motif->add_option("--stride", stride, "window stride in seconds");
  motif->add_option("--paa-segments", segments);
  motif->add_option("--alphabet", alphabet);
  motif->add_option("--k", k, "cluster count");
  motif->add_option("--seed", seed);
  motif->add_option("--match-threshold", threshold);

  auto* serve = app.add_subcommand("serve", "run the HTTP API");
  add_common(serve, common);
  int port = std::atoi(env_or("CHRONOSEQ_PORT", "8080").c_str());
  std::string host = "127.0.0.1";
  std::size_t workers = 2;
  serve->add_option("--port", port, "listen port (env CHRONOSEQ_PORT)");
  serve->add_option("--host", host);
  serve->add_option("--workers", workers, "job worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  auto put = [](json& j, const char* key, const std::optional<std::string>& v) {
    if (v) j[key] = scalar(*v);
  };

  try {
    if (*serve) {
      json cfg = load_config(common.config, "serve");
      if (cfg.contains("port") && serve->count("--port") == 0) port = cfg.at("port").get<int>();
      if (cfg.contains("workers") && serve->count("--workers") == 0) workers = cfg.at("workers").get<std::size_t>();
      if (cfg.contains("data_dir") && serve->count("--data-dir") == 0) common.data_dir = cfg.at("data_dir");
      ServiceOptions opts;
      opts.data_dir = common.data_dir;
      opts.workers = workers;
      Service service(opts);
      HttpServer server(service, host, port);
      std::signal(SIGINT, [](int) { g_stop = 1; });
      std::signal(SIGTERM, [](int) { g_stop = 1; });
      std::cout << "listening on http://" << host << ":" << server.port() << "/api/v1 (data " << common.data_dir << ")"
                << std::endl;
      while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
      server.stop();
      return 0;
    }

    Repository repo(common.data_dir);

    if (*ingest) {
      auto outcome = repo.ingest(read_file(input));
      const auto& r = outcome.report;
      std::cerr << "rows " << r.rows << ", accepted " << r.accepted << ", rejected " << r.rejected.size()
                << ", duplicates " << r.duplicates << ", participants " << r.participants.size() << "\n";
      for (std::size_t i = 0; i < std::min<std::size_t>(10, r.rejected.size()); ++i)
        std::cerr << "  line " << r.rejected[i].line << ": " << r.rejected[i].reason << "\n";
      if (r.rejected.size() > 10) std::cerr << "  ...\n";
      std::cout << outcome.dataset_id << "\n";
      return 0;
    }

    if (*derive) {
      json j = load_config(common.config, "derive");
      put(j, "interval_s", interval);
      put(j, "gap_threshold_s", gap);
      put(j, "low_quantile", low_q);
      put(j, "high_quantile", high_q);
      const auto cfg = derivation_config_from_json(j);
      auto d = repo.derive(resolve_dataset(repo, dataset), cfg);
      for (const auto& w : d->warnings) std::cerr << "warning: " << w << "\n";
      if (!export_path.empty()) {
        write_file_atomic(export_path, to_json_lines(d->events, [](const EventRecord& e) { return to_json(e); }));
      }
      std::cerr << d->events.size() << " events over " << d->days->size() << " days\n";
      std::cout << d->derivation_id << "\n";
      return 0;
    }

    if (*mine) {
      json j = load_config(common.config, "mine");
      put(j, "min_support", min_support);
      put(j, "max_gap", max_gap);
      put(j, "max_len", max_len);
      put(j, "min_len_display", min_len_display);
      const auto cfg = mining_config_from_json(j);
      cfg.validate();
      if (derivation.empty()) {
        const std::string ds = resolve_dataset(repo, dataset);
        auto latest = repo.latest_derivation(ds);
        if (!latest)
          fail(ErrorCode::validation,
               "missing derivation for dataset " + ds + "; run `chronoseq derive --dataset " + ds + "` first");
        derivation = *latest;
      }
      auto run = repo.mine(derivation, cfg);
      std::cerr << run->sequences.size() << " frequent sequences over " << run->days->size() << " days\n";
      std::cout << run->run_id << "\n";
      return 0;
    }

    if (*motif) {
      json j = load_config(common.config, "motif");
      put(j, "stream", stream);
      put(j, "window_s", window);
      put(j, "stride_s", stride);
      put(j, "paa_segments", segments);
      put(j, "sax_alphabet", alphabet);
      put(j, "k", k);
      put(j, "seed", seed);
      put(j, "match_threshold", threshold);
      if (stream) j["stream"] = *stream;  // stream names stay strings
      const auto cfg = motif_config_from_json(j);
      auto r = repo.motif(resolve_dataset(repo, dataset), cfg);
      for (const auto& m : r->motifs)
        std::cerr << m.motif_id << " " << m.sax_word << " members " << m.member_count << " occurrences "
                  << m.occurrences.size() << "\n";
      std::cout << r->motif_run_id << "\n";
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.code()) << "): " << e.what() << "\n";
    return e.code() == ErrorCode::validation || e.code() == ErrorCode::not_found ? 1 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error (internal): " << e.what() << "\n";
    return 2;
  }
  return 2;
}

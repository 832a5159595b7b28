#include "chronoseq/service.hpp"

#include <httplib.h>

#include <charconv>

#include "chronoseq/error.hpp"
#include "chronoseq/serialize.hpp"

#ifndef CHRONOSEQ_VERSION
#define CHRONOSEQ_VERSION "0.0.0"
#endif

namespace chronoseq {

std::string_view to_string(JobState s) {
  switch (s) {
    case JobState::queued: return "queued";
    case JobState::running: return "running";
    case JobState::done: return "done";
    case JobState::failed: return "failed";
  }
  return "failed";
}

// ---------------------------------------------------------------------------
// JobQueue

JobQueue::JobQueue(std::size_t workers) {
  for (std::size_t i = 0; i < std::max<std::size_t>(1, workers); ++i) workers_.emplace_back([this] { work(); });
}

JobQueue::~JobQueue() {
  {
    std::lock_guard lock(mutex_);
    stopping_ = true;
  }
  changed_.notify_all();
  for (auto& t : workers_) t.join();
}

std::string JobQueue::submit(std::string kind, Task task) {
  std::string id;
  {
    std::lock_guard lock(mutex_);
    id = "job-" + std::to_string(next_id_++);
    JobStatus st;
    st.job_id = id;
    st.kind = std::move(kind);
    jobs_.emplace(id, std::move(st));
    pending_.emplace_back(id, std::move(task));
  }
  changed_.notify_all();
  return id;
}

std::optional<JobStatus> JobQueue::status(const std::string& job_id) const {
  std::lock_guard lock(mutex_);
  auto it = jobs_.find(job_id);
  if (it == jobs_.end()) return std::nullopt;
  return it->second;
}

std::optional<JobStatus> JobQueue::wait(const std::string& job_id, std::chrono::milliseconds timeout) const {
  std::unique_lock lock(mutex_);
  auto finished = [&] {
    auto it = jobs_.find(job_id);
    return it == jobs_.end() || it->second.state == JobState::done || it->second.state == JobState::failed;
  };
  changed_.wait_for(lock, timeout, finished);
  auto it = jobs_.find(job_id);
  if (it == jobs_.end()) return std::nullopt;
  return it->second;
}

void JobQueue::work() {
  for (;;) {
    std::pair<std::string, Task> item;
    {
      std::unique_lock lock(mutex_);
      changed_.wait(lock, [&] { return stopping_ || !pending_.empty(); });
      if (pending_.empty()) return;
      item = std::move(pending_.front());
      pending_.pop_front();
      jobs_[item.first].state = JobState::running;
    }
    changed_.notify_all();

    nlohmann::json result;
    std::string error, code;
    try {
      result = item.second();
    } catch (const Error& e) {
      error = e.what();
      code = to_string(e.code());
    } catch (const std::exception& e) {
      error = e.what();
      code = to_string(ErrorCode::internal);
    }
    {
      std::lock_guard lock(mutex_);
      auto& st = jobs_[item.first];
      if (error.empty()) {
        st.state = JobState::done;
        st.progress = 1.0;
        st.result = std::move(result);
      } else {
        st.state = JobState::failed;
        st.error = std::move(error);
        st.error_code = std::move(code);
      }
    }
    changed_.notify_all();
  }
}

// ---------------------------------------------------------------------------
// Service helpers

namespace {

using Query = std::multimap<std::string, std::string>;

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::validation: return 400;
    case ErrorCode::not_found: return 404;
    case ErrorCode::conflict: return 409;
    case ErrorCode::checksum:
    case ErrorCode::internal: return 500;
  }
  return 500;
}

Response ok(json data, int status = 200) {
  return {status, json{{"ok", true}, {"data", std::move(data)}}.dump(), "application/json"};
}

Response error_response(int status, std::string_view code, const std::string& message) {
  return {status, json{{"ok", false}, {"error", {{"code", code}, {"message", message}}}}.dump(), "application/json"};
}

std::optional<std::string> param(const Query& q, const std::string& key) {
  auto it = q.find(key);
  if (it == q.end() || it->second.empty()) return std::nullopt;
  return it->second;
}

std::size_t parse_index(const std::string& text, const char* what) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    fail(ErrorCode::validation, std::string(what) + " must be a non-negative integer");
  return v;
}

json parse_body(const std::string& body) {
  if (body.empty()) return json::object();
  try {
    json j = json::parse(body);
    if (!j.is_object()) fail(ErrorCode::validation, "request body must be a JSON object");
    return j;
  } catch (const json::parse_error&) {
    fail(ErrorCode::validation, "request body is not valid JSON");
  }
}

json job_json(const JobStatus& st) {
  json j{{"job_id", st.job_id}, {"kind", st.kind}, {"state", to_string(st.state)}, {"progress", st.progress}};
  j["result"] = st.result.is_null() ? json(nullptr) : st.result;
  if (st.state == JobState::failed) j["error"] = {{"code", st.error_code}, {"message", st.error}};
  return j;
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::size_t pos = 0;
  while (pos <= path.size()) {
    auto next = path.find('/', pos);
    if (next == std::string::npos) next = path.size();
    if (next > pos) parts.push_back(path.substr(pos, next - pos));
    pos = next + 1;
  }
  return parts;
}

}  // namespace

Service::Service(ServiceOptions options)
    : options_(std::move(options)), repo_(options_.data_dir), jobs_(options_.workers) {}

Response Service::handle(const std::string& method, const std::string& path, const Query& query,
                         const std::string& body, const std::string& session_id) {
  try {
    auto parts = split_path(path);
    if (parts.size() < 2 || parts[0] != "api" || parts[1] != "v1")
      return error_response(404, "not_found", "no route for " + path);
    parts.erase(parts.begin(), parts.begin() + 2);
    touch_session(session_id);
    return route(method, parts, query, body, session_id);
  } catch (const Error& e) {
    return error_response(status_for(e.code()), to_string(e.code()), e.what());
  } catch (const std::exception& e) {
    return error_response(500, "internal", e.what());
  }
}

Response Service::route(const std::string& method, const std::vector<std::string>& p, const Query& q,
                        const std::string& body, const std::string& session_id) {
  const auto n = p.size();
  const bool get = method == "GET", post = method == "POST", del = method == "DELETE";

  if (get && n == 1 && p[0] == "health") return ok({{"status", "ok"}, {"version", CHRONOSEQ_VERSION}});

  if (n >= 1 && p[0] == "datasets") {
    if (post && n == 1) {
      auto outcome = repo_.ingest(body);
      return ok({{"dataset_id", outcome.dataset_id}, {"report", to_json(outcome.report)}}, 201);
    }
    if (n < 2) return error_response(404, "not_found", "unknown dataset route");
    const std::string& id = p[1];
    if (get && n == 2) {
      auto ds = repo_.dataset(id);
      json j{{"dataset_id", id},
             {"participants", ds->table.participant_ids()},
             {"samples", ds->table.sample_count()},
             {"samples_per_stream", ds->table.counts_per_stream()}};
      auto latest = repo_.latest_derivation(id);
      j["latest_derivation"] = latest ? json(*latest) : json(nullptr);
      return ok(std::move(j));
    }
    if (post && n == 3 && p[2] == "derive") {
      const auto cfg = derivation_config_from_json(parse_body(body));
      repo_.dataset(id);
      auto job = jobs_.submit("derive", [this, id, cfg] {
        auto d = repo_.derive(id, cfg);
        return json{{"derivation_id", d->derivation_id},
                    {"dataset_id", id},
                    {"events", d->events.size()},
                    {"days", d->days->size()},
                    {"warnings", d->warnings}};
      });
      return ok({{"job_id", job}}, 202);
    }
    if (post && n == 3 && p[2] == "mine") {
      json j = parse_body(body);
      std::optional<std::string> derivation_id;
      if (j.contains("derivation_id")) {
        derivation_id = j.at("derivation_id").get<std::string>();
        j.erase("derivation_id");
      }
      const auto cfg = mining_config_from_json(j);
      cfg.validate();
      repo_.dataset(id);
      if (!derivation_id) derivation_id = repo_.latest_derivation(id);
      if (!derivation_id)
        fail(ErrorCode::validation, "dataset " + id + " has no derivation; derive it before mining");
      repo_.derivation(*derivation_id);
      auto job = jobs_.submit("mine", [this, cfg, did = *derivation_id] {
        auto run = repo_.mine(did, cfg);
        return json{{"run_id", run->run_id}, {"derivation_id", did}, {"sequences", run->sequences.size()}};
      });
      return ok({{"job_id", job}}, 202);
    }
    if (post && n == 3 && p[2] == "motifs") {
      json j = parse_body(body);
      const auto cfg = motif_config_from_json(j.contains("config") ? j.at("config") : j);
      repo_.dataset(id);
      auto job = jobs_.submit("motif", [this, id, cfg] {
        auto r = repo_.motif(id, cfg);
        return json{{"motif_run_id", r->motif_run_id}, {"motifs", r->motifs.size()}};
      });
      return ok({{"job_id", job}}, 202);
    }
    if (get && n == 3 && p[2] == "days") {
      repo_.dataset(id);
      auto did = param(q, "derivation");
      if (!did) did = repo_.latest_derivation(id);
      if (!did) fail(ErrorCode::validation, "dataset " + id + " has no derivation");
      auto d = repo_.derivation(*did);
      const auto participant = param(q, "participant");
      std::optional<Date> date;
      if (auto ds = param(q, "date")) {
        date = parse_date(*ds);
        if (!date) fail(ErrorCode::validation, "date must be YYYY-MM-DD");
      }
      json days = json::array();
      for (const auto& day : *d->days) {
        if (participant && day.participant_id != *participant) continue;
        if (date && day.day != *date) continue;
        days.push_back(to_json(day));
      }
      return ok({{"derivation_id", *did}, {"days", std::move(days)}});
    }
  }

  if (get && n == 2 && p[0] == "jobs") {
    auto st = jobs_.status(p[1]);
    if (!st) fail(ErrorCode::not_found, "unknown job " + p[1]);
    return ok(job_json(*st));
  }

  if (n >= 2 && p[0] == "runs") {
    auto run = repo_.run(p[1]);
    if (get && n == 2) {
      return ok({{"run_id", run->run_id},
                 {"derivation_id", run->derivation_id},
                 {"config", to_json(run->config)},
                 {"total_days", run->days->size()},
                 {"sequences", run->sequences.size()}});
    }
    if (get && n == 3 && p[2] == "sequences") {
      json seqs = json::array();
      const auto display = param(q, "display");
      if (display && *display == "scatter") {
        for (auto i : minimal_prefix_filter(run->sequences, run->config.min_len_display))
          seqs.push_back(to_json(run->sequences[i]));
      } else if (display && *display != "all") {
        fail(ErrorCode::validation, "display must be scatter or all");
      } else {
        for (const auto& s : run->sequences) seqs.push_back(to_json(s));
      }
      return ok({{"run_id", run->run_id}, {"sequences", std::move(seqs)}});
    }
    if (get && n == 5 && p[2] == "sequences" && p[4] == "occurrences") {
      const FrequentSequence* seq = run->find(p[3]);
      if (!seq) fail(ErrorCode::not_found, "unknown sequence " + p[3]);
      return {200, to_json_lines(run->occurrences(*seq), [](const Occurrence& o) { return to_json(o); }),
              "application/x-ndjson"};
    }
    if (post && n == 3 && p[2] == "timelines") return create_timeline(p[1], parse_body(body), session_id);
  }

  if (n >= 2 && p[0] == "timelines") {
    if (get && n == 2 && p[1] == "compare") return compare(q);
    if (get && n == 2) {
      auto slot = timeline_slot(p[1]);
      std::lock_guard lock(slot->mutex);
      return ok(to_json(slot->timeline, *repo_.run(slot->timeline.run_id)));
    }
    if (post && n == 3 && p[2] == "focal") return add_focal(p[1], parse_body(body));
    if (del && n == 4 && p[2] == "focal") return remove_focal(p[1], p[3]);
    if (get && n == 3 && p[2] == "adjacent") return adjacent(p[1], q);
    if (get && n == 3 && p[2] == "cohort") return cohort(p[1]);
    if (post && n == 3 && p[2] == "clone") return clone(p[1], session_id);
  }

  if (n >= 2 && p[0] == "motif-runs") {
    auto r = repo_.motif_run(p[1]);
    if (get && n == 2) {
      json motifs = json::array();
      for (const auto& m : r->motifs) {
        motifs.push_back({{"motif_id", m.motif_id},
                          {"sax_word", m.sax_word},
                          {"centroid", std::vector<double>(m.centroid.data(), m.centroid.data() + m.centroid.size())},
                          {"member_count", m.member_count},
                          {"occurrence_count", m.occurrences.size()}});
      }
      return ok({{"motif_run_id", r->motif_run_id},
                 {"dataset_id", r->dataset_id},
                 {"config", to_json(r->config)},
                 {"motifs", std::move(motifs)}});
    }
    if (get && n == 5 && p[2] == "motifs" && p[4] == "occurrences") {
      const Motif* m = r->find(p[3]);
      if (!m) fail(ErrorCode::not_found, "unknown motif " + p[3]);
      return {200, to_json_lines(m->occurrences, [](const MotifOccurrence& o) { return to_json(o); }),
              "application/x-ndjson"};
    }
  }

  if (post && n == 3 && p[0] == "motifs" && p[2] == "promote") {
    auto pr = repo_.promote(p[1]);
    return ok({{"derivation_id", pr.derivation_id}, {"motif_id", pr.motif_id}, {"events_added", pr.events_added}});
  }

  return error_response(404, "not_found", "no route for " + method + " /api/v1/" + [&] {
    std::string s;
    for (std::size_t i = 0; i < p.size(); ++i) s += (i ? "/" : "") + p[i];
    return s;
  }());
}

// ---------------------------------------------------------------------------
// Timelines

void Service::touch_session(const std::string& session_id) {
  const auto now = std::chrono::steady_clock::now();
  std::lock_guard lock(sessions_mutex_);
  for (auto it = sessions_.begin(); it != sessions_.end();) {
    if (it->first != session_id && now - it->second.last_access > options_.session_ttl) {
      for (const auto& tid : it->second.timelines) timelines_.erase(tid);
      it = sessions_.erase(it);
    } else {
      ++it;
    }
  }
  sessions_[session_id].last_access = now;
}

std::string Service::next_timeline_id() { return "tl-" + std::to_string(next_timeline_++); }

std::string Service::register_timeline(Timeline t, const std::string& session_id) {
  auto slot = std::make_shared<TimelineSlot>();
  std::lock_guard lock(sessions_mutex_);
  t.id = next_timeline_id();
  if (t.parent_id) t.parent_id = *t.parent_id;
  const std::string id = t.id;
  slot->timeline = std::move(t);
  timelines_[id] = std::move(slot);
  sessions_[session_id].timelines.push_back(id);
  return id;
}

std::shared_ptr<Service::TimelineSlot> Service::timeline_slot(const std::string& id) {
  std::lock_guard lock(sessions_mutex_);
  auto it = timelines_.find(id);
  if (it == timelines_.end()) fail(ErrorCode::not_found, "unknown timeline " + id);
  return it->second;
}

Response Service::create_timeline(const std::string& run_id, const json& body, const std::string& session_id) {
  auto run = repo_.run(run_id);
  if (!body.contains("focal") || !body.at("focal").is_array() || body.at("focal").empty())
    fail(ErrorCode::validation, "body must contain a non-empty 'focal' array of sequence ids");
  std::vector<std::string> chain;
  for (const auto& f : body.at("focal")) {
    if (!f.is_string()) fail(ErrorCode::validation, "focal entries must be sequence ids");
    chain.push_back(f.get<std::string>());
  }
  Timeline t = chronoseq::create_timeline(*run, "", std::move(chain));
  const std::string id = register_timeline(std::move(t), session_id);
  auto slot = timeline_slot(id);
  std::lock_guard lock(slot->mutex);
  return ok(to_json(slot->timeline, *run), 201);
}

namespace {
std::size_t non_negative(const json& body, const char* key) {
  const json& v = body.at(key);
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
    fail(ErrorCode::validation, std::string(key) + " must be a non-negative integer");
  return v.get<std::size_t>();
}

// Optimistic concurrency: a stale version is a conflicting mutation.
void check_version(const json& body, const Timeline& t) {
  if (body.contains("version") && non_negative(body, "version") != t.version)
    fail(ErrorCode::conflict, "timeline " + t.id + " is at version " + std::to_string(t.version));
}
}  // namespace

Response Service::add_focal(const std::string& id, const json& body) {
  auto slot = timeline_slot(id);
  std::lock_guard lock(slot->mutex);
  if (slot->dissolved) fail(ErrorCode::not_found, "unknown timeline " + id);
  auto run = repo_.run(slot->timeline.run_id);
  if (!body.contains("sid") || !body.at("sid").is_string()) fail(ErrorCode::validation, "body must contain 'sid'");
  check_version(body, slot->timeline);
  std::size_t position = slot->timeline.focal_chain.size();
  if (body.contains("position")) position = non_negative(body, "position");
  slot->timeline = chronoseq::add_focal(*run, slot->timeline, body.at("sid").get<std::string>(), position);
  slot->adjacency.clear();
  return ok(to_json(slot->timeline, *run));
}

Response Service::remove_focal(const std::string& id, const std::string& position_text) {
  auto slot = timeline_slot(id);
  const std::size_t position = parse_index(position_text, "position");
  std::lock_guard lock(slot->mutex);
  if (slot->dissolved) fail(ErrorCode::not_found, "unknown timeline " + id);
  auto run = repo_.run(slot->timeline.run_id);
  if (slot->timeline.focal_chain.size() == 1 && position == 0) {
    slot->dissolved = true;
    std::lock_guard sl(sessions_mutex_);
    timelines_.erase(id);
    return ok({{"id", id}, {"dissolved", true}});
  }
  slot->timeline = chronoseq::remove_focal(*run, slot->timeline, position);
  slot->adjacency.clear();
  return ok(to_json(slot->timeline, *run));
}

Response Service::adjacent(const std::string& id, const Query& q) {
  auto slot = timeline_slot(id);
  const std::string kind = param(q, "region").value_or("after");
  Region region;
  if (kind == "before") {
    region = Region::before();
  } else if (kind == "after") {
    region = Region::after();
  } else if (kind == "between") {
    region = Region::between(parse_index(param(q, "index").value_or("0"), "index"));
  } else {
    fail(ErrorCode::validation, "region must be before, after or between");
  }
  const std::size_t top = parse_index(param(q, "top").value_or("10"), "top");
  const std::size_t page = parse_index(param(q, "page").value_or("0"), "page");
  if (top == 0) fail(ErrorCode::validation, "top must be >= 1");

  std::lock_guard lock(slot->mutex);
  region.validate(slot->timeline.focal_chain.size());
  auto run = repo_.run(slot->timeline.run_id);
  const std::string key = region.to_string();
  auto it = slot->adjacency.find(key);
  if (it == slot->adjacency.end()) it = slot->adjacency.emplace(key, adjacent_all(*run, slot->timeline, region)).first;
  const auto& all = it->second;

  AdjacencyPage pg;
  pg.total = all.size();
  pg.page = page;
  pg.page_size = top;
  const std::size_t b = std::min(all.size(), page * top), e = std::min(all.size(), b + top);
  pg.items.assign(all.begin() + static_cast<std::ptrdiff_t>(b), all.begin() + static_cast<std::ptrdiff_t>(e));
  json j = to_json(pg);
  j["region"] = key;
  j["timeline_id"] = id;
  j["version"] = slot->timeline.version;
  return ok(std::move(j));
}

Response Service::cohort(const std::string& id) {
  auto slot = timeline_slot(id);
  std::lock_guard lock(slot->mutex);
  auto run = repo_.run(slot->timeline.run_id);
  json days = json::array();
  for (const auto& a : slot->timeline.assignments) {
    const auto& day = (*run->days)[a.day_index];
    days.push_back({{"participant_id", day.participant_id}, {"day", format_date(day.day)}, {"focal_indices", a.focals}});
  }
  return ok({{"timeline_id", id}, {"size", slot->timeline.cohort.size()}, {"days", std::move(days)}});
}

Response Service::clone(const std::string& id, const std::string& session_id) {
  auto slot = timeline_slot(id);
  Timeline copy;
  {
    std::lock_guard lock(slot->mutex);
    copy = clone_timeline(slot->timeline, "");
  }
  const std::string new_id = register_timeline(std::move(copy), session_id);
  auto fresh = timeline_slot(new_id);
  std::lock_guard lock(fresh->mutex);
  return ok(to_json(fresh->timeline, *repo_.run(fresh->timeline.run_id)), 201);
}

Response Service::compare(const Query& q) {
  const auto a_id = param(q, "a"), b_id = param(q, "b");
  if (!a_id || !b_id) fail(ErrorCode::validation, "compare requires a and b");
  Timeline a, b;
  {
    auto sa = timeline_slot(*a_id);
    std::lock_guard lock(sa->mutex);
    a = sa->timeline;
  }
  {
    auto sb = timeline_slot(*b_id);
    std::lock_guard lock(sb->mutex);
    b = sb->timeline;
  }
  if (a.run_id != b.run_id) fail(ErrorCode::validation, "timelines derive from different runs");
  auto run = repo_.run(a.run_id);
  return ok(to_json(compare_timelines(*run, a, b)));
}

// ---------------------------------------------------------------------------
// HTTP transport

void Service::mount(httplib::Server& server) {
  auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    const std::string session = req.has_header("X-Session-Id") ? req.get_header_value("X-Session-Id") : "default";
    auto r = handle(req.method, req.path, req.params, req.body, session);
    res.status = r.status;
    res.set_content(r.body, r.content_type);
  };
  const std::string pattern = R"(/api/v1/.*)";
  server.Get(pattern, handler);
  server.Post(pattern, handler);
  server.Delete(pattern, handler);
}

HttpServer::HttpServer(Service& service, const std::string& host, int port)
    : server_(std::make_unique<httplib::Server>()) {
  service.mount(*server_);
  if (port == 0) {
    port_ = server_->bind_to_any_port(host);
  } else {
    port_ = server_->bind_to_port(host, port) ? port : -1;
  }
  if (port_ <= 0) fail(ErrorCode::internal, "cannot bind " + host + ":" + std::to_string(port));
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
}

HttpServer::~HttpServer() {
  stop();
  wait();
}

void HttpServer::stop() { server_->stop(); }

void HttpServer::wait() {
  if (thread_.joinable()) thread_.join();
}

}  // namespace chronoseq

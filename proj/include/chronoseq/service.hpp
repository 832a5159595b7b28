#pragma once

#include <chrono>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "chronoseq/alignment.hpp"
#include "chronoseq/repository.hpp"

namespace httplib {
class Server;
}

namespace chronoseq {

enum class JobState { queued, running, done, failed };
std::string_view to_string(JobState s);

struct JobStatus {
  std::string job_id;
  std::string kind;  // derive | mine | motif
  JobState state = JobState::queued;
  double progress = 0.0;
  nlohmann::json result;
  std::string error;
  std::string error_code;
};

/// Bounded worker pool running derive/mine/motif jobs. States move only
/// queued -> running -> done|failed.
class JobQueue {
 public:
  using Task = std::function<nlohmann::json()>;

  explicit JobQueue(std::size_t workers);
  ~JobQueue();
  JobQueue(const JobQueue&) = delete;
  JobQueue& operator=(const JobQueue&) = delete;

  std::string submit(std::string kind, Task task);
  std::optional<JobStatus> status(const std::string& job_id) const;
  /// Blocks until the job leaves queued/running or the timeout expires.
  std::optional<JobStatus> wait(const std::string& job_id, std::chrono::milliseconds timeout) const;

 private:
  void work();

  mutable std::mutex mutex_;
  mutable std::condition_variable changed_;
  std::deque<std::pair<std::string, Task>> pending_;
  std::map<std::string, JobStatus> jobs_;
  std::uint64_t next_id_ = 1;
  bool stopping_ = false;
  std::vector<std::thread> workers_;
};

struct ServiceOptions {
  std::filesystem::path data_dir = "chronoseq-data";
  std::size_t workers = 2;
  std::chrono::seconds session_ttl{3600};
};

/// HTTP response independent of the transport.
struct Response {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

/// The JSON API. Handlers live here so they can be exercised with or without a socket.
class Service {
 public:
  explicit Service(ServiceOptions options);

  Repository& repository() { return repo_; }
  JobQueue& jobs() { return jobs_; }

  /// Dispatches one request. `path` excludes the query string.
  Response handle(const std::string& method, const std::string& path,
                  const std::multimap<std::string, std::string>& query, const std::string& body,
                  const std::string& session_id = "default");

  /// Registers every route on an httplib server.
  void mount(httplib::Server& server);

 private:
  struct TimelineSlot {
    std::mutex mutex;
    Timeline timeline;
    std::map<std::string, std::vector<AdjacentSequence>> adjacency;  // region -> ranked list
    bool dissolved = false;
  };
  struct Session {
    std::vector<std::string> timelines;
    std::chrono::steady_clock::time_point last_access;
  };

  Response route(const std::string& method, const std::vector<std::string>& parts,
                 const std::multimap<std::string, std::string>& query, const std::string& body,
                 const std::string& session_id);

  std::shared_ptr<TimelineSlot> timeline_slot(const std::string& id);
  std::string register_timeline(Timeline t, const std::string& session_id);
  std::string next_timeline_id();
  void touch_session(const std::string& session_id);

  Response create_timeline(const std::string& run_id, const nlohmann::json& body, const std::string& session_id);
  Response add_focal(const std::string& id, const nlohmann::json& body);
  Response remove_focal(const std::string& id, const std::string& position);
  Response adjacent(const std::string& id, const std::multimap<std::string, std::string>& query);
  Response cohort(const std::string& id);
  Response clone(const std::string& id, const std::string& session_id);
  Response compare(const std::multimap<std::string, std::string>& query);

  ServiceOptions options_;
  Repository repo_;
  JobQueue jobs_;
  std::mutex sessions_mutex_;
  std::map<std::string, Session> sessions_;
  std::map<std::string, std::shared_ptr<TimelineSlot>> timelines_;
  std::uint64_t next_timeline_ = 1;
};

/// Runs a Service on an httplib server in a background thread.
class HttpServer {
 public:
  HttpServer(Service& service, const std::string& host, int port);  // port 0 binds any free port
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  int port() const { return port_; }
  void stop();
  /// Blocks until the server stops.
  void wait();

 private:
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = 0;
};

}  // namespace chronoseq

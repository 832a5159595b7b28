#include <doctest.h>


#include <thread>

#include "chronoseq/service.hpp"
#include "support/fixtures.hpp"

#include <httplib.h>

using namespace chronoseq;
using nlohmann::json;

namespace {

struct Api {
  Service& svc;
  std::string session = "s1";

  std::pair<int, json> call(const std::string& method, const std::string& path, const std::string& body = "",
                            std::multimap<std::string, std::string> q = {}) {
    auto r = svc.handle(method, "/api/v1" + path, q, body, session);
    if (r.content_type != "application/json") return {r.status, json(r.body)};
    return {r.status, json::parse(r.body)};
  }
  json ok(const std::string& method, const std::string& path, const std::string& body = "",
          std::multimap<std::string, std::string> q = {}, int expect = 200) {
    auto [status, j] = call(method, path, body, q);
    INFO(j.dump());
    REQUIRE(status == expect);
    REQUIRE(j["ok"] == true);
    return j["data"];
  }
  json job(const json& submitted) {
    const std::string id = submitted["job_id"];
    auto st = svc.jobs().wait(id, std::chrono::seconds(60));
    REQUIRE(st);
    auto j = ok("GET", "/jobs/" + id);
    INFO(j.dump());
    REQUIRE(j["state"] == "done");
    return j["result"];
  }
};

std::string csv() { return to_csv(fx::synthetic_table(4, 3, 3, 3600, 17, true)); }

std::size_t count_lines(const std::string& s) { return std::size_t(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_SUITE("service") {
  TEST_CASE("end-to-end over the handler") {
    fx::TempDir dir;
    Service svc({dir.path(), 2, std::chrono::seconds(3600)});
    Api api{svc};

    CHECK(api.ok("GET", "/health")["version"] == CHRONOSEQ_VERSION);

    auto created = api.ok("POST", "/datasets", csv(), {}, 201);
    const std::string ds = created["dataset_id"];
    CHECK(created["report"]["rejected"] == 0);
    CHECK(api.ok("GET", "/datasets/" + ds)["participants"].size() == 4);

    // mining before deriving names the missing derivation
    auto [st, err] = api.call("POST", "/datasets/" + ds + "/mine", "{}");
    CHECK(st == 400);
    CHECK(err["error"]["code"] == "validation");
    CHECK(err["error"]["message"].get<std::string>().find("derivation") != std::string::npos);

    auto derived = api.job(api.ok("POST", "/datasets/" + ds + "/derive", R"({"interval_s": 300})", {}, 202));
    const std::string did = derived["derivation_id"];
    auto mined = api.job(api.ok("POST", "/datasets/" + ds + "/mine", R"({"min_support": 0.3, "max_gap": 1})", {}, 202));
    const std::string run_id = mined["run_id"];

    auto run = svc.repository().run(run_id);
    auto all = api.ok("GET", "/runs/" + run_id + "/sequences");
    CHECK(all["sequences"].size() == run->sequences.size());
    auto scatter = api.ok("GET", "/runs/" + run_id + "/sequences", "", {{"display", "scatter"}});
    CHECK(scatter["sequences"].size() <= run->sequences.size());
    for (const auto& s : scatter["sequences"]) CHECK(s["symbols"].size() >= 2);

    // occurrence stream length equals the artifact count
    for (std::size_t i = 0; i < std::min<std::size_t>(5, run->sequences.size()); ++i) {
      const auto& seq = run->sequences[i];
      auto r = svc.handle("GET", "/api/v1/runs/" + run_id + "/sequences/" + seq.id + "/occurrences", {}, "", "s1");
      CHECK(r.status == 200);
      CHECK(r.content_type == "application/x-ndjson");
      CHECK(count_lines(r.body) == seq.total_occurrences);
    }
    CHECK(api.call("GET", "/runs/" + run_id + "/sequences/nope/occurrences").first == 404);
    CHECK(api.call("GET", "/runs/nope").first == 404);

    auto days = api.ok("GET", "/datasets/" + ds + "/days", "", {{"participant", "p001"}, {"date", "2024-01-02"}});
    CHECK(days["days"].size() == 1);
    CHECK(api.call("GET", "/datasets/" + ds + "/days", "", {{"date", "Jan 2"}}).first == 400);

    // timelines
    const std::string f1 = run->sequences[0].id;
    auto tl = api.ok("POST", "/runs/" + run_id + "/timelines", json{{"focal", {f1}}}.dump(), {}, 201);
    const std::string tid = tl["id"];
    CHECK(tl["cohort_size"] == run->sequences[0].support_days);
    CHECK(api.call("GET", "/timelines/" + tid + "/adjacent", "", {{"region", "between"}, {"index", "0"}}).first == 400);
    CHECK(api.call("GET", "/timelines/" + tid + "/adjacent", "", {{"region", "sideways"}}).first == 400);
    auto after = api.ok("GET", "/timelines/" + tid + "/adjacent", "", {{"region", "after"}, {"top", "10"}});
    CHECK(after["items"].size() <= 10);

    const std::string f2 = after["items"].empty() ? f1 : after["items"][0]["sequence_id"].get<std::string>();
    auto grown = api.ok("POST", "/timelines/" + tid + "/focal", json{{"sid", f2}, {"position", 1}}.dump());
    CHECK(grown["focal_chain"].size() == 2);
    CHECK(grown["cohort_size"] <= tl["cohort_size"]);
    CHECK(api.call("POST", "/timelines/" + tid + "/focal", json{{"sid", f2}, {"version", 0}}.dump()).first == 409);
    CHECK(api.call("POST", "/timelines/" + tid + "/focal", json{{"sid", f2}, {"position", 9}}.dump()).first == 400);
    CHECK(api.ok("GET", "/timelines/" + tid + "/adjacent", "", {{"region", "between"}, {"index", "0"}}).is_object());

    auto cohort = api.ok("GET", "/timelines/" + tid + "/cohort");
    CHECK(cohort["size"] == grown["cohort_size"]);
    CHECK(cohort["days"].size() == cohort["size"].get<std::size_t>());

    auto clone = api.ok("POST", "/timelines/" + tid + "/clone", "", {}, 201);
    const std::string cid = clone["id"];
    CHECK(clone["parent_id"] == tid);
    auto cmp = api.ok("GET", "/timelines/compare", "", {{"a", tid}, {"b", cid}});
    CHECK(cmp["cohort"]["jaccard"] == 1.0);

    auto shrunk = api.ok("DELETE", "/timelines/" + cid + "/focal/1");
    CHECK(shrunk["focal_chain"].size() == 1);
    CHECK(shrunk["cohort_size"] == tl["cohort_size"]);
    CHECK(api.ok("GET", "/timelines/" + tid)["focal_chain"].size() == 2);  // parent untouched
    CHECK(api.call("DELETE", "/timelines/" + cid + "/focal/7").first == 400);
    CHECK(api.ok("DELETE", "/timelines/" + cid + "/focal/0")["dissolved"] == true);
    CHECK(api.call("GET", "/timelines/" + cid).first == 404);

    // motifs
    auto motif = api.job(api.ok("POST", "/datasets/" + ds + "/motifs",
                                R"({"config": {"stream": "activity", "k": 3, "match_threshold": 2.0}})", {}, 202));
    const std::string mrid = motif["motif_run_id"];
    auto mr = api.ok("GET", "/motif-runs/" + mrid);
    REQUIRE(mr["motifs"].size() == 3);
    for (const auto& m : mr["motifs"]) {
      auto r = svc.handle("GET", "/api/v1/motif-runs/" + mrid + "/motifs/" + m["motif_id"].get<std::string>() +
                                     "/occurrences", {}, "", "s1");
      CHECK(count_lines(r.body) == m["occurrence_count"].get<std::size_t>());
    }
    auto promoted = api.ok("POST", "/motifs/" + mr["motifs"][0]["motif_id"].get<std::string>() + "/promote");
    CHECK(promoted["derivation_id"] != did);
    CHECK(api.call("POST", "/motifs/zzz/promote").first == 404);

    CHECK(api.call("GET", "/nowhere").first == 404);
    CHECK(api.call("POST", "/datasets", "participant_id,stream,timestamp,value\n").first == 400);
    CHECK(api.call("POST", "/datasets/" + ds + "/derive", R"({"interval_s": 7})").first == 400);
    CHECK(api.call("POST", "/datasets/" + ds + "/derive", "not json").first == 400);
    CHECK(api.call("GET", "/jobs/job-999").first == 404);
  }

  TEST_CASE("concurrent mutations of one timeline serialize") {
    fx::TempDir dir;
    Service svc({dir.path(), 2, std::chrono::seconds(3600)});
    Api api{svc};
    const std::string ds = api.ok("POST", "/datasets", csv(), {}, 201)["dataset_id"];
    api.job(api.ok("POST", "/datasets/" + ds + "/derive", "{}", {}, 202));
    const std::string run_id = api.job(api.ok("POST", "/datasets/" + ds + "/mine", R"({"min_support": 0.3})", {}, 202))["run_id"];
    auto run = svc.repository().run(run_id);
    const std::string f = run->sequences.back().id;
    const std::string tid = api.ok("POST", "/runs/" + run_id + "/timelines", json{{"focal", {f}}}.dump(), {}, 201)["id"];

    std::atomic<int> ok{0}, conflict{0}, other{0};
    std::vector<std::thread> threads;
    for (int t = 0; t < 8; ++t) {
      threads.emplace_back([&] {
        for (int i = 0; i < 5; ++i) {
          auto r = svc.handle("POST", "/api/v1/timelines/" + tid + "/focal", {},
                              json{{"sid", f}, {"version", 0}}.dump(), "s1");
          (r.status == 200 ? ok : r.status == 409 ? conflict : other)++;
        }
      });
    }
    for (auto& t : threads) t.join();
    CHECK(ok == 1);
    CHECK(conflict == 39);
    CHECK(other == 0);
    auto final = api.ok("GET", "/timelines/" + tid);
    CHECK(final["version"] == 1);
    CHECK(final["focal_chain"].size() == 2);
  }

  TEST_CASE("sessions expire") {
    fx::TempDir dir;
    Service svc({dir.path(), 1, std::chrono::seconds(0)});
    Api a{svc, "a"}, b{svc, "b"};
    const std::string ds = a.ok("POST", "/datasets", csv(), {}, 201)["dataset_id"];
    a.job(a.ok("POST", "/datasets/" + ds + "/derive", "{}", {}, 202));
    const std::string run_id = a.job(a.ok("POST", "/datasets/" + ds + "/mine", "{}", {}, 202))["run_id"];
    auto run = svc.repository().run(run_id);
    const std::string tid =
        a.ok("POST", "/runs/" + run_id + "/timelines", json{{"focal", {run->sequences[0].id}}}.dump(), {}, 201)["id"];
    CHECK(a.call("GET", "/timelines/" + tid).first == 200);
    std::this_thread::sleep_for(std::chrono::milliseconds(1100));
    b.call("GET", "/health");  // another session sweeps idle ones
    CHECK(a.call("GET", "/timelines/" + tid).first == 404);
  }

  TEST_CASE("http transport") {
    fx::TempDir dir;
    Service svc({dir.path(), 2, std::chrono::seconds(3600)});
    HttpServer server(svc, "127.0.0.1", 0);
    REQUIRE(server.port() > 0);
    httplib::Client cli("127.0.0.1", server.port());
    auto h = cli.Get("/api/v1/health");
    REQUIRE(h);
    CHECK(h->status == 200);
    CHECK(json::parse(h->body)["data"]["version"] == CHRONOSEQ_VERSION);

    auto created = cli.Post("/api/v1/datasets", csv(), "text/csv");
    REQUIRE(created);
    CHECK(created->status == 201);
    const std::string ds = json::parse(created->body)["data"]["dataset_id"];
    auto job = cli.Post("/api/v1/datasets/" + ds + "/derive", "{}", "application/json");
    REQUIRE(job);
    CHECK(job->status == 202);
    const std::string jid = json::parse(job->body)["data"]["job_id"];
    svc.jobs().wait(jid, std::chrono::seconds(60));
    auto st = cli.Get("/api/v1/jobs/" + jid);
    REQUIRE(st);
    CHECK(json::parse(st->body)["data"]["state"] == "done");

    auto days = cli.Get("/api/v1/datasets/" + ds + "/days?participant=p000&date=2024-01-01");
    REQUIRE(days);
    CHECK(json::parse(days->body)["data"]["days"].size() == 1);

    auto missing = cli.Get("/api/v1/runs/unknown");
    REQUIRE(missing);
    CHECK(missing->status == 404);
    CHECK(json::parse(missing->body)["ok"] == false);
    server.stop();
  }
}

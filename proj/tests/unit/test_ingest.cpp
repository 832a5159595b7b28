#include <doctest.h>

#include "chronoseq/error.hpp"
#include "chronoseq/samples.hpp"
#include "chronoseq/time.hpp"

using namespace chronoseq;

TEST_SUITE("ingest") {
  TEST_CASE("timestamps parse in both forms") {
    auto a = parse_timestamp("2024-01-01T09:00:00Z");
    auto b = parse_timestamp("1704099600");
    REQUIRE(a);
    REQUIRE(b);
    CHECK(*a == *b);
    CHECK(format_instant(*a) == "2024-01-01T09:00:00Z");
    CHECK_FALSE(parse_timestamp("2024-13-01T00:00:00Z"));
    CHECK_FALSE(parse_timestamp("2024-01-01 09:00:00"));
    CHECK_FALSE(parse_timestamp("12abc"));
    CHECK(format_date(*parse_date("2024-02-29")) == "2024-02-29");
    CHECK_FALSE(parse_date("2023-02-29"));
  }

  TEST_CASE("three valid rows") {
    auto r = ingest_csv(
        "participant_id,stream,timestamp,value\n"
        "p1,activity,2024-01-01T09:00:00Z,0.5\n"
        "p1,activity,2024-01-01T09:00:01Z,0.7\n"
        "p1,stress,1704099600,0.2\n");
    CHECK(r.report.rows == 3);
    CHECK(r.report.rejected.empty());
    CHECK(r.report.participants.size() == 1);
    CHECK(r.table.sample_count() == 3);
  }

  TEST_CASE("malformed rows are rejected with reasons and ingestion continues") {
    auto r = ingest_csv(
        "participant_id,stream,timestamp,value\n"
        "p1,activity,2024-01-01T09:00:00Z,abc\n"
        "p1,activity,yesterday,1\n"
        "p1,activity,2024-01-01T09:00:00Z\n"
        "p1,stress,2024-01-01T09:00:00Z,1.5\n"
        "p1,smoking,2024-01-01T09:00:00Z,0.5\n"
        "p1,stress,2024-01-01T09:00:00Z,-1\n"
        "p2,activity,2024-01-01T09:00:00Z,3\n");
    CHECK(r.report.rows == 7);
    CHECK(r.report.accepted == 2);
    REQUIRE(r.report.rejected.size() == 5);
    CHECK(r.report.rejected[0].line == 2);
    CHECK(r.report.rejected[0].reason == "non-numeric value");
    CHECK(r.report.rejected[1].reason == "bad timestamp");
    CHECK(r.report.participants == std::vector<std::string>{"p1", "p2"});
  }

  TEST_CASE("empty source and missing header throw") {
    CHECK_THROWS_AS(ingest_csv(""), Error);
    CHECK_THROWS_AS(ingest_csv("p1,activity,1,2\n"), Error);
    CHECK_THROWS_AS(ingest_csv("participant_id,stream,timestamp,value\n"), Error);
  }

  TEST_CASE("duplicates are dropped, first wins, series strictly increasing") {
    auto r = ingest_csv(
        "participant_id,stream,timestamp,value\n"
        "p1,activity,20,2\n"
        "p1,activity,10,1\n"
        "p1,activity,20,9\n");
    CHECK(r.report.duplicates == 1);
    const Series* s = r.table.find("p1", "activity");
    REQUIRE(s);
    CHECK(s->t == std::vector<std::int64_t>{10, 20});
    CHECK(s->v == std::vector<double>{1, 2});
  }

  TEST_CASE("csv round trip") {
    auto r = ingest_csv(
        "participant_id,stream,timestamp,value\n"
        "b,stress,5,0.25\n"
        "a,activity,7,1.5\n"
        "a,activity,3,-0.125\n");
    const std::string csv = to_csv(r.table);
    auto again = ingest_csv(csv);
    CHECK(to_csv(again.table) == csv);
    CHECK(again.table.counts_per_stream() == r.table.counts_per_stream());
  }
}

#include <doctest.h>

#include <random>

#include "chronoseq/error.hpp"
#include "chronoseq/mining.hpp"
#include "oracles/oracles.hpp"
#include "support/fixtures.hpp"

using namespace chronoseq;

namespace {

// A=0 B=1 C=2 D=3
std::map<oracle::Seq, std::size_t> as_map(const std::vector<FrequentSequence>& seqs) {
  std::map<oracle::Seq, std::size_t> m;
  for (const auto& s : seqs) m[fx::codes(s.symbols)] = s.support_days;
  return m;
}

MiningConfig config(std::size_t min_support, MaxGap gap, std::size_t max_len = 6) {
  MiningConfig c;
  c.min_support = SupportThreshold::absolute(static_cast<std::int64_t>(min_support));
  c.max_gap = gap;
  c.max_len = max_len;
  return c;
}

const FrequentSequence* find(const std::vector<FrequentSequence>& seqs, const oracle::Seq& p) {
  for (const auto& s : seqs)
    if (fx::codes(s.symbols) == p) return &s;
  return nullptr;
}

}  // namespace

TEST_SUITE("mining") {
  TEST_CASE("support thresholds") {
    CHECK(SupportThreshold::fraction(0.2).resolve(10) == 2);
    CHECK(SupportThreshold::fraction(0.25).resolve(10) == 3);
    CHECK(SupportThreshold::fraction(0.3).resolve(10) == 3);  // 3.0000000000000004 is still 3
    CHECK(SupportThreshold::fraction(0.01).resolve(10) == 1);
    CHECK(SupportThreshold::absolute(4).resolve(10) == 4);
    CHECK_THROWS_AS(SupportThreshold::fraction(1.5), Error);
    CHECK_THROWS_AS(SupportThreshold::absolute(0), Error);
    MiningConfig c;
    c.max_len = 0;
    CHECK_THROWS_AS(c.validate(), Error);
  }

  TEST_CASE("worked example, unbounded gap") {
    auto days = fx::days_from_codes({{0, 1, 2}, {0, 1, 3}, {0, 2}});
    auto got = mine(days, config(2, std::nullopt));
    auto m = as_map(got);
    CHECK(m.at({0}) == 3);
    CHECK(m.at({1}) == 2);
    CHECK(m.at({2}) == 2);
    CHECK(m.at({0, 1}) == 2);
    CHECK(m.at({0, 2}) == 2);
    CHECK(m == oracle::frequent(fx::codes_of_days(days), std::nullopt, 6, 2));
    // support desc, then symbols
    for (std::size_t i = 1; i < got.size(); ++i) {
      CHECK(got[i - 1].support_days >= got[i].support_days);
      if (got[i - 1].support_days == got[i].support_days) CHECK(got[i - 1].symbols < got[i].symbols);
    }
  }

  TEST_CASE("worked example, zero gap drops A->C") {
    auto days = fx::days_from_codes({{0, 1, 2}, {0, 1, 3}, {0, 2}});
    auto m = as_map(mine(days, config(2, 0)));
    CHECK(m.count({0, 2}) == 0);
    CHECK(m.at({0, 1}) == 2);
    CHECK(m == oracle::frequent(fx::codes_of_days(days), 0, 6, 2));
  }

  TEST_CASE("empty input and unreachable support") {
    CHECK(mine({}, MiningConfig{}).empty());
    auto days = fx::days_from_codes({{0, 1}, {0}});
    CHECK(mine(days, config(3, 2)).empty());
  }

  TEST_CASE("oracle equivalence on random corpora") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 40; ++trial) {
      auto corpus = fx::random_corpus(rng);
      auto days = fx::days_from_codes(corpus);
      const auto coded = fx::codes_of_days(days);
      for (std::size_t ms : {1, 2, 3})
        for (MaxGap g : {MaxGap{0}, MaxGap{1}, MaxGap{2}, MaxGap{}})
          CHECK(as_map(mine(days, config(ms, g, 8))) == oracle::frequent(coded, g, 8, ms));
    }
  }

  TEST_CASE("anti-monotonicity and max_len") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
      auto days = fx::days_from_codes(fx::random_corpus(rng));
      auto seqs = mine(days, config(1, 1, 4));
      auto m = as_map(seqs);
      for (const auto& [p, s] : m) {
        CHECK(p.size() <= 4);
        if (p.size() > 1) {
          oracle::Seq prefix(p.begin(), p.end() - 1), suffix(p.begin() + 1, p.end());
          CHECK(m.at(prefix) >= s);
          CHECK(m.at(suffix) >= s);
        }
      }
    }
  }

  TEST_CASE("occurrence examples") {
    auto day = fx::days_from_codes({{0, 1, 0, 1}})[0];
    CHECK(find_occurrences(fx::labels({0, 1}), day, 0).size() == 2);

    auto aab = fx::days_from_codes({{0, 0, 1}})[0];
    auto occ = find_occurrences(fx::labels({0, 1}), aab, 0);
    REQUIRE(occ.size() == 1);
    CHECK(occ[0].event_indices == std::vector<std::size_t>{1, 2});
    CHECK(occ[0].start_time == aab.events[1].start);
    CHECK(occ[0].end_time == aab.events[2].end);

    CHECK(find_occurrences(fx::labels({3}), day, 2).empty());
  }

  TEST_CASE("occurrences match the exhaustive disjoint-span count") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 300; ++trial) {
      auto corpus = fx::random_corpus(rng, 1, 3, 10);
      auto day = fx::days_from_codes(corpus)[0];
      std::uniform_int_distribution<int> len(1, 3), sym(0, 2);
      oracle::Seq pat(static_cast<std::size_t>(len(rng)));
      for (auto& c : pat) c = sym(rng);
      for (MaxGap g : {MaxGap{0}, MaxGap{1}, MaxGap{2}, MaxGap{}}) {
        auto occ = find_occurrences(fx::labels(pat), day, g);
        CHECK(occ.size() == oracle::max_disjoint_occurrences(corpus[0], pat, g));
        for (std::size_t k = 0; k < occ.size(); ++k) {
          CHECK(oracle::gap_legal(occ[k].event_indices, g));
          if (k) CHECK(occ[k - 1].event_indices.back() < occ[k].event_indices.front());
          for (std::size_t j = 0; j < pat.size(); ++j) CHECK(corpus[0][occ[k].event_indices[j]] == pat[j]);
        }
      }
    }
  }

  TEST_CASE("repetition consistency and kebab offsets") {
    std::mt19937_64 rng(8);
    auto days = fx::days_from_codes(fx::random_corpus(rng, 10, 3, 8));
    auto cfg = config(2, 2);
    auto seqs = mine(days, cfg);
    REQUIRE_FALSE(seqs.empty());
    for (const auto& s : seqs) {
      std::size_t total = 0, support = 0;
      for (const auto& d : days) {
        auto n = find_occurrences(s.symbols, d, cfg.max_gap).size();
        total += n;
        support += n > 0;
      }
      CHECK(total == s.total_occurrences);
      CHECK(support == s.support_days);
      CHECK(s.total_occurrences >= s.support_days);
      CHECK(s.day_indices.size() == s.support_days);
      REQUIRE(s.intra_offsets.size() == s.symbols.size());
      CHECK(s.intra_offsets[0] == 0.0);
      for (std::size_t i = 1; i < s.intra_offsets.size(); ++i) CHECK(s.intra_offsets[i] >= s.intra_offsets[i - 1]);
      CHECK(s.id == pattern_id(s.symbols));
    }
  }

  TEST_CASE("determinism") {
    std::mt19937_64 rng(9);
    auto days = fx::days_from_codes(fx::random_corpus(rng));
    auto a = mine(days, MiningConfig{});
    auto b = mine(days, MiningConfig{});
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].id == b[i].id);
      CHECK(a[i].total_occurrences == b[i].total_occurrences);
    }
  }

  TEST_CASE("minimal prefix display") {
    auto days = fx::days_from_codes({{0, 1, 2}, {0, 1, 2}, {3, 4}, {3, 4}});
    auto seqs = mine(days, config(2, 0));
    auto shown = minimal_prefix_filter(seqs, 2);
    std::set<oracle::Seq> disp;
    for (auto i : shown) disp.insert(fx::codes(seqs[i].symbols));
    CHECK(disp.count({0, 1}));
    CHECK_FALSE(disp.count({0, 1, 2}));  // extension of a displayed sequence
    CHECK(disp.count({1, 2}));
    CHECK(disp.count({3, 4}));
    for (const auto& p : disp) CHECK(p.size() >= 2);
    for (const auto& p : disp)
      for (const auto& q : disp)
        if (p.size() < q.size()) CHECK_FALSE(std::equal(p.begin(), p.end(), q.begin()));
    CHECK(find(seqs, {0, 1, 2}) != nullptr);  // still queryable
  }

  TEST_CASE("scatter statistics") {
    ScatterAxes axes{5.0, 3.0};
    auto mon_tue_wed = scatter_stats(3, 3, axes);
    CHECK(mon_tue_wed.days_count == 3);
    CHECK(mon_tue_wed.avg_per_day == 1.0);
    CHECK(scatter_stats(3, 15, axes).avg_per_day == 5.0);
    auto one = scatter_stats(1, 1, axes);
    CHECK(one.days_count == 1);
    CHECK(one.avg_per_day == 1.0);
    CHECK(one.quadrant == Quadrant::rare);
    CHECK(scatter_stats(8, 40, axes).quadrant == Quadrant::ordinary);
    CHECK(scatter_stats(8, 8, axes).quadrant == Quadrant::habitual);
    CHECK(scatter_stats(2, 10, axes).quadrant == Quadrant::focusworthy);
    CHECK(ScatterAxes::for_dataset(10).x_mid == 5.0);
  }
}

#include "chronoseq/alignment.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "chronoseq/error.hpp"

namespace chronoseq {

std::string Region::to_string() const {
  switch (kind) {
    case Kind::before: return "before";
    case Kind::after: return "after";
    case Kind::between: return "between:" + std::to_string(index);
  }
  return "before";
}

std::optional<Region> Region::parse(std::string_view text) {
  if (text == "before") return before();
  if (text == "after") return after();
  constexpr std::string_view prefix = "between:";
  if (text.substr(0, prefix.size()) == prefix) {
    const auto digits = text.substr(prefix.size());
    if (digits.empty() || digits.size() > 9) return std::nullopt;
    std::size_t i = 0;
    for (char c : digits) {
      if (c < '0' || c > '9') return std::nullopt;
      i = i * 10 + static_cast<std::size_t>(c - '0');
    }
    return between(i);
  }
  return std::nullopt;
}

void Region::validate(std::size_t chain_length) const {
  if (kind == Kind::between && index + 1 >= chain_length)
    fail(ErrorCode::validation, "between index " + std::to_string(index) + " requires a chain of at least " +
                                    std::to_string(index + 2) + " focal sequences");
}

std::optional<std::vector<std::vector<std::size_t>>> assign_chain(const DayString& day,
                                                                  std::span<const std::vector<std::string>> chain,
                                                                  MaxGap max_gap) {
  const auto symbols = day.symbols();
  return assign_chain(std::span<const std::string>(symbols), chain, max_gap);
}

std::pair<std::size_t, std::size_t> region_span(const ChainAssignment& a, Region r, std::size_t day_size) {
  switch (r.kind) {
    case Region::Kind::before: return {0, a.focals.front().front()};
    case Region::Kind::after: return {a.focals.back().back() + 1, day_size};
    case Region::Kind::between: return {a.focals.at(r.index).back() + 1, a.focals.at(r.index + 1).front()};
  }
  return {0, 0};
}

std::vector<DayKey> Timeline::cohort_keys(const MiningRun& run) const {
  std::vector<DayKey> keys;
  keys.reserve(cohort.size());
  for (auto d : cohort) keys.push_back((*run.days)[d].key());
  return keys;
}

CohortResult compute_cohort(const MiningRun& run, std::span<const std::string> focal_chain,
                            std::optional<std::span<const std::uint32_t>> within) {
  if (focal_chain.empty()) fail(ErrorCode::validation, "focal chain must not be empty");

  std::vector<std::vector<std::uint32_t>> coded;
  std::vector<std::uint32_t> candidates;
  bool first = true;
  for (const auto& id : focal_chain) {
    const FrequentSequence* seq = run.find(id);
    if (!seq) fail(ErrorCode::not_found, "unknown sequence id " + id);
    std::vector<std::uint32_t> codes;
    for (const auto& label : seq->symbols) codes.push_back(*run.corpus.code(label));
    coded.push_back(std::move(codes));

    // A cohort day must support every focal on its own.
    if (first) {
      candidates = seq->day_indices;
      first = false;
    } else {
      std::vector<std::uint32_t> both;
      std::set_intersection(candidates.begin(), candidates.end(), seq->day_indices.begin(),
                            seq->day_indices.end(), std::back_inserter(both));
      candidates = std::move(both);
    }
  }
  if (within) {
    std::vector<std::uint32_t> both;
    std::set_intersection(candidates.begin(), candidates.end(), within->begin(), within->end(),
                          std::back_inserter(both));
    candidates = std::move(both);
  }

  CohortResult result;
  const std::span<const std::vector<std::uint32_t>> chain(coded);
  for (auto d : candidates) {
    const auto& seq = run.corpus.days[d];
    if (auto a = assign_chain(std::span<const std::uint32_t>(seq), chain, run.config.max_gap)) {
      result.days.push_back(d);
      result.assignments.push_back({d, std::move(*a)});
    }
  }
  return result;
}

namespace {

Timeline with_chain(const MiningRun& run, const Timeline& base, std::vector<std::string> chain,
                    std::optional<std::span<const std::uint32_t>> within) {
  Timeline t = base;
  auto cohort = compute_cohort(run, chain, within);
  t.focal_chain = std::move(chain);
  t.cohort = std::move(cohort.days);
  t.assignments = std::move(cohort.assignments);
  ++t.version;
  return t;
}

}  // namespace

Timeline create_timeline(const MiningRun& run, std::string id, std::vector<std::string> focal_chain) {
  Timeline base;
  base.id = std::move(id);
  base.run_id = run.run_id;
  Timeline t = with_chain(run, base, std::move(focal_chain), std::nullopt);
  t.version = 0;
  return t;
}

Timeline add_focal(const MiningRun& run, const Timeline& t, const std::string& sequence_id, std::size_t position) {
  if (position > t.focal_chain.size())
    fail(ErrorCode::validation, "focal position " + std::to_string(position) + " outside 0.." +
                                    std::to_string(t.focal_chain.size()));
  auto chain = t.focal_chain;
  chain.insert(chain.begin() + static_cast<std::ptrdiff_t>(position), sequence_id);
  return with_chain(run, t, std::move(chain), std::span<const std::uint32_t>(t.cohort));
}

Timeline remove_focal(const MiningRun& run, const Timeline& t, std::size_t position) {
  if (position >= t.focal_chain.size())
    fail(ErrorCode::validation, "no focal at position " + std::to_string(position));
  if (t.focal_chain.size() == 1)
    fail(ErrorCode::validation, "removing the only focal dissolves the timeline");
  auto chain = t.focal_chain;
  chain.erase(chain.begin() + static_cast<std::ptrdiff_t>(position));
  return with_chain(run, t, std::move(chain), std::nullopt);
}

Timeline clone_timeline(const Timeline& t, std::string new_id) {
  Timeline c = t;
  c.parent_id = t.id;
  c.id = std::move(new_id);
  c.version = 0;
  return c;
}

RegionCorpus region_corpus(const MiningRun& run, const Timeline& t, Region r) {
  r.validate(t.focal_chain.size());
  RegionCorpus rc;
  rc.days.reserve(t.cohort.size());
  for (const auto& a : t.assignments) {
    const DayString& day = (*run.days)[a.day_index];
    auto [b, e] = region_span(a, r, day.events.size());
    DayString sub{day.participant_id, day.day, {}};
    if (b < e)
      sub.events.assign(day.events.begin() + static_cast<std::ptrdiff_t>(b),
                        day.events.begin() + static_cast<std::ptrdiff_t>(e));
    rc.days.push_back(std::move(sub));
    rc.offsets.push_back(b);
  }
  return rc;
}

std::vector<AdjacentSequence> adjacent_all(const MiningRun& run, const Timeline& t, Region r) {
  const RegionCorpus rc = region_corpus(run, t, r);
  std::vector<AdjacentSequence> out;
  if (rc.days.empty()) return out;

  const auto mined = mine(rc.days, run.config);
  out.reserve(mined.size());
  for (const auto& fs : mined) {
    AdjacentSequence adj;
    adj.sequence_id = fs.id;
    adj.symbols = fs.symbols;
    adj.region_support = fs.support_days;
    adj.total_occurrences = fs.total_occurrences;

    double sum = 0.0;
    for (auto d : fs.day_indices) {
      const auto& a = t.assignments[d];
      const DayString& day = (*run.days)[a.day_index];
      const auto occ = find_occurrences(fs.symbols, rc.days[d], run.config.max_gap);
      // The occurrence nearest the adjoining focal boundary.
      switch (r.kind) {
        case Region::Kind::before: {
          const Instant focal_start = day.events[a.focals.front().front()].start;
          sum += static_cast<double>((occ.back().end_time - focal_start).count());
          break;
        }
        case Region::Kind::after: {
          const Instant focal_end = day.events[a.focals.back().back()].end;
          sum += static_cast<double>((occ.front().start_time - focal_end).count());
          break;
        }
        case Region::Kind::between: {
          const Instant focal_end = day.events[a.focals[r.index].back()].end;
          sum += static_cast<double>((occ.front().start_time - focal_end).count());
          break;
        }
      }
    }
    adj.mean_offset_s = fs.support_days ? sum / static_cast<double>(fs.support_days) : 0.0;
    out.push_back(std::move(adj));
  }

  std::sort(out.begin(), out.end(), [](const AdjacentSequence& a, const AdjacentSequence& b) {
    if (a.region_support != b.region_support) return a.region_support > b.region_support;
    const double da = std::abs(a.mean_offset_s), db = std::abs(b.mean_offset_s);
    if (da != db) return da < db;
    return a.symbols < b.symbols;
  });
  for (std::size_t i = 0; i < out.size(); ++i) out[i].rank = i + 1;
  return out;
}

AdjacencyPage adjacent(const MiningRun& run, const Timeline& t, Region r, std::size_t top_n, std::size_t page) {
  if (top_n == 0) fail(ErrorCode::validation, "top must be >= 1");
  auto all = adjacent_all(run, t, r);
  AdjacencyPage p;
  p.total = all.size();
  p.page = page;
  p.page_size = top_n;
  const std::size_t begin = std::min(all.size(), page * top_n);
  const std::size_t end = std::min(all.size(), begin + top_n);
  p.items.assign(std::make_move_iterator(all.begin() + static_cast<std::ptrdiff_t>(begin)),
                 std::make_move_iterator(all.begin() + static_cast<std::ptrdiff_t>(end)));
  return p;
}

ComparisonReport compare_timelines(const MiningRun& run, const Timeline& a, const Timeline& b) {
  if (a.run_id != b.run_id) fail(ErrorCode::validation, "timelines derive from different runs");

  ComparisonReport rep;
  std::vector<std::uint32_t> shared;
  std::set_intersection(a.cohort.begin(), a.cohort.end(), b.cohort.begin(), b.cohort.end(),
                        std::back_inserter(shared));
  rep.shared = shared.size();
  rep.a_only = a.cohort.size() - shared.size();
  rep.b_only = b.cohort.size() - shared.size();
  const std::size_t uni = rep.shared + rep.a_only + rep.b_only;
  rep.jaccard = uni == 0 ? 1.0 : static_cast<double>(rep.shared) / static_cast<double>(uni);

  std::vector<Region> regions{Region::before(), Region::after()};
  const std::size_t common = std::min(a.focal_chain.size(), b.focal_chain.size());
  for (std::size_t i = 0; i + 1 < common; ++i) regions.push_back(Region::between(i));

  for (const auto& r : regions) {
    std::map<std::vector<std::string>, std::size_t> sa, sb;
    for (auto& adj : adjacent_all(run, a, r)) sa.emplace(adj.symbols, adj.region_support);
    for (auto& adj : adjacent_all(run, b, r)) sb.emplace(adj.symbols, adj.region_support);
    RegionDiff diff;
    diff.selector = r;
    for (const auto& [pat, sup] : sa) {
      auto it = sb.find(pat);
      if (it == sb.end()) {
        diff.only_a.push_back(pat);
      } else if (it->second != sup) {
        diff.deltas.push_back({pat, sup, it->second});
      }
    }
    for (const auto& [pat, _] : sb)
      if (!sa.contains(pat)) diff.only_b.push_back(pat);
    rep.regions.push_back(std::move(diff));
  }
  return rep;
}

}  // namespace chronoseq

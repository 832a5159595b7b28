#include "chronoseq/mining.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "chronoseq/error.hpp"
#include "chronoseq/hash.hpp"

namespace chronoseq {

SupportThreshold SupportThreshold::absolute(std::int64_t days) {
  if (days < 1) fail(ErrorCode::validation, "absolute min_support must be >= 1");
  return {false, static_cast<double>(days)};
}

SupportThreshold SupportThreshold::fraction(double f) {
  if (!(f > 0.0 && f <= 1.0)) fail(ErrorCode::validation, "fractional min_support must lie in (0,1]");
  return {true, f};
}

std::size_t SupportThreshold::resolve(std::size_t n_days) const {
  if (!is_fraction_) return static_cast<std::size_t>(value_);
  // Guard against 0.2 * 10 evaluating to 2.0000000000000004.
  const double raw = value_ * static_cast<double>(n_days);
  const auto ceiled = static_cast<std::size_t>(std::ceil(raw - 1e-9));
  return std::max<std::size_t>(1, ceiled);
}

void MiningConfig::validate() const {
  if (max_len == 0) fail(ErrorCode::validation, "max_len must be >= 1");
}

std::string_view to_string(Quadrant q) {
  switch (q) {
    case Quadrant::ordinary: return "ordinary";
    case Quadrant::habitual: return "habitual";
    case Quadrant::rare: return "rare";
    case Quadrant::focusworthy: return "focusworthy";
  }
  return "rare";
}

std::string pattern_id(std::span<const std::string> symbols) {
  std::string joined;
  for (const auto& s : symbols) {
    joined += s;
    joined += '\x1f';
  }
  return content_id(joined);
}

EncodedCorpus EncodedCorpus::build(std::span<const DayString> days) {
  EncodedCorpus c;
  std::map<std::string, std::uint32_t> codes;
  for (const auto& d : days)
    for (const auto& e : d.events) codes.emplace(event_symbol(e), 0);
  std::uint32_t next = 0;
  for (auto& [label, code] : codes) {
    code = next++;
    c.alphabet.push_back(label);
  }
  c.days.reserve(days.size());
  for (const auto& d : days) {
    std::vector<std::uint32_t> seq;
    seq.reserve(d.events.size());
    for (const auto& e : d.events) seq.push_back(codes.at(event_symbol(e)));
    c.days.push_back(std::move(seq));
  }
  return c;
}

std::optional<std::uint32_t> EncodedCorpus::code(std::string_view label) const {
  auto it = std::lower_bound(alphabet.begin(), alphabet.end(), label);
  if (it == alphabet.end() || *it != label) return std::nullopt;
  return static_cast<std::uint32_t>(it - alphabet.begin());
}

ScatterStats scatter_stats(std::size_t days_count, std::size_t total_occurrences, const ScatterAxes& axes) {
  ScatterStats s;
  s.days_count = days_count;
  s.avg_per_day = days_count == 0 ? 0.0 : static_cast<double>(total_occurrences) / static_cast<double>(days_count);
  const bool many_days = static_cast<double>(days_count) >= axes.x_mid;
  const bool many_per_day = s.avg_per_day >= axes.y_mid;
  if (many_days) {
    s.quadrant = many_per_day ? Quadrant::ordinary : Quadrant::habitual;
  } else {
    s.quadrant = many_per_day ? Quadrant::focusworthy : Quadrant::rare;
  }
  return s;
}

ScatterStats scatter_stats(const FrequentSequence& seq, const ScatterAxes& axes) {
  return scatter_stats(seq.support_days, seq.total_occurrences, axes);
}

namespace {

// Projected database entry: a day and every index where the current prefix
// can end legally. With an unbounded gap only the first end matters.
struct Projection {
  std::uint32_t day;
  std::vector<std::uint32_t> ends;
};

class PrefixSpan {
 public:
  PrefixSpan(const EncodedCorpus& corpus, std::span<const DayString> days, const MiningConfig& cfg,
             std::size_t min_support)
      : corpus_(corpus), days_(days), cfg_(cfg), min_support_(min_support) {}

  std::vector<FrequentSequence> run_from(std::uint32_t first, const std::vector<Projection>& root) {
    std::vector<FrequentSequence> out;
    std::vector<std::uint32_t> prefix{first};
    grow(prefix, root, out);
    return out;
  }

  std::vector<std::vector<Projection>> roots() const {
    const std::size_t a = corpus_.alphabet.size();
    std::vector<std::vector<Projection>> proj(a);
    for (std::uint32_t d = 0; d < corpus_.days.size(); ++d) {
      const auto& seq = corpus_.days[d];
      for (std::uint32_t j = 0; j < seq.size(); ++j) {
        auto& p = proj[seq[j]];
        if (p.empty() || p.back().day != d) {
          p.push_back({d, {j}});
        } else if (cfg_.max_gap) {
          p.back().ends.push_back(j);
        }
      }
    }
    return proj;
  }

 private:
  void grow(std::vector<std::uint32_t>& prefix, const std::vector<Projection>& proj,
            std::vector<FrequentSequence>& out) {
    out.push_back(summarize(prefix, proj));
    if (prefix.size() >= cfg_.max_len) return;

    const std::size_t a = corpus_.alphabet.size();
    std::vector<std::vector<Projection>> next(a);
    std::vector<std::int64_t> last_added(a, -1);
    for (const auto& entry : proj) {
      const auto& seq = corpus_.days[entry.day];
      std::fill(last_added.begin(), last_added.end(), -1);
      for (std::uint32_t e : entry.ends) {
        std::size_t stop = seq.size();
        if (cfg_.max_gap) stop = std::min<std::size_t>(seq.size(), e + *cfg_.max_gap + 2);
        for (std::size_t j = e + 1; j < stop; ++j) {
          const std::uint32_t s = seq[j];
          if (static_cast<std::int64_t>(j) <= last_added[s]) continue;
          if (!cfg_.max_gap && last_added[s] >= 0) continue;
          auto& p = next[s];
          if (p.empty() || p.back().day != entry.day) p.push_back({entry.day, {}});
          p.back().ends.push_back(static_cast<std::uint32_t>(j));
          last_added[s] = static_cast<std::int64_t>(j);
        }
      }
    }
    for (std::uint32_t s = 0; s < a; ++s) {
      if (next[s].size() < min_support_) continue;
      prefix.push_back(s);
      grow(prefix, next[s], out);
      prefix.pop_back();
    }
  }

  FrequentSequence summarize(const std::vector<std::uint32_t>& prefix, const std::vector<Projection>& proj) const {
    FrequentSequence fs;
    for (auto c : prefix) fs.symbols.push_back(corpus_.alphabet[c]);
    fs.id = pattern_id(fs.symbols);
    fs.support_days = proj.size();
    fs.day_indices.reserve(proj.size());
    std::vector<double> offset_sum(prefix.size(), 0.0);
    const std::span<const std::uint32_t> pat(prefix);
    for (const auto& entry : proj) {
      fs.day_indices.push_back(entry.day);
      const auto& seq = corpus_.days[entry.day];
      const auto& events = days_[entry.day].events;
      auto occ = greedy_occurrences(std::span<const std::uint32_t>(seq), pat, cfg_.max_gap);
      fs.total_occurrences += occ.size();
      for (const auto& idx : occ) {
        const Instant base = events[idx.front()].start;
        for (std::size_t k = 0; k < idx.size(); ++k)
          offset_sum[k] += static_cast<double>((events[idx[k]].start - base).count());
      }
    }
    fs.intra_offsets.resize(prefix.size(), 0.0);
    if (fs.total_occurrences > 0)
      for (std::size_t k = 0; k < prefix.size(); ++k)
        fs.intra_offsets[k] = offset_sum[k] / static_cast<double>(fs.total_occurrences);
    return fs;
  }

  const EncodedCorpus& corpus_;
  std::span<const DayString> days_;
  const MiningConfig& cfg_;
  std::size_t min_support_;
};

bool output_order(const FrequentSequence& a, const FrequentSequence& b) {
  if (a.support_days != b.support_days) return a.support_days > b.support_days;
  return a.symbols < b.symbols;
}

}  // namespace

std::vector<FrequentSequence> mine(std::span<const DayString> days, const MiningConfig& cfg,
                                   std::optional<ScatterAxes> axes) {
  cfg.validate();
  std::vector<FrequentSequence> out;
  if (days.empty()) return out;
  const std::size_t min_support = cfg.min_support.resolve(days.size());
  if (min_support > days.size()) return out;

  const auto corpus = EncodedCorpus::build(days);
  PrefixSpan miner(corpus, days, cfg, min_support);
  const auto roots = miner.roots();

  std::vector<std::uint32_t> frequent_roots;
  for (std::uint32_t s = 0; s < roots.size(); ++s)
    if (roots[s].size() >= min_support) frequent_roots.push_back(s);

  std::vector<std::vector<FrequentSequence>> partial(frequent_roots.size());
  std::atomic<std::size_t> next{0};
  const unsigned threads = std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(),
                                                          static_cast<unsigned>(frequent_roots.size())));
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t k = next++; k < frequent_roots.size(); k = next++)
          partial[k] = miner.run_from(frequent_roots[k], roots[frequent_roots[k]]);
      });
    }
  }
  for (auto& p : partial) out.insert(out.end(), std::make_move_iterator(p.begin()), std::make_move_iterator(p.end()));
  std::sort(out.begin(), out.end(), output_order);

  const ScatterAxes ax = axes.value_or(ScatterAxes::for_dataset(days.size()));
  for (auto& fs : out) fs.scatter = scatter_stats(fs, ax);
  return out;
}

std::vector<Occurrence> find_occurrences(std::span<const std::string> pattern, const DayString& day,
                                         MaxGap max_gap) {
  std::vector<Occurrence> out;
  if (pattern.empty()) return out;
  const auto symbols = day.symbols();
  for (auto& idx : greedy_occurrences(std::span<const std::string>(symbols), pattern, max_gap)) {
    Occurrence o;
    o.participant_id = day.participant_id;
    o.day = day.day;
    o.start_time = day.events[idx.front()].start;
    o.end_time = day.events[idx.back()].end;
    o.event_indices = std::move(idx);
    out.push_back(std::move(o));
  }
  return out;
}

std::vector<std::size_t> minimal_prefix_filter(std::span<const FrequentSequence> sequences,
                                               std::size_t min_len_display) {
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < sequences.size(); ++i)
    if (sequences[i].symbols.size() >= min_len_display) candidates.push_back(i);

  // Shorter candidates are decided first; a sequence is shown only if none of
  // its proper prefixes is shown.
  std::stable_sort(candidates.begin(), candidates.end(), [&](std::size_t a, std::size_t b) {
    return sequences[a].symbols.size() < sequences[b].symbols.size();
  });
  std::map<std::vector<std::string>, bool> shown;
  std::vector<std::size_t> kept;
  for (auto i : candidates) {
    const auto& sym = sequences[i].symbols;
    bool has_prefix = false;
    for (std::size_t len = 1; len < sym.size() && !has_prefix; ++len) {
      auto it = shown.find(std::vector<std::string>(sym.begin(), sym.begin() + static_cast<std::ptrdiff_t>(len)));
      has_prefix = it != shown.end();
    }
    if (!has_prefix) {
      shown.emplace(sym, true);
      kept.push_back(i);
    }
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

const FrequentSequence* MiningRun::find(std::string_view sequence_id) const {
  auto it = by_id_.find(sequence_id);
  return it == by_id_.end() ? nullptr : &sequences[it->second];
}

void MiningRun::reindex() {
  by_id_.clear();
  for (std::size_t i = 0; i < sequences.size(); ++i) by_id_.emplace(sequences[i].id, i);
}

std::vector<Occurrence> MiningRun::occurrences(const FrequentSequence& seq) const {
  std::vector<Occurrence> out;
  for (auto d : seq.day_indices) {
    auto occ = find_occurrences(seq.symbols, (*days)[d], config.max_gap);
    out.insert(out.end(), std::make_move_iterator(occ.begin()), std::make_move_iterator(occ.end()));
  }
  return out;
}

MiningRun make_run(std::string run_id, std::string derivation_id, std::shared_ptr<const std::vector<DayString>> days,
                   const MiningConfig& cfg) {
  MiningRun run;
  run.run_id = std::move(run_id);
  run.derivation_id = std::move(derivation_id);
  run.config = cfg;
  run.days = std::move(days);
  run.corpus = EncodedCorpus::build(*run.days);
  run.sequences = mine(*run.days, cfg);
  run.reindex();
  return run;
}

}  // namespace chronoseq

#include "chronoseq/motif.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <map>
#include <random>

#include "chronoseq/derivation.hpp"
#include "chronoseq/error.hpp"

namespace chronoseq {
namespace {

// Inverse standard normal CDF at i/a, i = 1..a-1, made exactly antisymmetric.
constexpr std::array<std::array<double, 9>, 9> kBreakpoints{{
    {0},
    {-0.4307272992954575, 0.4307272992954575},
    {-0.6744897501960817, 0, 0.6744897501960817},
    {-0.8416212335729142, -0.2533471031357997, 0.2533471031357997, 0.8416212335729142},
    {-0.9674215661017010, -0.4307272992954575, 0, 0.4307272992954575, 0.9674215661017010},
    {-1.0675705238781413, -0.5659488219328631, -0.1800123697927050, 0.1800123697927050, 0.5659488219328631,
     1.0675705238781413},
    {-1.1503493803760079, -0.6744897501960817, -0.3186393639643751, 0, 0.3186393639643751, 0.6744897501960817,
     1.1503493803760079},
    {-1.2206403488473498, -0.7647096737863871, -0.4307272992954575, -0.1397102988818621, 0.1397102988818621,
     0.4307272992954575, 0.7647096737863871, 1.2206403488473498},
    {-1.2815515655446004, -0.8416212335729142, -0.5244005127080408, -0.2533471031357997, 0, 0.2533471031357997,
     0.5244005127080408, 0.8416212335729142, 1.2815515655446004},
}};

// Uniform double in [0,1) from the raw 64-bit stream; independent of the
// standard library's distribution implementations.
double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::int64_t median_period(const Series& s) {
  if (s.size() < 2) return 1;
  std::vector<std::int64_t> d;
  d.reserve(s.size() - 1);
  for (std::size_t i = 1; i < s.size(); ++i) d.push_back(s.t[i] - s.t[i - 1]);
  std::nth_element(d.begin(), d.begin() + d.size() / 2, d.end());
  return std::max<std::int64_t>(1, d[d.size() / 2]);
}

}  // namespace

std::span<const double> sax_breakpoints(std::size_t alphabet) {
  if (alphabet < 2 || alphabet > 10) fail(ErrorCode::validation, "SAX alphabet must lie in 2..10");
  return {kBreakpoints[alphabet - 2].data(), alphabet - 1};
}

std::size_t sax_symbol(double value, std::size_t alphabet) {
  const auto bp = sax_breakpoints(alphabet);
  return static_cast<std::size_t>(std::upper_bound(bp.begin(), bp.end(), value) - bp.begin());
}

void MotifConfig::validate() const {
  if (stream.empty()) fail(ErrorCode::validation, "motif stream name required");
  if (window_s <= 0) fail(ErrorCode::validation, "window_s must be positive");
  if (stride() <= 0) fail(ErrorCode::validation, "stride_s must be positive");
  if (paa_segments == 0) fail(ErrorCode::validation, "paa_segments must be >= 1");
  if (sax_alphabet < 2 || sax_alphabet > 10) fail(ErrorCode::validation, "sax_alphabet must lie in 2..10");
  if (k == 0) fail(ErrorCode::validation, "k must be >= 1");
  if (!(match_threshold >= 0.0)) fail(ErrorCode::validation, "match_threshold must be non-negative");
}

void window_transform(const std::string& participant, const Series& series, const MotifConfig& cfg,
                      FeatureSet& out) {
  if (series.empty()) return;
  const std::int64_t period = median_period(series);
  const auto n = static_cast<std::size_t>(cfg.window_s / period);
  const auto step = static_cast<std::size_t>(std::max<std::int64_t>(1, cfg.stride() / period));
  if (n < cfg.paa_segments || n == 0 || series.size() < n) return;

  const bool has_sentinel = cfg.stream == streams::stress;
  std::vector<Eigen::VectorXd> rows;
  for (std::size_t i = 0; i + n <= series.size(); i += step) {
    if (series.t[i + n - 1] - series.t[i] != static_cast<std::int64_t>(n - 1) * period) continue;
    const Eigen::Map<const Eigen::VectorXd> raw(series.v.data() + i, static_cast<Eigen::Index>(n));
    if (has_sentinel && (raw.array() == kStressUnavailable).any()) continue;

    const Eigen::VectorXd z = znormalize(raw);
    FeatureSet::Window w;
    w.participant_id = participant;
    w.start = from_epoch(series.t[i]);
    w.end = from_epoch(series.t[i + n - 1] + period);
    w.flat = z.isZero(0.0);
    Eigen::VectorXd p = paa(z, static_cast<Eigen::Index>(cfg.paa_segments));
    w.sax_word = sax_word(p, cfg.sax_alphabet);
    out.windows.push_back(std::move(w));
    rows.push_back(std::move(p));
  }
  const Eigen::Index old = out.paa.rows();
  out.paa.conservativeResize(old + static_cast<Eigen::Index>(rows.size()),
                             static_cast<Eigen::Index>(cfg.paa_segments));
  for (std::size_t r = 0; r < rows.size(); ++r) out.paa.row(old + static_cast<Eigen::Index>(r)) = rows[r].transpose();
}

FeatureSet window_transform(const SampleTable& table, const MotifConfig& cfg) {
  cfg.validate();
  FeatureSet out;
  out.paa.resize(0, static_cast<Eigen::Index>(cfg.paa_segments));
  for (const auto& [pid, per_stream] : table.participants()) {
    auto it = per_stream.find(cfg.stream);
    if (it == per_stream.end()) continue;
    window_transform(pid, it->second, cfg, out);
  }
  if (out.windows.empty())
    out.warnings.push_back("stream '" + cfg.stream + "' has no complete window of " + std::to_string(cfg.window_s) +
                           " s");
  return out;
}

FeatureSet scan_windows(const SampleTable& table, const MotifConfig& cfg) {
  MotifConfig scan = cfg;
  scan.stride_s = cfg.scan_step();
  return window_transform(table, scan);
}

KMeansResult kmeans(const Eigen::MatrixXd& points, std::size_t k, std::uint64_t seed) {
  const Eigen::Index n = points.rows();
  if (k == 0) fail(ErrorCode::validation, "k must be >= 1");
  if (static_cast<Eigen::Index>(k) > n)
    fail(ErrorCode::validation, "only " + std::to_string(n) + " windows for k=" + std::to_string(k) +
                                    "; choose a smaller k");
  const auto K = static_cast<Eigen::Index>(k);

  KMeansResult res;
  res.centroids.resize(K, points.cols());

  // k-means++ seeding.
  std::mt19937_64 rng(seed);
  Eigen::VectorXd d2 = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity());
  Eigen::Index pick = static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(n));
  for (Eigen::Index c = 0; c < K; ++c) {
    if (c > 0) {
      const double total = d2.sum();
      if (total > 0.0) {
        const double target = unit_uniform(rng) * total;
        double acc = 0.0;
        pick = n - 1;
        for (Eigen::Index i = 0; i < n; ++i) {
          acc += d2(i);
          if (acc > target) {
            pick = i;
            break;
          }
        }
      } else {
        pick = c;  // all points coincide with chosen centroids
      }
    }
    res.centroids.row(c) = points.row(pick);
    d2 = d2.cwiseMin((points.rowwise() - points.row(pick)).rowwise().squaredNorm());
  }

  res.labels.assign(static_cast<std::size_t>(n), 0);
  Eigen::VectorXd dist(n);
  for (std::size_t iter = 0; iter < 100; ++iter) {
    res.iterations = iter + 1;
    // Assignment; ties go to the lower cluster index.
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::Index best = 0;
      const double d = (res.centroids.rowwise() - points.row(i)).rowwise().squaredNorm().minCoeff(&best);
      res.labels[static_cast<std::size_t>(i)] = static_cast<std::size_t>(best);
      dist(i) = d;
    }
    std::vector<Eigen::Index> counts(static_cast<std::size_t>(K), 0);
    for (auto l : res.labels) ++counts[l];
    for (Eigen::Index c = 0; c < K; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) continue;
      Eigen::Index far = -1;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (counts[res.labels[static_cast<std::size_t>(i)]] > 1 && (far < 0 || dist(i) > dist(far))) far = i;
      }
      --counts[res.labels[static_cast<std::size_t>(far)]];
      ++counts[static_cast<std::size_t>(c)];
      res.labels[static_cast<std::size_t>(far)] = static_cast<std::size_t>(c);
      res.centroids.row(c) = points.row(far);
      dist(far) = 0.0;
    }
    const double objective = dist.sum();
    if (!res.objective.empty() && objective > res.objective.back() * (1.0 + 1e-12) + 1e-12)
      fail(ErrorCode::internal, "k-means objective increased");
    res.objective.push_back(objective);

    Eigen::MatrixXd next = Eigen::MatrixXd::Zero(K, points.cols());
    for (Eigen::Index i = 0; i < n; ++i) next.row(static_cast<Eigen::Index>(res.labels[static_cast<std::size_t>(i)])) += points.row(i);
    for (Eigen::Index c = 0; c < K; ++c) next.row(c) /= static_cast<double>(counts[static_cast<std::size_t>(c)]);
    const double shift = (next - res.centroids).rowwise().norm().maxCoeff();
    res.centroids = std::move(next);
    if (shift < 1e-6) break;
  }
  return res;
}

MotifRun cluster_motifs(const FeatureSet& features, const MotifConfig& cfg, std::string motif_run_id) {
  cfg.validate();
  MotifRun run;
  run.motif_run_id = std::move(motif_run_id);
  run.config = cfg;
  run.clustering = kmeans(features.paa, cfg.k, cfg.seed);

  const std::string prefix = run.motif_run_id.substr(0, 8);
  std::vector<std::map<std::string, std::size_t>> words(cfg.k);
  for (std::size_t i = 0; i < features.windows.size(); ++i) ++words[run.clustering.labels[i]][features.windows[i].sax_word];
  for (std::size_t c = 0; c < cfg.k; ++c) {
    Motif m;
    m.motif_id = prefix + "-m" + std::to_string(c);
    m.centroid = run.clustering.centroids.row(static_cast<Eigen::Index>(c)).transpose();
    std::size_t best = 0;
    for (const auto& [word, count] : words[c]) {
      m.member_count += count;
      if (count > best) {  // map order makes ties resolve to the smallest word
        best = count;
        m.sax_word = word;
      }
    }
    run.motifs.push_back(std::move(m));
  }
  return run;
}

const Motif* MotifRun::find(std::string_view motif_id) const {
  for (const auto& m : motifs)
    if (m.motif_id == motif_id) return &m;
  return nullptr;
}

std::vector<MotifOccurrence> locate_motif(const Motif& motif, const FeatureSet& features, const MotifConfig& cfg) {
  std::vector<MotifOccurrence> candidates;
  for (std::size_t i = 0; i < features.windows.size(); ++i) {
    const double d = (features.paa.row(static_cast<Eigen::Index>(i)).transpose() - motif.centroid).norm();
    if (d <= cfg.match_threshold) {
      const auto& w = features.windows[i];
      candidates.push_back({w.participant_id, w.start, w.end, d});
    }
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const MotifOccurrence& a, const MotifOccurrence& b) { return a.distance < b.distance; });

  std::map<std::string, std::vector<std::pair<Instant, Instant>>> kept_spans;
  std::vector<MotifOccurrence> kept;
  for (auto& c : candidates) {
    auto& spans = kept_spans[c.participant_id];
    const bool overlaps = std::any_of(spans.begin(), spans.end(),
                                      [&](const auto& s) { return c.start < s.second && s.first < c.end; });
    if (overlaps) continue;
    spans.emplace_back(c.start, c.end);
    kept.push_back(std::move(c));
  }
  std::sort(kept.begin(), kept.end(), [](const MotifOccurrence& a, const MotifOccurrence& b) {
    return std::tie(a.participant_id, a.start) < std::tie(b.participant_id, b.start);
  });
  return kept;
}

std::vector<EventRecord> promote_motif(const Motif& motif, std::vector<EventRecord> events) {
  for (const auto& occ : motif.occurrences) {
    for (auto [s, e] : split_at_midnight(occ.start, occ.end)) {
      EventRecord ev;
      ev.participant_id = occ.participant_id;
      ev.day = day_of(s);
      ev.start = s;
      ev.end = e;
      ev.kind = EventKind::motif;
      ev.motif_id = motif.motif_id;
      if (std::find(events.begin(), events.end(), ev) == events.end()) events.push_back(std::move(ev));
    }
  }
  sort_events(events);
  return events;
}

}  // namespace chronoseq

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "chronoseq/events.hpp"
#include "chronoseq/samples.hpp"

namespace chronoseq {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Standard deviation below which a window counts as flat.
inline constexpr double kFlatEpsilon = 1e-8;

/// Z-normalizes a vector (population standard deviation). Flat inputs map to zeros.
template <typename Derived>
VectorX<typename Derived::Scalar> znormalize(const Eigen::MatrixBase<Derived>& x,
                                             typename Derived::Scalar eps = typename Derived::Scalar(kFlatEpsilon)) {
  using Scalar = typename Derived::Scalar;
  const auto n = x.size();
  if (n == 0) return VectorX<Scalar>();
  const Scalar mean = x.mean();
  VectorX<Scalar> centered = x.array() - mean;
  const Scalar sd = std::sqrt(centered.squaredNorm() / Scalar(n));
  if (sd < eps) return VectorX<Scalar>::Zero(n);
  return centered / sd;
}

/// Piecewise aggregate approximation to `segments` equal-width means. When the
/// length is not a multiple of `segments`, boundary samples contribute
/// fractionally to both neighbours.
template <typename Derived>
VectorX<typename Derived::Scalar> paa(const Eigen::MatrixBase<Derived>& x, Eigen::Index segments) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = x.size();
  VectorX<Scalar> out = VectorX<Scalar>::Zero(segments);
  if (n == 0 || segments <= 0) return out;
  if (n % segments == 0) {
    const Eigen::Index w = n / segments;
    for (Eigen::Index j = 0; j < segments; ++j) out(j) = x.segment(j * w, w).mean();
    return out;
  }
  // Work in units of 1/segments of a sample so every boundary is integral.
  for (Eigen::Index j = 0; j < segments; ++j) {
    const Eigen::Index lo = j * n, hi = (j + 1) * n;  // [lo, hi) in scaled units
    Scalar acc(0);
    for (Eigen::Index i = lo / segments; i * segments < hi; ++i) {
      const Eigen::Index a = std::max(lo, i * segments), b = std::min(hi, (i + 1) * segments);
      acc += x(i) * Scalar(b - a);
    }
    out(j) = acc / Scalar(n);
  }
  return out;
}

/// Gaussian breakpoints splitting N(0,1) into `alphabet` equiprobable regions (2..10).
std::span<const double> sax_breakpoints(std::size_t alphabet);

/// Symbol index of a value: the number of breakpoints it is not below.
std::size_t sax_symbol(double value, std::size_t alphabet);

/// Letters 'a'.. for a PAA vector.
template <typename Derived>
std::string sax_word(const Eigen::MatrixBase<Derived>& paa_values, std::size_t alphabet) {
  std::string w;
  w.reserve(static_cast<std::size_t>(paa_values.size()));
  for (Eigen::Index j = 0; j < paa_values.size(); ++j)
    w.push_back(static_cast<char>('a' + sax_symbol(static_cast<double>(paa_values(j)), alphabet)));
  return w;
}

struct MotifConfig {
  std::string stream = "stress";
  std::int64_t window_s = 1800;
  std::optional<std::int64_t> stride_s;  // window_s / 4 when unset
  std::size_t paa_segments = 8;
  std::size_t sax_alphabet = 4;
  std::size_t k = 6;
  std::uint64_t seed = 42;
  double match_threshold = 0.75;

  std::int64_t stride() const { return stride_s.value_or(std::max<std::int64_t>(1, window_s / 4)); }
  // Occurrence scan step: a quarter PAA segment unless the stride is finer.
  std::int64_t scan_step() const {
    return std::min(stride(), std::max<std::int64_t>(1, window_s / std::int64_t(4 * std::max<std::size_t>(1, paa_segments))));
  }
  void validate() const;
};

/// Sliding windows of one stream with their z-normalized PAA rows.
struct FeatureSet {
  struct Window {
    std::string participant_id;
    Instant start;
    Instant end;
    std::string sax_word;
    bool flat = false;
  };
  std::vector<Window> windows;
  Eigen::MatrixXd paa;  // one row per window
  std::vector<std::string> warnings;
};

/// Slides windows of `window_s` by `stride_s` over each participant's series.
/// Windows spanning a sampling gap, holding a stress sentinel or with fewer
/// samples than segments are skipped.
FeatureSet window_transform(const SampleTable& table, const MotifConfig& cfg);
void window_transform(const std::string& participant, const Series& series, const MotifConfig& cfg,
                      FeatureSet& out);

/// Windows at scan_step() for occurrence localization; clustering uses the stride.
FeatureSet scan_windows(const SampleTable& table, const MotifConfig& cfg);

struct MotifOccurrence {
  std::string participant_id;
  Instant start;
  Instant end;
  double distance = 0.0;

  friend bool operator==(const MotifOccurrence&, const MotifOccurrence&) = default;
};

struct Motif {
  std::string motif_id;
  Eigen::VectorXd centroid;
  std::string sax_word;
  std::size_t member_count = 0;
  std::vector<MotifOccurrence> occurrences;
};

struct KMeansResult {
  Eigen::MatrixXd centroids;        // k x p
  std::vector<std::size_t> labels;  // per row
  std::vector<double> objective;    // within-cluster sum of squares after each assignment
  std::size_t iterations = 0;
};

/// Lloyd's k-means with seeded k-means++ initialisation, at most 100
/// iterations, stopping once no centroid moves more than 1e-6. Empty
/// clusters are re-seeded from the point farthest from its centroid.
KMeansResult kmeans(const Eigen::MatrixXd& points, std::size_t k, std::uint64_t seed);

struct MotifRun {
  std::string motif_run_id;
  std::string dataset_id;
  MotifConfig config;
  std::vector<Motif> motifs;
  KMeansResult clustering;

  const Motif* find(std::string_view motif_id) const;
};

/// Clusters the windows into k motifs. Throws Error{validation} with fewer windows than k.
MotifRun cluster_motifs(const FeatureSet& features, const MotifConfig& cfg, std::string motif_run_id = "motifs");

/// Windows within match_threshold of the centroid, closest first, keeping only
/// windows that do not overlap an already kept window of the same participant.
/// Sorted by participant then start.
std::vector<MotifOccurrence> locate_motif(const Motif& motif, const FeatureSet& features, const MotifConfig& cfg);

/// MOTIF events for every occurrence (split at midnight), merged into `events`
/// without duplicates. Returns the merged, canonically sorted event list.
std::vector<EventRecord> promote_motif(const Motif& motif, std::vector<EventRecord> events);

}  // namespace chronoseq

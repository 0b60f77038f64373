#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hypwalk/group.hpp"
#include "hypwalk/path.hpp"
#include "hypwalk/rational.hpp"

namespace hypwalk {

// -- seeded streams ---------------------------------------------------------

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// FNV-1a of an experiment identifier.
std::uint64_t hash_id(std::string_view id) noexcept;

/// Key of substream `index` under `parent`: mix64(parent ^ mix64(index)).
/// Trial t of an experiment uses derive_seed(derive_seed(master, id), t).
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index) noexcept {
  return mix64(parent ^ mix64(index + 0x632BE59BD9B4E019ULL));
}

/// Counter-based stream: output i is mix64(key + i * golden), so any draw
/// is a pure function of (key, i).
class Stream {
 public:
  explicit Stream(std::uint64_t key) noexcept : key_(key) {}

  std::uint64_t next() noexcept {
    ++counter_;
    return mix64(key_ + counter_ * 0x9E3779B97F4A7C15ULL);
  }
  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound) noexcept;

  std::uint64_t key() const noexcept { return key_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// -- distributions ------------------------------------------------------------

/// Finitely supported step law. Probabilities are normalized on
/// construction; support words are reduced.
struct Distribution {
  std::vector<std::pair<Word, double>> support;
  bool symmetric = false;
  bool full_support_generators = false;

  /// Uniform on the model's generating set.
  static Distribution uniform_generators(const GroupModel& model);
  /// Normalizes positive weights; throws invalid_probabilities otherwise.
  static Distribution from_weights(const GroupModel& model,
                                   std::vector<std::pair<Word, double>> weighted);

  /// Draws one support index by inversion of the cumulative masses.
  std::size_t sample_index(Stream& stream) const;
};

struct DistributionReport {
  bool probabilities_valid = false;
  bool symmetric = false;
  bool full_support_generators = false;
  bool contains_identity = false;
  /// Symmetric and of full support: sufficient for permissibility in the
  /// implemented models (their finite radical is trivial).
  bool permissible = false;
};

/// Recomputes the flags from the support. Throws invalid_probabilities when
/// weights are nonpositive or do not sum to 1 within 1e-12.
DistributionReport validate_distribution(const GroupModel& model, const Distribution& dist);

// -- walks -------------------------------------------------------------------

struct WalkSample {
  std::uint64_t seed = 0;
  std::int64_t n = 0;
  std::vector<Word> increments;  ///< g_1 .. g_n
  std::vector<Word> prefixes;    ///< g_1 ... g_j for j = 0..n

  const Word& endpoint() const { return prefixes.back(); }
};

WalkSample sample_walk(const GroupModel& model, const Distribution& dist, std::int64_t n,
                       std::uint64_t seed);

/// Endpoint of sample_walk(model, dist, n, seed) without storing prefixes.
Word walk_endpoint(const GroupModel& model, const Distribution& dist, std::int64_t n,
                   std::uint64_t seed);

/// geodesic_path(identity, endpoint).
Path walk_geodesic(const GroupModel& model, const WalkSample& sample);

// -- estimators ----------------------------------------------------------------

/// Wilson score interval at 95%.
struct BernoulliEstimate {
  std::int64_t successes = 0;
  std::int64_t trials = 0;
  double p_hat = 0.0;
  double lo = 0.0;
  double hi = 1.0;
};

inline constexpr double kWilsonZ = 1.959963984540054;

BernoulliEstimate wilson_estimate(std::int64_t successes, std::int64_t trials);

struct DriftEstimate {
  std::int64_t n = 0;
  std::int64_t trials = 0;
  double mean_normalized_distance = 0.0;
  double std_error = 0.0;
  std::vector<std::int64_t> distances;  ///< d(e, w(n)) per trial, in trial order
};

/// Summary statistics of d/n over per-trial distances.
DriftEstimate summarize_drift(std::int64_t n, std::vector<std::int64_t> distances);

/// Monte Carlo mean of d(e, w(n))/n; trial t uses derive_seed(seed, t).
/// Requires trials >= 30.
DriftEstimate drift_estimate(const GroupModel& model, const Distribution& dist, std::int64_t n,
                             std::int64_t trials, std::uint64_t seed);

/// Fraction of distances outside [(1-eps) D n, (1+eps) D n].
double drift_tail_fraction(const DriftEstimate& est, double drift, double epsilon);

/// Exact speed of simple random walk on F_k (uniform on the 2k one-letter
/// generators): the distance chain moves up with probability (2k-1)/2k and
/// down with 1/2k away from 0, so the speed is the difference, (k-1)/k.
Rational drift_oracle_uniform_free(int rank);

/// Same oracle after checking that `dist` is uniform on one-letter
/// generators of a free group; throws wrong_distribution otherwise.
Rational drift_oracle(const GroupModel& model, const Distribution& dist);

/// E[d(e, w(n))] for simple random walk on F_k by dynamic programming over
/// the distance chain.
double expected_distance_uniform_free(int rank, std::int64_t n);

using WalkPredicate = std::function<bool(std::span<const WalkSample>)>;

/// Fraction of trials whose tuple of walks (walk i drawn from dists[i])
/// satisfies `predicate`. Walk i of trial t uses
/// derive_seed(derive_seed(seed, t), i).
BernoulliEstimate event_probability(const GroupModel& model, std::span<const Distribution> dists,
                                    std::int64_t n, std::int64_t trials, std::uint64_t seed,
                                    const WalkPredicate& predicate);

}  // namespace hypwalk

#include "hypwalk/randwalk.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "hypwalk/error.hpp"

namespace hypwalk {

std::uint64_t hash_id(std::string_view id) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char ch : id) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t Stream::below(std::uint64_t bound) noexcept {
  // Rejection keeps the draw exactly uniform.
  const std::uint64_t limit = bound == 0 ? 0 : (~std::uint64_t{0} - bound + 1) % bound;
  while (true) {
    const std::uint64_t x = next();
    if (x >= limit) return x % bound;
  }
}

namespace {

bool is_one_letter_generator(const GroupModel& model, const Word& w) {
  return w.letters.size() == 1 && length(model, w) == 1;
}

void compute_flags(const GroupModel& model, Distribution& dist) {
  std::set<Word> atoms;
  for (const auto& [w, p] : dist.support) atoms.insert(w);
  dist.symmetric = true;
  for (const auto& [w, p] : dist.support) {
    const Word inv = invert(model, w);
    double inv_mass = 0.0;
    for (const auto& [v, q] : dist.support) {
      if (v == inv) inv_mass += q;
    }
    double mass = 0.0;
    for (const auto& [v, q] : dist.support) {
      if (v == w) mass += q;
    }
    if (std::abs(inv_mass - mass) > 1e-12) {
      dist.symmetric = false;
      break;
    }
  }
  dist.full_support_generators = true;
  for (const Letter& g : model.generators()) {
    if (!atoms.count(Word{g})) {
      dist.full_support_generators = false;
      break;
    }
  }
}

}  // namespace

Distribution Distribution::uniform_generators(const GroupModel& model) {
  const auto gens = model.generators();
  std::vector<std::pair<Word, double>> weighted;
  for (const Letter& g : gens) weighted.emplace_back(Word{g}, 1.0);
  return from_weights(model, std::move(weighted));
}

Distribution Distribution::from_weights(const GroupModel& model,
                                        std::vector<std::pair<Word, double>> weighted) {
  if (weighted.empty()) throw Error(ErrorCode::invalid_probabilities, "empty support");
  double total = 0.0;
  for (auto& [w, p] : weighted) {
    if (!(p > 0.0) || !std::isfinite(p)) {
      throw Error(ErrorCode::invalid_probabilities, "weight of " + format_word(w) + " is not positive");
    }
    w = reduce(model, w);
    total += p;
  }
  Distribution dist;
  for (auto& [w, p] : weighted) dist.support.emplace_back(std::move(w), p / total);
  compute_flags(model, dist);
  return dist;
}

std::size_t Distribution::sample_index(Stream& stream) const {
  const double u = stream.uniform();
  double acc = 0.0;
  for (std::size_t i = 0; i < support.size(); ++i) {
    acc += support[i].second;
    if (u < acc) return i;
  }
  return support.size() - 1;
}

DistributionReport validate_distribution(const GroupModel& model, const Distribution& dist) {
  if (dist.support.empty()) throw Error(ErrorCode::invalid_probabilities, "empty support");
  double total = 0.0;
  for (const auto& [w, p] : dist.support) {
    if (!(p > 0.0) || !std::isfinite(p)) {
      throw Error(ErrorCode::invalid_probabilities, "probability of " + format_word(w) + " is not positive");
    }
    if (!(reduce(model, w) == w)) {
      throw Error(ErrorCode::invalid_probabilities, "support word " + format_word(w) + " is not reduced");
    }
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw Error(ErrorCode::invalid_probabilities, "probabilities sum to " + std::to_string(total));
  }
  Distribution check = dist;
  compute_flags(model, check);
  DistributionReport report;
  report.probabilities_valid = true;
  report.symmetric = check.symmetric;
  report.full_support_generators = check.full_support_generators;
  report.contains_identity =
      std::any_of(dist.support.begin(), dist.support.end(), [](const auto& a) { return a.first.empty(); });
  report.permissible = report.symmetric && report.full_support_generators;
  return report;
}

WalkSample sample_walk(const GroupModel& model, const Distribution& dist, std::int64_t n,
                       std::uint64_t seed) {
  if (n < 0) throw Error(ErrorCode::precondition, "walk length must be nonnegative");
  WalkSample sample;
  sample.seed = seed;
  sample.n = n;
  sample.increments.reserve(static_cast<std::size_t>(n));
  sample.prefixes.reserve(static_cast<std::size_t>(n) + 1);
  sample.prefixes.emplace_back();
  Stream stream(seed);
  Word current;
  for (std::int64_t j = 0; j < n; ++j) {
    const Word& step = dist.support[dist.sample_index(stream)].first;
    for (const Letter& l : step.letters) append_letter(model, current.letters, l);
    sample.increments.push_back(step);
    sample.prefixes.push_back(current);
  }
  return sample;
}

Word walk_endpoint(const GroupModel& model, const Distribution& dist, std::int64_t n, std::uint64_t seed) {
  if (n < 0) throw Error(ErrorCode::precondition, "walk length must be nonnegative");
  Stream stream(seed);
  Word current;
  for (std::int64_t j = 0; j < n; ++j) {
    const Word& step = dist.support[dist.sample_index(stream)].first;
    for (const Letter& l : step.letters) append_letter(model, current.letters, l);
  }
  return current;
}

Path walk_geodesic(const GroupModel& model, const WalkSample& sample) {
  return geodesic_path(model, Word{}, sample.endpoint());
}

BernoulliEstimate wilson_estimate(std::int64_t successes, std::int64_t trials) {
  BernoulliEstimate est;
  est.successes = successes;
  est.trials = trials;
  if (trials <= 0) return est;
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = kWilsonZ * kWilsonZ;
  const double denom = 1.0 + z2 / n;
  const double centre = (p + z2 / (2.0 * n)) / denom;
  const double half = kWilsonZ * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  est.p_hat = p;
  est.lo = std::clamp(centre - half, 0.0, 1.0);
  est.hi = std::clamp(centre + half, 0.0, 1.0);
  // Guard against last-ulp rounding at the boundaries.
  est.lo = std::min(est.lo, p);
  est.hi = std::max(est.hi, p);
  return est;
}

DriftEstimate summarize_drift(std::int64_t n, std::vector<std::int64_t> distances) {
  DriftEstimate est;
  est.n = n;
  est.trials = static_cast<std::int64_t>(distances.size());
  if (distances.empty() || n <= 0) {
    est.distances = std::move(distances);
    return est;
  }
  double sum = 0.0;
  for (std::int64_t d : distances) sum += static_cast<double>(d) / static_cast<double>(n);
  const double mean = sum / static_cast<double>(distances.size());
  double ss = 0.0;
  for (std::int64_t d : distances) {
    const double x = static_cast<double>(d) / static_cast<double>(n) - mean;
    ss += x * x;
  }
  const double m = static_cast<double>(distances.size());
  est.mean_normalized_distance = mean;
  est.std_error = distances.size() > 1 ? std::sqrt(ss / (m - 1.0) / m) : 0.0;
  est.distances = std::move(distances);
  return est;
}

DriftEstimate drift_estimate(const GroupModel& model, const Distribution& dist, std::int64_t n,
                             std::int64_t trials, std::uint64_t seed) {
  if (trials < 30) throw Error(ErrorCode::precondition, "drift estimate needs at least 30 trials");
  if (n < 1) throw Error(ErrorCode::precondition, "drift estimate needs n >= 1");
  std::vector<std::int64_t> distances;
  distances.reserve(static_cast<std::size_t>(trials));
  for (std::int64_t t = 0; t < trials; ++t) {
    const Word end = walk_endpoint(model, dist, n, derive_seed(seed, static_cast<std::uint64_t>(t)));
    distances.push_back(length(model, end));
  }
  return summarize_drift(n, std::move(distances));
}

double drift_tail_fraction(const DriftEstimate& est, double drift, double epsilon) {
  if (est.distances.empty()) return 0.0;
  const double n = static_cast<double>(est.n);
  const double lo = (1.0 - epsilon) * drift * n;
  const double hi = (1.0 + epsilon) * drift * n;
  std::size_t outside = 0;
  for (std::int64_t d : est.distances) {
    const double x = static_cast<double>(d);
    if (x < lo || x > hi) ++outside;
  }
  return static_cast<double>(outside) / static_cast<double>(est.distances.size());
}

Rational drift_oracle_uniform_free(int rank) {
  if (rank < 2) throw Error(ErrorCode::precondition, "rank must be >= 2");
  const Rational up(2 * rank - 1, 2 * rank);
  const Rational down(1, 2 * rank);
  return up - down;
}

Rational drift_oracle(const GroupModel& model, const Distribution& dist) {
  if (!model.is_free()) throw Error(ErrorCode::wrong_distribution, "drift oracle is defined for free groups only");
  const auto gens = model.generators();
  bool uniform = dist.support.size() == gens.size();
  for (const auto& [w, p] : dist.support) {
    uniform = uniform && is_one_letter_generator(model, w) &&
              std::abs(p - 1.0 / static_cast<double>(gens.size())) < 1e-12;
  }
  std::set<Word> atoms;
  for (const auto& [w, p] : dist.support) atoms.insert(w);
  if (!uniform || atoms.size() != gens.size()) {
    throw Error(ErrorCode::wrong_distribution, "drift oracle needs the uniform one-letter distribution");
  }
  return drift_oracle_uniform_free(model.factors());
}

double expected_distance_uniform_free(int rank, std::int64_t n) {
  if (rank < 2 || n < 0) throw Error(ErrorCode::precondition, "bad arguments to expected_distance_uniform_free");
  const double up = static_cast<double>(2 * rank - 1) / (2.0 * rank);
  const double down = 1.0 / (2.0 * rank);
  std::vector<double> mass(static_cast<std::size_t>(n) + 2, 0.0);
  mass[0] = 1.0;
  for (std::int64_t step = 0; step < n; ++step) {
    std::vector<double> next(mass.size(), 0.0);
    next[1] += mass[0];
    for (std::size_t d = 1; d + 1 < mass.size(); ++d) {
      next[d + 1] += mass[d] * up;
      next[d - 1] += mass[d] * down;
    }
    mass.swap(next);
  }
  double mean = 0.0;
  for (std::size_t d = 0; d < mass.size(); ++d) mean += static_cast<double>(d) * mass[d];
  return mean;
}

BernoulliEstimate event_probability(const GroupModel& model, std::span<const Distribution> dists,
                                    std::int64_t n, std::int64_t trials, std::uint64_t seed,
                                    const WalkPredicate& predicate) {
  std::int64_t successes = 0;
  std::vector<WalkSample> walks(dists.size());
  for (std::int64_t t = 0; t < trials; ++t) {
    const std::uint64_t trial_seed = derive_seed(seed, static_cast<std::uint64_t>(t));
    for (std::size_t i = 0; i < dists.size(); ++i) {
      walks[i] = sample_walk(model, dists[i], n, derive_seed(trial_seed, i));
    }
    if (predicate(walks)) ++successes;
  }
  return wilson_estimate(successes, trials);
}

}  // namespace hypwalk

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace hypwalk {

using Json = nlohmann::ordered_json;

enum class ExperimentKind {
  drift,
  freeness,
  relation_search,
  qg_words,
  matching_decay,
  separation,
  transversality,
  lox_products,
};

std::string to_string(ExperimentKind kind);
std::optional<ExperimentKind> parse_kind(std::string_view text);

struct DistributionSpec {
  bool uniform = true;
  std::vector<std::pair<std::string, double>> weighted;  ///< (word, weight)
};

/// Kind-specific knobs; every field has a default so configs stay short.
struct ExperimentParams {
  std::string epsilon = "1/10";
  std::string epsilon_prime = "1/20";
  std::optional<std::string> drift;  ///< D; defaults to the exact oracle when one exists
  std::string k = "1";               ///< transversality K
  std::string kappa = "0";           ///< separation kappa
  int max_syllables = 6;
  int exponent_bound = 3;
  int relation_max_syllables = 4;
  int measure_syllables = 2;
  int s_radius = 2;           ///< S = nontrivial H-ball of this radius, one of each {s, s^-1}
  int candidate_radius = 3;   ///< candidate translates / coset representatives
  int orbit_truncation = 8;   ///< H-word radius of truncated orbits
  std::string match_factor = "1/2";
  std::string b = "0";
  bool self_match = false;    ///< mode: pair | self
  std::string f = "b^1";
  int product_length = 4;
  int exponent_min = 3;
  int exponent_max = 6;
  std::uint64_t word_budget = 10'000'000;
  std::uint64_t candidate_cap = 100'000;
};

struct ExperimentConfig {
  std::string id;
  ExperimentKind kind = ExperimentKind::drift;
  std::string group;
  DistributionSpec distribution;
  int walks = 1;
  std::vector<std::string> subgroup;
  std::vector<std::int64_t> n_grid;
  std::int64_t trials = 1;
  std::optional<std::uint64_t> seed;
  ExperimentParams params;
};

struct SchemaError {
  std::string key;
  std::string reason;
};

struct ConfigParse {
  std::optional<ExperimentConfig> config;
  std::vector<SchemaError> errors;
  bool ok() const noexcept { return config.has_value() && errors.empty(); }
};

/// YAML text to a validated config, or the full list of schema errors.
ConfigParse parse_config(std::string_view text);
ConfigParse load_config(const std::filesystem::path& path);

Json config_to_json(const ExperimentConfig& config);

struct SeedChoice {
  std::uint64_t value = 0;
  std::string source;  ///< "cli", "config" or "env"
};

/// CLI override, then the config, then HYPWALK_SEED. Throws
/// schema_violation when none is set.
SeedChoice resolve_seed(const ExperimentConfig& config, std::optional<std::uint64_t> cli_override);

/// Key of trial t at walk length n.
std::uint64_t trial_seed(std::uint64_t master, std::string_view experiment_id, std::int64_t n, std::int64_t t);

struct Aggregate {
  std::int64_t n = 0;
  std::int64_t trials = 0;
  double estimate = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  Json extra = Json::object();
};

/// Per-n aggregates computed from trial records alone. Every n of `n_grid`
/// gets a row, in that order; rows without records have trials = 0.
std::vector<Aggregate> aggregate_records(std::span<const Json> records, std::span<const std::int64_t> n_grid);

struct Report {
  ExperimentConfig config;
  SeedChoice seed;
  unsigned threads = 1;
  std::vector<Json> records;  ///< sorted by (n, trial_index)
  std::vector<Aggregate> aggregates;
  bool complete = true;
  bool budget_exhausted = false;  ///< the stop came from a budget, not a fault
  std::string error;
  double wall_seconds = 0.0;
};

struct RunOptions {
  unsigned threads = 1;
  std::optional<std::uint64_t> seed_override;
};

/// Runs every (n, trial) cell. A budget error in a trial stops the run and
/// leaves a report flagged incomplete; records do not depend on `threads`.
Report run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

std::string records_jsonl(std::span<const Json> records);
std::string summary_csv(std::span<const Aggregate> aggregates);
Json report_json(const Report& report);

/// records.jsonl, summary.csv and report.json under out_dir. Throws io_error.
void write_report(const Report& report, const std::filesystem::path& out_dir);

std::vector<Json> read_records(const std::filesystem::path& path);

}  // namespace hypwalk

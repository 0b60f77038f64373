#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "hypwalk/error.hpp"
#include "hypwalk/experiment.hpp"
#include "hypwalk/randwalk.hpp"

using namespace hypwalk;

namespace {

const char* kDrift = R"(
id: drift-test
kind: drift
group: free(2)
distribution: uniform_generators
n_grid: [10, 20, 40]
trials: 40
seed: 5
params:
  epsilon: 1/10
)";

bool has_error(const ConfigParse& p, const std::string& key) {
  return std::any_of(p.errors.begin(), p.errors.end(), [&](const SchemaError& e) { return e.key == key; });
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

ExperimentConfig must_parse(const std::string& text) {
  const ConfigParse p = parse_config(text);
  for (const auto& e : p.errors) MESSAGE(e.key << ": " << e.reason);
  REQUIRE(p.ok());
  return *p.config;
}

}  // namespace

TEST_CASE("config parsing: a valid drift config") {
  const ExperimentConfig c = must_parse(kDrift);
  CHECK(c.id == "drift-test");
  CHECK(c.kind == ExperimentKind::drift);
  CHECK(c.n_grid == std::vector<std::int64_t>{10, 20, 40});
  CHECK(c.trials == 40);
  CHECK(c.seed == 5u);
  CHECK(c.distribution.uniform);
  const Json j = config_to_json(c);
  CHECK(j["kind"] == "drift");
  CHECK(j["params"]["epsilon"] == "1/10");
}

TEST_CASE("config parsing: errors name the offending key") {
  std::string bad_kind = kDrift;
  bad_kind.replace(bad_kind.find("kind: drift"), 11, "kind: nonsense");
  CHECK(has_error(parse_config(bad_kind), "kind"));

  const ConfigParse eps = parse_config(R"(
id: q
kind: qg-words
group: free(2)
subgroup: [a^1]
walks: 2
n_grid: [10]
trials: 1
params:
  epsilon: 1/20
  epsilon_prime: 1/10
)");
  CHECK(has_error(eps, "params.epsilon_prime"));

  CHECK(has_error(parse_config(std::string(kDrift) + "colour: blue\n"), "colour"));
  std::string desc = kDrift;
  desc.replace(desc.find("[10, 20, 40]"), 12, "[10, 40, 20]");
  CHECK(has_error(parse_config(desc), "n_grid[2]"));

  CHECK(has_error(parse_config("id: x\nkind: drift\n"), "group"));
  CHECK(has_error(parse_config("id: x\nkind: drift\ngroup: free(1)\nn_grid: [1]\ntrials: 1\n"), "group"));
  CHECK_FALSE(parse_config("[1, 2").ok());

  // no oracle drift for a product model without params.drift
  CHECK(has_error(parse_config("id: x\nkind: drift\ngroup: product(2,3)\nn_grid: [5]\ntrials: 1\n"),
                  "params.drift"));
  CHECK(parse_config("id: x\nkind: drift\ngroup: product(2,3)\nn_grid: [5]\ntrials: 1\nparams:\n  drift: 1/6\n").ok());

  CHECK(has_error(parse_config("id: x\nkind: freeness\ngroup: free(2)\nsubgroup: [a^1, a^2]\nn_grid: [5]\ntrials: 1\n"),
                  "subgroup"));
  CHECK(has_error(parse_config("id: x\nkind: lox-products\ngroup: free(2)\nn_grid: [5]\ntrials: 1\n"
                               "params:\n  product_length: 3\n"),
                  "params.product_length"));
}

TEST_CASE("seed precedence") {
  ExperimentConfig c = must_parse(kDrift);
  CHECK(resolve_seed(c, 9u).value == 9u);
  CHECK(resolve_seed(c, 9u).source == "cli");
  CHECK(resolve_seed(c, std::nullopt).source == "config");
  c.seed.reset();
  ::setenv("HYPWALK_SEED", "77", 1);
  CHECK(resolve_seed(c, std::nullopt).value == 77u);
  CHECK(resolve_seed(c, std::nullopt).source == "env");
  ::setenv("HYPWALK_SEED", "7x", 1);
  CHECK_THROWS_AS(resolve_seed(c, std::nullopt), Error);
  ::unsetenv("HYPWALK_SEED");
  CHECK_THROWS_AS(resolve_seed(c, std::nullopt), Error);
}

TEST_CASE("trial seeds are keyed by id, n and trial") {
  CHECK(trial_seed(1, "a", 10, 0) == trial_seed(1, "a", 10, 0));
  CHECK(trial_seed(1, "a", 10, 0) != trial_seed(1, "b", 10, 0));
  CHECK(trial_seed(1, "a", 10, 0) != trial_seed(1, "a", 20, 0));
  CHECK(trial_seed(1, "a", 10, 0) != trial_seed(1, "a", 10, 1));
  CHECK(trial_seed(1, "a", 10, 0) != trial_seed(2, "a", 10, 0));
}

TEST_CASE("records do not depend on the number of workers") {
  const ExperimentConfig c = must_parse(kDrift);
  const Report r1 = run_experiment(c, {1, std::nullopt});
  const Report r4 = run_experiment(c, {4, std::nullopt});
  const Report r8 = run_experiment(c, {8, std::nullopt});
  CHECK(r1.complete);
  CHECK(r1.records.size() == 120);
  CHECK(records_jsonl(r1.records) == records_jsonl(r4.records));
  CHECK(records_jsonl(r1.records) == records_jsonl(r8.records));
  CHECK(summary_csv(r1.aggregates) == summary_csv(r8.aggregates));

  const Json& first = r1.records.front();
  CHECK(first["experiment_id"] == "drift-test");
  CHECK(first["kind"] == "drift");
  CHECK(first["n"] == 10);
  CHECK(first["trial_index"] == 0);
  CHECK(first["seed"].get<std::uint64_t>() == trial_seed(5, "drift-test", 10, 0));
  // the record alone determines the outcome
  const GroupModel f2 = GroupModel::free_group(2);
  const Word end = walk_endpoint(f2, Distribution::uniform_generators(f2), 10, first["seed"].get<std::uint64_t>());
  CHECK(first["outcome"]["distance"].get<std::int64_t>() == length(f2, end));
}

TEST_CASE("aggregates are recomputed from records alone") {
  const ExperimentConfig c = must_parse(kDrift);
  const Report r = run_experiment(c);
  const auto again = aggregate_records(r.records, c.n_grid);
  CHECK(summary_csv(again) == summary_csv(r.aggregates));

  // independent recomputation of the mean for n = 20
  double sum = 0.0;
  std::int64_t count = 0;
  for (const Json& rec : r.records) {
    if (rec["n"] != 20) continue;
    sum += rec["outcome"]["distance"].get<double>() / 20.0;
    ++count;
  }
  REQUIRE(count == 40);
  CHECK(r.aggregates[1].n == 20);
  CHECK(r.aggregates[1].trials == 40);
  CHECK(r.aggregates[1].estimate == doctest::Approx(sum / 40.0).epsilon(1e-12));

  const auto empty = aggregate_records(std::span<const Json>{}, c.n_grid);
  REQUIRE(empty.size() == 3);
  CHECK(empty[0].trials == 0);
}

TEST_CASE("bernoulli kinds use Wilson intervals") {
  const ExperimentConfig c = must_parse(R"(
id: free-test
kind: freeness
group: free(2)
subgroup: [a^1]
walks: 2
n_grid: [4, 12]
trials: 30
seed: 3
params:
  relation_max_syllables: 3
  exponent_bound: 2
  s_radius: 1
)");
  const Report r = run_experiment(c, {2, std::nullopt});
  REQUIRE(r.complete);
  for (const Aggregate& a : r.aggregates) {
    std::int64_t cert = 0;
    for (const Json& rec : r.records) {
      if (rec["n"] == a.n && rec["outcome"]["certificate"].get<bool>()) ++cert;
    }
    const BernoulliEstimate w = wilson_estimate(cert, 30);
    CHECK(a.estimate == w.p_hat);
    CHECK(a.ci_lo == w.lo);
    CHECK(a.ci_hi == w.hi);
    CHECK(a.extra["soundness_failures"] == 0);
  }
}

TEST_CASE("profile kinds report truncation and candidate counts") {
  const ExperimentConfig c = must_parse(R"(
id: sep
kind: separation
group: free(2)
subgroup: [a^1]
n_grid: [6]
trials: 1
seed: 1
params:
  kappa: 1
  candidate_radius: 2
)");
  const Report r = run_experiment(c);
  REQUIRE(r.complete);
  CHECK(r.records.size() == 17);
  const Json rep = report_json(r);
  const Json& row = rep["aggregates"][0];
  CHECK(row["candidates"] == 17);
  CHECK(row["excluded"] == 5);  // e, a, a^-1, a^2, a^-2
  CHECK(row["orbit_truncation"] == 6);
  CHECK(row["candidate_radius"] == 2);
  CHECK(row["estimate"].get<double>() <= 2.0);
}

TEST_CASE("budget exhaustion leaves an incomplete report") {
  const ExperimentConfig c = must_parse(R"(
id: qg-budget
kind: qg-words
group: free(2)
subgroup: [a^1]
walks: 2
n_grid: [6]
trials: 3
seed: 1
params:
  max_syllables: 3
  exponent_bound: 2
  s_radius: 1
)");
  ExperimentConfig tight = c;
  tight.params.word_budget = 10;
  const Report r = run_experiment(tight);
  CHECK_FALSE(r.complete);
  CHECK(r.budget_exhausted);
  CHECK_FALSE(r.error.empty());
  const Report ok = run_experiment(c);
  CHECK(ok.complete);
  CHECK(ok.records.size() == 3);
}

TEST_CASE("report files") {
  const ExperimentConfig c = must_parse(kDrift);
  const Report r = run_experiment(c, {1, 11u});
  const auto dir = std::filesystem::temp_directory_path() / "hypwalk-test-report";
  std::filesystem::remove_all(dir);
  write_report(r, dir / "nested");
  const auto out = dir / "nested";
  CHECK(slurp(out / "records.jsonl") == records_jsonl(r.records));
  const std::string csv = slurp(out / "summary.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + static_cast<long>(c.n_grid.size()));
  CHECK(csv.rfind("n,estimate,ci_lo,ci_hi\n", 0) == 0);
  const Json rep = Json::parse(slurp(out / "report.json"));
  CHECK(rep["seed"]["master"] == 11);
  CHECK(rep["seed"]["source"] == "cli");
  CHECK(rep["records"] == 120);

  const auto back = read_records(out / "records.jsonl");
  CHECK(back.size() == r.records.size());
  CHECK(summary_csv(aggregate_records(back, c.n_grid)) == csv);

  // zero records still give valid files
  Report empty = r;
  empty.records.clear();
  empty.aggregates = aggregate_records(empty.records, c.n_grid);
  write_report(empty, dir / "empty");
  CHECK(slurp(dir / "empty" / "records.jsonl").empty());
  CHECK(read_records(dir / "empty" / "records.jsonl").empty());
  std::filesystem::remove_all(dir);

  CHECK_THROWS_AS(read_records(dir / "missing.jsonl"), Error);
}

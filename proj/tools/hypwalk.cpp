// Command-line front end: run / validate / replay experiment configs.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "hypwalk/error.hpp"
#include "hypwalk/experiment.hpp"

namespace fs = std::filesystem;
using namespace hypwalk;

namespace {

constexpr int kOk = 0;
constexpr int kError = 1;
constexpr int kIncomplete = 2;

void print_schema_errors(const ConfigParse& parse) {
  for (const SchemaError& e : parse.errors) {
    std::cerr << "schema-violation: " << (e.key.empty() ? "<document>" : e.key) << ": " << e.reason << "\n";
  }
}

int cmd_validate(const std::string& config_path) {
  const ConfigParse parse = load_config(config_path);
  if (!parse.ok()) {
    print_schema_errors(parse);
    return kError;
  }
  std::cout << "ok: " << parse.config->id << " (" << to_string(parse.config->kind) << ")\n";
  return kOk;
}

int cmd_run(const std::string& config_path, const std::string& out_dir, unsigned threads,
            std::optional<std::uint64_t> seed) {
  const ConfigParse parse = load_config(config_path);
  if (!parse.ok()) {
    print_schema_errors(parse);
    return kError;
  }
  const Report report = run_experiment(*parse.config, RunOptions{threads, seed});
  write_report(report, out_dir);
  std::cout << summary_csv(report.aggregates);
  if (!report.complete) {
    std::cerr << "incomplete: " << report.error << "\n";
    return report.budget_exhausted ? kIncomplete : kError;
  }
  return kOk;
}

int cmd_replay(const std::string& records_path) {
  const std::vector<Json> records = read_records(records_path);
  std::vector<std::int64_t> n_grid;
  std::optional<Json> stored;
  const fs::path report_path = fs::path(records_path).parent_path() / "report.json";
  if (fs::exists(report_path)) {
    std::ifstream in(report_path);
    stored = Json::parse(in);
    n_grid = stored->at("config").at("n_grid").get<std::vector<std::int64_t>>();
  } else {
    for (const Json& r : records) {
      const auto n = r.at("n").get<std::int64_t>();
      if (n_grid.empty() || n_grid.back() != n) n_grid.push_back(n);
    }
  }
  const std::vector<Aggregate> aggs = aggregate_records(records, n_grid);
  std::cout << summary_csv(aggs);
  if (!stored) return kOk;

  Report probe;
  probe.aggregates = aggs;
  const Json recomputed = report_json(probe).at("aggregates");
  if (recomputed != stored->at("aggregates")) {
    std::cerr << "replay: aggregates differ from " << report_path.string() << "\n";
    return kError;
  }
  std::cerr << "replay: aggregates match " << report_path.string() << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hypwalk: random walks and subgroup freeness in hyperbolic groups"};
  app.require_subcommand(1);

  std::string config_path, out_dir, records_path;
  unsigned threads = 1;
  std::optional<std::uint64_t> seed;

  auto* run = app.add_subcommand("run", "run an experiment config");
  run->add_option("config", config_path, "experiment config (YAML)")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "output directory")->required();
  run->add_option("--threads", threads, "worker threads")->check(CLI::Range(1u, 1024u));
  run->add_option("--seed", seed, "master seed override");

  auto* validate = app.add_subcommand("validate", "check a config against the schema");
  validate->add_option("config", config_path, "experiment config (YAML)")->required()->check(CLI::ExistingFile);

  auto* replay = app.add_subcommand("replay", "re-aggregate a records.jsonl file");
  replay->add_option("records", records_path, "records.jsonl")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kError;
  }

  try {
    if (*run) return cmd_run(config_path, out_dir, threads, seed);
    if (*validate) return cmd_validate(config_path);
    if (*replay) return cmd_replay(records_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kError;
  }
  return kError;
}

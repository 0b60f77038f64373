#include "hypwalk/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include <yaml-cpp/yaml.h>

#include "hypwalk/error.hpp"
#include "hypwalk/freeness.hpp"
#include "hypwalk/group.hpp"
#include "hypwalk/hypgeo.hpp"
#include "hypwalk/randwalk.hpp"
#include "hypwalk/stallings.hpp"

namespace hypwalk {

namespace {

constexpr const char* kVersion = "0.1.0";

const std::vector<std::pair<ExperimentKind, std::string>>& kind_names() {
  static const std::vector<std::pair<ExperimentKind, std::string>> names = {
      {ExperimentKind::drift, "drift"},
      {ExperimentKind::freeness, "freeness"},
      {ExperimentKind::relation_search, "relation-search"},
      {ExperimentKind::qg_words, "qg-words"},
      {ExperimentKind::matching_decay, "matching-decay"},
      {ExperimentKind::separation, "separation"},
      {ExperimentKind::transversality, "transversality"},
      {ExperimentKind::lox_products, "lox-products"},
  };
  return names;
}

bool is_profile(ExperimentKind kind) {
  return kind == ExperimentKind::separation || kind == ExperimentKind::transversality;
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  for (const auto& [k, name] : kind_names()) {
    if (k == kind) return name;
  }
  return "unknown";
}

std::optional<ExperimentKind> parse_kind(std::string_view text) {
  for (const auto& [k, name] : kind_names()) {
    if (name == text) return k;
  }
  return std::nullopt;
}

// -- parsing ---------------------------------------------------------------------

namespace {

class ConfigReader {
 public:
  std::vector<SchemaError> errors;

  void fail(std::string key, std::string reason) { errors.push_back({std::move(key), std::move(reason)}); }

  template <class T>
  std::optional<T> scalar(const YAML::Node& node, const std::string& key, const char* what) {
    if (!node.IsScalar()) {
      fail(key, std::string("expected ") + what);
      return std::nullopt;
    }
    try {
      return node.as<T>();
    } catch (const YAML::Exception&) {
      fail(key, std::string("expected ") + what + ", got '" + node.Scalar() + "'");
      return std::nullopt;
    }
  }

  void read_int(const YAML::Node& node, const std::string& key, int& out, int lo, int hi) {
    if (auto v = scalar<std::int64_t>(node, key, "an integer")) {
      if (*v < lo || *v > hi) {
        fail(key, "must be in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
      } else {
        out = static_cast<int>(*v);
      }
    }
  }

  void read_rational(const YAML::Node& node, const std::string& key, std::string& out) {
    if (auto v = scalar<std::string>(node, key, "a number")) {
      try {
        out = to_string(parse_rational(*v));
      } catch (const Error& e) {
        fail(key, e.what());
      }
    }
  }
};

void check_keys(ConfigReader& r, const YAML::Node& map, const std::string& prefix,
                const std::set<std::string>& allowed) {
  for (const auto& item : map) {
    const auto key = item.first.as<std::string>();
    if (!allowed.count(key)) r.fail(prefix + key, "unknown key");
  }
}

void read_params(ConfigReader& r, const YAML::Node& node, ExperimentParams& p) {
  if (!node.IsMap()) {
    r.fail("params", "expected a mapping");
    return;
  }
  check_keys(r, node, "params.",
             {"epsilon", "epsilon_prime", "drift", "K", "kappa", "max_syllables", "exponent_bound",
              "relation_max_syllables", "measure_syllables", "s_radius", "candidate_radius", "orbit_truncation",
              "match_factor", "B", "mode", "f", "product_length", "exponent_min", "exponent_max", "word_budget",
              "candidate_cap"});
  if (node["epsilon"]) r.read_rational(node["epsilon"], "params.epsilon", p.epsilon);
  if (node["epsilon_prime"]) r.read_rational(node["epsilon_prime"], "params.epsilon_prime", p.epsilon_prime);
  if (node["drift"]) {
    std::string d;
    r.read_rational(node["drift"], "params.drift", d);
    if (!d.empty()) p.drift = d;
  }
  if (node["K"]) r.read_rational(node["K"], "params.K", p.k);
  if (node["kappa"]) r.read_rational(node["kappa"], "params.kappa", p.kappa);
  if (node["match_factor"]) r.read_rational(node["match_factor"], "params.match_factor", p.match_factor);
  if (node["B"]) r.read_rational(node["B"], "params.B", p.b);
  if (node["max_syllables"]) r.read_int(node["max_syllables"], "params.max_syllables", p.max_syllables, 0, 64);
  if (node["exponent_bound"]) r.read_int(node["exponent_bound"], "params.exponent_bound", p.exponent_bound, 1, 1000);
  if (node["relation_max_syllables"]) {
    r.read_int(node["relation_max_syllables"], "params.relation_max_syllables", p.relation_max_syllables, 0, 64);
  }
  if (node["measure_syllables"]) {
    r.read_int(node["measure_syllables"], "params.measure_syllables", p.measure_syllables, 0, 64);
  }
  if (node["s_radius"]) r.read_int(node["s_radius"], "params.s_radius", p.s_radius, 0, 64);
  if (node["candidate_radius"]) r.read_int(node["candidate_radius"], "params.candidate_radius", p.candidate_radius, 0, 64);
  if (node["orbit_truncation"]) r.read_int(node["orbit_truncation"], "params.orbit_truncation", p.orbit_truncation, 0, 100000);
  if (node["product_length"]) r.read_int(node["product_length"], "params.product_length", p.product_length, 1, 1000);
  if (node["exponent_min"]) r.read_int(node["exponent_min"], "params.exponent_min", p.exponent_min, 1, 1000000);
  if (node["exponent_max"]) r.read_int(node["exponent_max"], "params.exponent_max", p.exponent_max, 1, 1000000);
  if (node["word_budget"]) {
    if (auto v = r.scalar<std::uint64_t>(node["word_budget"], "params.word_budget", "a nonnegative integer")) {
      p.word_budget = *v;
    }
  }
  if (node["candidate_cap"]) {
    if (auto v = r.scalar<std::uint64_t>(node["candidate_cap"], "params.candidate_cap", "a nonnegative integer")) {
      p.candidate_cap = *v;
    }
  }
  if (node["mode"]) {
    if (auto v = r.scalar<std::string>(node["mode"], "params.mode", "pair or self")) {
      if (*v == "pair" || *v == "self") {
        p.self_match = *v == "self";
      } else {
        r.fail("params.mode", "expected pair or self, got '" + *v + "'");
      }
    }
  }
  if (node["f"]) {
    if (auto v = r.scalar<std::string>(node["f"], "params.f", "a word")) p.f = *v;
  }
}

void read_distribution(ConfigReader& r, const YAML::Node& node, DistributionSpec& spec) {
  if (node.IsScalar()) {
    if (node.Scalar() != "uniform_generators") r.fail("distribution", "expected uniform_generators or a list");
    spec.uniform = true;
    return;
  }
  if (!node.IsSequence() || node.size() == 0) {
    r.fail("distribution", "expected uniform_generators or a nonempty list of {word, weight}");
    return;
  }
  spec.uniform = false;
  for (std::size_t i = 0; i < node.size(); ++i) {
    const std::string key = "distribution[" + std::to_string(i) + "]";
    const YAML::Node item = node[i];
    if (!item.IsMap() || !item["word"] || !item["weight"]) {
      r.fail(key, "expected {word, weight}");
      continue;
    }
    check_keys(r, item, key + ".", {"word", "weight"});
    auto w = r.scalar<std::string>(item["word"], key + ".word", "a word");
    auto p = r.scalar<double>(item["weight"], key + ".weight", "a number");
    if (p && !(*p > 0.0 && std::isfinite(*p))) r.fail(key + ".weight", "must be positive");
    if (w && p) spec.weighted.emplace_back(*w, *p);
  }
}

// Checks that need the group model.
void semantic_checks(ConfigReader& r, const ExperimentConfig& c) {
  std::optional<GroupModel> model;
  try {
    model = parse_group(c.group);
  } catch (const Error& e) {
    r.fail("group", e.what());
    return;
  }
  const GroupModel& m = *model;
  std::vector<Word> h;
  for (std::size_t i = 0; i < c.subgroup.size(); ++i) {
    try {
      h.push_back(parse_word(m, c.subgroup[i]));
    } catch (const Error& e) {
      r.fail("subgroup[" + std::to_string(i) + "]", e.what());
    }
  }
  std::optional<Distribution> dist;
  try {
    if (c.distribution.uniform) {
      dist = Distribution::uniform_generators(m);
    } else {
      std::vector<std::pair<Word, double>> weighted;
      for (const auto& [w, p] : c.distribution.weighted) weighted.emplace_back(parse_word(m, w), p);
      dist = Distribution::from_weights(m, std::move(weighted));
    }
  } catch (const Error& e) {
    r.fail("distribution", e.what());
  }

  const ExperimentParams& p = c.params;
  const Rational eps = parse_rational(p.epsilon);
  const Rational eps_prime = parse_rational(p.epsilon_prime);
  const bool needs_drift = c.kind == ExperimentKind::drift || c.kind == ExperimentKind::qg_words ||
                           c.kind == ExperimentKind::matching_decay;
  if (needs_drift && !p.drift && dist) {
    try {
      (void)drift_oracle(m, *dist);
    } catch (const Error&) {
      r.fail("params.drift", "required: no exact drift value is known for this group and distribution");
    }
  }
  if (p.drift && parse_rational(*p.drift) <= 0) r.fail("params.drift", "must be positive");
  if (c.kind == ExperimentKind::drift && !(eps > 0 && eps < 1)) r.fail("params.epsilon", "must lie in (0, 1)");
  if (c.kind == ExperimentKind::qg_words && !(eps_prime > 0 && eps_prime < eps && eps < 1)) {
    r.fail("params.epsilon_prime", "need 0 < epsilon_prime < epsilon < 1 (got epsilon = " + p.epsilon +
                                       ", epsilon_prime = " + p.epsilon_prime + ")");
  }
  if (parse_rational(p.k) < 0) r.fail("params.K", "must be nonnegative");
  if (parse_rational(p.kappa) < 0) r.fail("params.kappa", "must be nonnegative");
  if (parse_rational(p.match_factor) <= 0) r.fail("params.match_factor", "must be positive");

  const bool needs_free = c.kind == ExperimentKind::freeness;
  if (needs_free && !m.is_free()) r.fail("group", to_string(c.kind) + " needs a free group");
  if ((c.kind == ExperimentKind::freeness || c.kind == ExperimentKind::qg_words) && m.is_free() &&
      h.size() == c.subgroup.size() && !h.empty()) {
    if (stallings_core(m, h).rank() != static_cast<std::int64_t>(h.size())) {
      r.fail("subgroup", "generators are not a basis of the subgroup they span");
    }
  }
  if (c.kind == ExperimentKind::qg_words || c.kind == ExperimentKind::freeness ||
      c.kind == ExperimentKind::relation_search) {
    const int bound = c.kind == ExperimentKind::qg_words ? p.max_syllables : p.relation_max_syllables;
    const std::size_t s_bound = h.empty() ? 0 : subgroup_orbit(m, h, p.s_radius).size();
    try {
      MixedWordEnumerator en(static_cast<int>(s_bound), c.walks, bound, p.exponent_bound, p.word_budget);
    } catch (const Error& e) {
      r.fail(c.kind == ExperimentKind::qg_words ? "params.max_syllables" : "params.relation_max_syllables",
             e.what());
    }
  }
  if (c.kind == ExperimentKind::matching_decay || is_profile(c.kind)) {
    try {
      const auto cand = ball(m, p.candidate_radius, static_cast<std::size_t>(p.candidate_cap));
      (void)cand;
    } catch (const Error& e) {
      r.fail("params.candidate_radius", e.what());
    }
  }
  if (c.kind == ExperimentKind::transversality) {
    try {
      if (!is_loxodromic(m, parse_word(m, p.f))) r.fail("params.f", "must be loxodromic");
    } catch (const Error& e) {
      r.fail("params.f", e.what());
    }
  }
  if (c.kind == ExperimentKind::lox_products) {
    if (p.product_length < 2 || p.product_length % 2 != 0) {
      r.fail("params.product_length", "must be even and >= 2 so that cyclic neighbours differ");
    }
    if (p.exponent_min > p.exponent_max) r.fail("params.exponent_min", "exceeds exponent_max");
  }
}

}  // namespace

ConfigParse parse_config(std::string_view text) {
  ConfigParse out;
  ConfigReader r;
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::Exception& e) {
    out.errors.push_back({"", std::string("YAML: ") + e.what()});
    return out;
  }
  if (!root.IsMap()) {
    out.errors.push_back({"", "top level must be a mapping"});
    return out;
  }
  check_keys(r, root, "",
             {"id", "kind", "group", "distribution", "walks", "subgroup", "n_grid", "trials", "seed", "params"});

  ExperimentConfig c;
  for (const char* key : {"id", "kind", "group", "n_grid", "trials"}) {
    if (!root[key]) r.fail(key, "missing");
  }
  if (root["id"]) {
    if (auto v = r.scalar<std::string>(root["id"], "id", "a string")) {
      if (v->empty()) r.fail("id", "must be nonempty");
      c.id = *v;
    }
  }
  bool kind_ok = false;
  if (root["kind"]) {
    if (auto v = r.scalar<std::string>(root["kind"], "kind", "an experiment kind")) {
      if (auto k = parse_kind(*v)) {
        c.kind = *k;
        kind_ok = true;
      } else {
        r.fail("kind", "unknown experiment kind '" + *v + "'");
      }
    }
  }
  if (root["group"]) {
    if (auto v = r.scalar<std::string>(root["group"], "group", "a group spec")) c.group = *v;
  }
  if (root["distribution"]) read_distribution(r, root["distribution"], c.distribution);
  if (root["walks"]) r.read_int(root["walks"], "walks", c.walks, 1, 64);
  if (root["subgroup"]) {
    const YAML::Node s = root["subgroup"];
    if (!s.IsSequence()) {
      r.fail("subgroup", "expected a list of words");
    } else {
      for (std::size_t i = 0; i < s.size(); ++i) {
        if (auto v = r.scalar<std::string>(s[i], "subgroup[" + std::to_string(i) + "]", "a word")) {
          c.subgroup.push_back(*v);
        }
      }
    }
  }
  if (root["n_grid"]) {
    const YAML::Node g = root["n_grid"];
    if (!g.IsSequence() || g.size() == 0) {
      r.fail("n_grid", "expected a nonempty list of integers");
    } else {
      for (std::size_t i = 0; i < g.size(); ++i) {
        if (auto v = r.scalar<std::int64_t>(g[i], "n_grid[" + std::to_string(i) + "]", "an integer")) {
          if (*v < 1) r.fail("n_grid[" + std::to_string(i) + "]", "must be >= 1");
          if (!c.n_grid.empty() && *v <= c.n_grid.back()) {
            r.fail("n_grid[" + std::to_string(i) + "]", "n_grid must be strictly ascending");
          }
          c.n_grid.push_back(*v);
        }
      }
    }
  }
  if (root["trials"]) {
    if (auto v = r.scalar<std::int64_t>(root["trials"], "trials", "an integer")) {
      if (*v < 1) r.fail("trials", "must be >= 1");
      c.trials = *v;
    }
  }
  if (root["seed"]) {
    if (auto v = r.scalar<std::uint64_t>(root["seed"], "seed", "a nonnegative integer")) c.seed = *v;
  }
  if (root["params"]) read_params(r, root["params"], c.params);

  if (r.errors.empty() && kind_ok) semantic_checks(r, c);
  out.errors = std::move(r.errors);
  if (out.errors.empty()) out.config = std::move(c);
  return out;
}

ConfigParse load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    ConfigParse out;
    out.errors.push_back({"", "cannot read " + path.string()});
    return out;
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

Json config_to_json(const ExperimentConfig& c) {
  Json j;
  j["id"] = c.id;
  j["kind"] = to_string(c.kind);
  j["group"] = c.group;
  if (c.distribution.uniform) {
    j["distribution"] = "uniform_generators";
  } else {
    Json d = Json::array();
    for (const auto& [w, p] : c.distribution.weighted) d.push_back(Json{{"word", w}, {"weight", p}});
    j["distribution"] = d;
  }
  j["walks"] = c.walks;
  j["subgroup"] = c.subgroup;
  j["n_grid"] = c.n_grid;
  j["trials"] = c.trials;
  j["seed"] = c.seed ? Json(*c.seed) : Json(nullptr);
  const ExperimentParams& p = c.params;
  Json q;
  q["epsilon"] = p.epsilon;
  q["epsilon_prime"] = p.epsilon_prime;
  q["drift"] = p.drift ? Json(*p.drift) : Json(nullptr);
  q["K"] = p.k;
  q["kappa"] = p.kappa;
  q["max_syllables"] = p.max_syllables;
  q["exponent_bound"] = p.exponent_bound;
  q["relation_max_syllables"] = p.relation_max_syllables;
  q["measure_syllables"] = p.measure_syllables;
  q["s_radius"] = p.s_radius;
  q["candidate_radius"] = p.candidate_radius;
  q["orbit_truncation"] = p.orbit_truncation;
  q["match_factor"] = p.match_factor;
  q["B"] = p.b;
  q["mode"] = p.self_match ? "self" : "pair";
  q["f"] = p.f;
  q["product_length"] = p.product_length;
  q["exponent_min"] = p.exponent_min;
  q["exponent_max"] = p.exponent_max;
  q["word_budget"] = p.word_budget;
  q["candidate_cap"] = p.candidate_cap;
  j["params"] = q;
  return j;
}

SeedChoice resolve_seed(const ExperimentConfig& config, std::optional<std::uint64_t> cli_override) {
  if (cli_override) return {*cli_override, "cli"};
  if (config.seed) return {*config.seed, "config"};
  if (const char* env = std::getenv("HYPWALK_SEED")) {
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(env, &used);
      if (used == std::string_view(env).size()) return {v, "env"};
    } catch (const std::exception&) {
    }
    throw Error(ErrorCode::schema_violation, "HYPWALK_SEED is not a nonnegative integer");
  }
  throw Error(ErrorCode::schema_violation, "seed: missing (set it in the config, via --seed or HYPWALK_SEED)");
}

std::uint64_t trial_seed(std::uint64_t master, std::string_view experiment_id, std::int64_t n, std::int64_t t) {
  const std::uint64_t exp = derive_seed(master, hash_id(experiment_id));
  return derive_seed(derive_seed(exp, static_cast<std::uint64_t>(n)), static_cast<std::uint64_t>(t));
}

// -- trials ----------------------------------------------------------------------

namespace {

// Immutable state shared by every trial of a run.
struct Context {
  const ExperimentConfig& config;
  GroupModel model;
  Distribution dist;
  std::vector<Word> h_gens;
  std::vector<Word> s_values;
  std::optional<Rational> drift;
  std::vector<Word> candidates;
  Rational epsilon, epsilon_prime, k, kappa, match_factor, b;
  Word f;

  explicit Context(const ExperimentConfig& c) : config(c), model(parse_group(c.group)) {
    if (c.distribution.uniform) {
      dist = Distribution::uniform_generators(model);
    } else {
      std::vector<std::pair<Word, double>> weighted;
      for (const auto& [w, p] : c.distribution.weighted) weighted.emplace_back(parse_word(model, w), p);
      dist = Distribution::from_weights(model, std::move(weighted));
    }
    for (const std::string& s : c.subgroup) h_gens.push_back(parse_word(model, s));
    const ExperimentParams& p = c.params;
    if (p.drift) {
      drift = parse_rational(*p.drift);
    } else {
      try {
        drift = drift_oracle(model, dist);
      } catch (const Error&) {
      }
    }
    epsilon = parse_rational(p.epsilon);
    epsilon_prime = parse_rational(p.epsilon_prime);
    k = parse_rational(p.k);
    kappa = parse_rational(p.kappa);
    match_factor = parse_rational(p.match_factor);
    b = parse_rational(p.b);
    f = parse_word(model, p.f);
    s_values = subgroup_letters(model, h_gens, p.s_radius);
    if (c.kind == ExperimentKind::matching_decay || is_profile(c.kind)) {
      candidates = ball(model, p.candidate_radius, static_cast<std::size_t>(p.candidate_cap));
    }
  }

  // Nontrivial elements of the H-ball, one from each pair {s, s^-1}: the one
  // whose first syllable has positive power, else the smaller word.
  static std::vector<Word> subgroup_letters(const GroupModel& m, const std::vector<Word>& gens, int radius) {
    std::vector<Word> out;
    if (gens.empty()) return out;
    const std::vector<Word> orbit = subgroup_orbit(m, gens, radius);
    std::set<Word> taken;
    for (const Word& g : orbit) {
      if (g.empty() || taken.count(g)) continue;
      const Word inv = invert(m, g);
      const bool g_pos = g.letters.front().power > 0;
      const bool inv_pos = inv.letters.front().power > 0;
      const Word& pick = g_pos != inv_pos ? (g_pos ? g : inv) : std::min(g, inv);
      taken.insert(g);
      taken.insert(inv);
      out.push_back(pick);
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  std::vector<Word> walks(std::uint64_t seed, std::int64_t n, int count) const {
    std::vector<Word> out;
    for (int i = 0; i < count; ++i) {
      out.push_back(walk_endpoint(model, dist, n, derive_seed(seed, static_cast<std::uint64_t>(i))));
    }
    return out;
  }
};

Json words_json(const std::vector<Word>& ws) {
  Json a = Json::array();
  for (const Word& w : ws) a.push_back(format_word(w));
  return a;
}

Json drift_trial(const Context& ctx, std::int64_t n, std::uint64_t seed) {
  const std::int64_t d = length(ctx.model, walk_endpoint(ctx.model, ctx.dist, n, seed));
  Json o;
  o["distance"] = d;
  o["drift_reference"] = to_string(*ctx.drift);
  o["epsilon"] = to_string(ctx.epsilon);
  const Rational centre = *ctx.drift * n;
  const Rational x(d);
  o["in_band"] = x >= (1 - ctx.epsilon) * centre && x <= (1 + ctx.epsilon) * centre;
  return o;
}

Json relation_json(const RelationReport& rel) {
  Json o;
  o["found"] = rel.found;
  o["witness"] = rel.witness ? Json(format_mixed_word(*rel.witness)) : Json(nullptr);
  o["syllables"] = rel.syllable_length ? Json(*rel.syllable_length) : Json(nullptr);
  o["words_checked"] = rel.words_checked;
  return o;
}

Json freeness_trial(const Context& ctx, std::int64_t n, std::uint64_t seed) {
  const auto& p = ctx.config.params;
  const std::vector<Word> walks = ctx.walks(seed, n, ctx.config.walks);
  const bool cert = free_product_certificate(ctx.model, ctx.h_gens, walks);
  const RelationReport rel =
      relation_search(ctx.model, ctx.s_values, walks, p.relation_max_syllables, p.exponent_bound, p.word_budget);
  Json o;
  o["walks"] = words_json(walks);
  o["certificate"] = cert;
  o["relation"] = relation_json(rel);
  o["sound"] = !(rel.found && cert);
  return o;
}

Json relation_trial(const Context& ctx, std::int64_t n, std::uint64_t seed) {
  const auto& p = ctx.config.params;
  const std::vector<Word> walks = ctx.walks(seed, n, ctx.config.walks);
  const RelationReport rel =
      relation_search(ctx.model, ctx.s_values, walks, p.relation_max_syllables, p.exponent_bound, p.word_budget);
  Json o;
  o["walks"] = words_json(walks);
  o["relation"] = relation_json(rel);
  return o;
}

Json qg_trial(const Context& ctx, std::int64_t n, std::uint64_t seed) {
  const auto& p = ctx.config.params;
  const std::vector<Word> walks = ctx.walks(seed, n, ctx.config.walks);
  const TheoremConstants tc =
      theorem_constants(Rational(n), ctx.epsilon, ctx.epsilon_prime, *ctx.drift, ctx.model.delta());
  std::optional<bool> cert;
  if (ctx.model.is_free()) cert = free_product_certificate(ctx.model, ctx.h_gens, walks);
  const QGScanResult scan = qg_words_scan(ctx.model, ctx.s_values, walks, p.max_syllables, p.exponent_bound, tc,
                                          p.measure_syllables, p.word_budget);
  Json o;
  o["walks"] = words_json(walks);
  o["certificate"] = cert ? Json(*cert) : Json(nullptr);
  o["c_final"] = to_string(tc.c_final);
  o["words"] = scan.words;
  o["bound_violations"] = scan.bound_violations;
  o["trivial_endpoints"] = scan.trivial_endpoints;
  o["trivial_when_certified"] = cert.value_or(false) ? scan.trivial_endpoints : 0;
  o["first_violation"] = scan.first_violation ? Json(format_mixed_word(*scan.first_violation)) : Json(nullptr);
  o["first_trivial"] = scan.first_trivial ? Json(format_mixed_word(*scan.first_trivial)) : Json(nullptr);
  o["measured_words"] = scan.measured_words;
  o["max_measured_c"] = to_string(scan.max_measured_c);
  o["max_path_length"] = scan.max_path_length;
  return o;
}

Json matching_trial(const Context& ctx, std::int64_t n, std::uint64_t seed) {
  const auto& p = ctx.config.params;
  const Rational a_exact = ceil(ctx.match_factor * *ctx.drift * n);
  const Path gp = geodesic_path(ctx.model, Word{}, walk_endpoint(ctx.model, ctx.dist, n, derive_seed(seed, 0)));
  std::optional<MatchWitness> m;
  Path gq;
  if (p.self_match) {
    m = find_self_match(ctx.model, gp, a_exact, ctx.b, ctx.candidates, static_cast<std::size_t>(p.candidate_cap));
  } else {
    gq = geodesic_path(ctx.model, Word{}, walk_endpoint(ctx.model, ctx.dist, n, derive_seed(seed, 1)));
    m = find_match(ctx.model, gp, gq, a_exact, ctx.b, ctx.candidates, static_cast<std::size_t>(p.candidate_cap));
  }
  Json o;
  o["mode"] = p.self_match ? "self" : "pair";
  o["A"] = to_string(a_exact);
  o["B"] = to_string(ctx.b);
  o["candidates"] = ctx.candidates.size();
  o["lengths"] = p.self_match ? Json::array({gp.length()}) : Json::array({gp.length(), gq.length()});
  o["matched"] = m.has_value();
  if (m) {
    o["g"] = format_word(m->g);
    o["range_p"] = Json::array({m->range_p.first, m->range_p.last});
    o["range_q"] = Json::array({m->range_q.first, m->range_q.last});
    o["reversed"] = m->reversed;
    o["hausdorff"] = to_string(m->hausdorff);
  }
  return o;
}

Json separation_trial(const Context& ctx, std::int64_t n, std::int64_t t) {
  const Word& g = ctx.candidates[static_cast<std::size_t>(t)];
  const SeparationProfile prof =
      separation_profile(ctx.model, ctx.h_gens, ctx.kappa, std::span<const Word>(&g, 1), static_cast<int>(n));
  Json o;
  o["g"] = format_word(g);
  o["excluded"] = prof.excluded_members > 0;
  o["diameter"] = prof.records.empty() ? Json(nullptr) : Json(to_string(prof.records.front().diameter));
  o["kappa"] = to_string(ctx.kappa);
  o["orbit_truncation"] = n;
  o["candidate_radius"] = ctx.config.params.candidate_radius;
  o["membership"] = prof.membership_method;
  return o;
}

Json transversality_trial(const Context& ctx, std::int64_t n, std::int64_t t) {
  const Word& g = ctx.candidates[static_cast<std::size_t>(t)];
  const int trunc = ctx.config.params.orbit_truncation;
  const TransversalityProfile prof = transversality_profile(ctx.model, ctx.f, ctx.h_gens, ctx.k,
                                                            std::span<const Word>(&g, 1), {-n, n}, trunc);
  Json o;
  o["g"] = format_word(g);
  o["diameter"] = to_string(prof.records.front().diameter);
  o["K"] = to_string(ctx.k);
  o["f"] = format_word(ctx.f);
  o["axis"] = Json::array({-n, n});
  o["orbit_truncation"] = trunc;
  o["candidate_radius"] = ctx.config.params.candidate_radius;
  return o;
}

bool independent_pair(const GroupModel& m, const Word& y1, const Word& y2) {
  if (!is_loxodromic(m, y1) || !is_loxodromic(m, y2)) return false;
  if (m.is_free()) {
    const Word pair[] = {y1, y2};
    return stallings_core(m, pair).rank() == 2;
  }
  return multiply(m, y1, y2) != multiply(m, y2, y1);
}

Json lox_trial(const Context& ctx, std::int64_t n, std::uint64_t seed) {
  const auto& p = ctx.config.params;
  constexpr int kMaxAttempts = 64;
  Json o;
  std::optional<std::pair<Word, Word>> ys;
  int attempts = 0;
  while (!ys && attempts < kMaxAttempts) {
    const std::uint64_t s = derive_seed(seed, static_cast<std::uint64_t>(attempts));
    ++attempts;
    Word y1 = walk_endpoint(ctx.model, ctx.dist, n, derive_seed(s, 0));
    Word y2 = walk_endpoint(ctx.model, ctx.dist, n, derive_seed(s, 1));
    if (independent_pair(ctx.model, y1, y2)) ys.emplace(std::move(y1), std::move(y2));
  }
  o["attempts"] = attempts;
  o["accepted"] = ys.has_value();
  if (!ys) {
    o["loxodromic"] = false;
    return o;
  }
  Stream exps(derive_seed(seed, 1'000'003));
  std::vector<std::pair<std::size_t, std::int64_t>> seq;
  const auto span = static_cast<std::uint64_t>(p.exponent_max - p.exponent_min + 1);
  for (int i = 0; i < p.product_length; ++i) {
    seq.emplace_back(static_cast<std::size_t>(i % 2), p.exponent_min + static_cast<std::int64_t>(exps.below(span)));
  }
  const Word y[] = {ys->first, ys->second};
  const LoxProduct lp = lox_product_word(ctx.model, y, seq);
  o["y"] = Json::array({format_word(y[0]), format_word(y[1])});
  Json s = Json::array();
  for (const auto& [i, m] : seq) s.push_back(Json::array({i, m}));
  o["sequence"] = s;
  o["z_length"] = length(ctx.model, lp.z);
  o["translation_length"] = translation_length(ctx.model, lp.z);
  o["loxodromic"] = lp.loxodromic;
  o["lambda"] = to_string(lp.qg_measured.lambda);
  o["c"] = to_string(lp.qg_measured.c);
  return o;
}

Json run_trial(const Context& ctx, std::int64_t n, std::int64_t t, std::uint64_t seed) {
  switch (ctx.config.kind) {
    case ExperimentKind::drift:
      return drift_trial(ctx, n, seed);
    case ExperimentKind::freeness:
      return freeness_trial(ctx, n, seed);
    case ExperimentKind::relation_search:
      return relation_trial(ctx, n, seed);
    case ExperimentKind::qg_words:
      return qg_trial(ctx, n, seed);
    case ExperimentKind::matching_decay:
      return matching_trial(ctx, n, seed);
    case ExperimentKind::separation:
      return separation_trial(ctx, n, t);
    case ExperimentKind::transversality:
      return transversality_trial(ctx, n, t);
    case ExperimentKind::lox_products:
      return lox_trial(ctx, n, seed);
  }
  throw Error(ErrorCode::precondition, "unhandled experiment kind");
}

// -- aggregation -------------------------------------------------------------------

Aggregate bernoulli_row(std::int64_t n, std::int64_t successes, std::int64_t trials) {
  const BernoulliEstimate e = wilson_estimate(successes, trials);
  Aggregate a;
  a.n = n;
  a.trials = trials;
  a.estimate = e.p_hat;
  a.ci_lo = e.lo;
  a.ci_hi = e.hi;
  a.extra["successes"] = successes;
  return a;
}

Aggregate aggregate_cell(const std::string& kind, std::int64_t n, const std::vector<const Json*>& rs) {
  const auto trials = static_cast<std::int64_t>(rs.size());
  auto count = [&](auto pred) {
    std::int64_t c = 0;
    for (const Json* r : rs) c += pred(r->at("outcome")) ? 1 : 0;
    return c;
  };

  if (kind == "drift") {
    std::vector<std::int64_t> d;
    for (const Json* r : rs) d.push_back(r->at("outcome").at("distance").get<std::int64_t>());
    const DriftEstimate e = summarize_drift(n, d);
    Aggregate a;
    a.n = n;
    a.trials = trials;
    a.estimate = e.mean_normalized_distance;
    a.ci_lo = e.mean_normalized_distance - kWilsonZ * e.std_error;
    a.ci_hi = e.mean_normalized_distance + kWilsonZ * e.std_error;
    a.extra["std_error"] = e.std_error;
    const std::int64_t outside = count([](const Json& o) { return !o.at("in_band").get<bool>(); });
    a.extra["outside_band"] = outside;
    a.extra["tail_fraction"] = static_cast<double>(outside) / static_cast<double>(trials);
    a.extra["drift_reference"] = rs.front()->at("outcome").at("drift_reference");
    a.extra["epsilon"] = rs.front()->at("outcome").at("epsilon");
    return a;
  }
  if (kind == "freeness") {
    Aggregate a = bernoulli_row(n, count([](const Json& o) { return o.at("certificate").get<bool>(); }), trials);
    a.extra["relations_found"] = count([](const Json& o) { return o.at("relation").at("found").get<bool>(); });
    a.extra["soundness_failures"] = count([](const Json& o) { return !o.at("sound").get<bool>(); });
    return a;
  }
  if (kind == "relation-search") {
    return bernoulli_row(n, count([](const Json& o) { return o.at("relation").at("found").get<bool>(); }), trials);
  }
  if (kind == "qg-words") {
    Aggregate a = bernoulli_row(n, count([](const Json& o) {
                                  return o.at("bound_violations").get<std::uint64_t>() == 0 &&
                                         o.at("trivial_when_certified").get<std::uint64_t>() == 0;
                                }),
                                trials);
    std::uint64_t violations = 0, trivial = 0, words = 0;
    Rational max_c(0);
    for (const Json* r : rs) {
      const Json& o = r->at("outcome");
      violations += o.at("bound_violations").get<std::uint64_t>();
      trivial += o.at("trivial_when_certified").get<std::uint64_t>();
      words += o.at("words").get<std::uint64_t>();
      max_c = std::max(max_c, parse_rational(o.at("max_measured_c").get<std::string>()));
    }
    a.extra["certified"] = count([](const Json& o) { return o.at("certificate").is_boolean() && o.at("certificate").get<bool>(); });
    a.extra["words"] = words;
    a.extra["bound_violations"] = violations;
    a.extra["trivial_when_certified"] = trivial;
    a.extra["max_measured_c"] = to_string(max_c);
    a.extra["c_final"] = rs.front()->at("outcome").at("c_final");
    return a;
  }
  if (kind == "matching-decay") {
    Aggregate a = bernoulli_row(n, count([](const Json& o) { return o.at("matched").get<bool>(); }), trials);
    const Json& o = rs.front()->at("outcome");
    a.extra["A"] = o.at("A");
    a.extra["B"] = o.at("B");
    a.extra["mode"] = o.at("mode");
    a.extra["candidates"] = o.at("candidates");
    return a;
  }
  if (kind == "lox-products") {
    Aggregate a = bernoulli_row(n, count([](const Json& o) { return o.at("loxodromic").get<bool>(); }), trials);
    a.extra["rejected_pairs"] = count([](const Json& o) { return !o.at("accepted").get<bool>(); });
    Rational max_c(0), max_lambda(1);
    for (const Json* r : rs) {
      const Json& o = r->at("outcome");
      if (!o.at("accepted").get<bool>()) continue;
      max_c = std::max(max_c, parse_rational(o.at("c").get<std::string>()));
      max_lambda = std::max(max_lambda, parse_rational(o.at("lambda").get<std::string>()));
    }
    a.extra["max_lambda"] = to_string(max_lambda);
    a.extra["max_c"] = to_string(max_c);
    return a;
  }
  // profiles: the estimate is the largest diameter over examined candidates
  Rational max_d(0);
  std::int64_t excluded = 0;
  for (const Json* r : rs) {
    const Json& o = r->at("outcome");
    if (o.contains("excluded") && o.at("excluded").get<bool>()) {
      ++excluded;
      continue;
    }
    max_d = std::max(max_d, parse_rational(o.at("diameter").get<std::string>()));
  }
  Aggregate a;
  a.n = n;
  a.trials = trials;
  a.estimate = to_double(max_d);
  a.ci_lo = a.estimate;
  a.ci_hi = a.estimate;
  const Json& o = rs.front()->at("outcome");
  a.extra["max_diameter"] = to_string(max_d);
  a.extra["candidates"] = trials;
  a.extra["excluded"] = excluded;
  a.extra["candidate_radius"] = o.at("candidate_radius");
  a.extra["orbit_truncation"] = o.at("orbit_truncation");
  if (kind == "transversality") {
    a.extra["K"] = o.at("K");
    a.extra["axis"] = o.at("axis");
  } else {
    a.extra["kappa"] = o.at("kappa");
  }
  return a;
}

}  // namespace

std::vector<Aggregate> aggregate_records(std::span<const Json> records, std::span<const std::int64_t> n_grid) {
  std::map<std::int64_t, std::vector<const Json*>> by_n;
  for (const Json& r : records) by_n[r.at("n").get<std::int64_t>()].push_back(&r);
  std::vector<Aggregate> out;
  for (std::int64_t n : n_grid) {
    auto it = by_n.find(n);
    if (it == by_n.end() || it->second.empty()) {
      Aggregate a;
      a.n = n;
      a.ci_hi = 1.0;
      out.push_back(a);
      continue;
    }
    const std::string kind = it->second.front()->at("kind").get<std::string>();
    out.push_back(aggregate_cell(kind, n, it->second));
  }
  return out;
}

// -- running ---------------------------------------------------------------------

Report run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  Report rep;
  rep.config = config;
  rep.seed = resolve_seed(config, options.seed_override);
  rep.threads = std::max(1u, options.threads);

  const Context ctx(config);
  struct Cell {
    std::int64_t n, t;
  };
  std::vector<Cell> cells;
  const std::int64_t per_n =
      is_profile(config.kind) ? static_cast<std::int64_t>(ctx.candidates.size()) : config.trials;
  for (std::int64_t n : config.n_grid) {
    for (std::int64_t t = 0; t < per_n; ++t) cells.push_back({n, t});
  }

  std::vector<std::optional<Json>> slots(cells.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::mutex err_mu;
  std::optional<std::tuple<std::size_t, std::string, bool>> first_error;

  auto worker = [&] {
    while (!stop.load()) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      const Cell& c = cells[i];
      const std::uint64_t seed = trial_seed(rep.seed.value, config.id, c.n, c.t);
      try {
        Json r;
        r["experiment_id"] = config.id;
        r["kind"] = to_string(config.kind);
        r["n"] = c.n;
        r["trial_index"] = c.t;
        r["seed"] = seed;
        r["outcome"] = run_trial(ctx, c.n, c.t, seed);
        slots[i] = std::move(r);
      } catch (const std::exception& e) {
        const std::lock_guard lock(err_mu);
        std::string msg = "n=" + std::to_string(c.n) + " trial " + std::to_string(c.t) + ": " + e.what();
        const auto* he = dynamic_cast<const Error*>(&e);
        const bool budget = he != nullptr && (he->code() == ErrorCode::budget_exceeded ||
                                              he->code() == ErrorCode::candidate_budget_exceeded);
        if (!first_error || i < std::get<0>(*first_error)) first_error.emplace(i, std::move(msg), budget);
        stop.store(true);
      }
    }
  };
  if (rep.threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < rep.threads; ++i) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
  }

  for (auto& s : slots) {
    if (s) rep.records.push_back(std::move(*s));
  }
  if (first_error) {
    rep.complete = false;
    rep.error = std::get<1>(*first_error);
    rep.budget_exhausted = std::get<2>(*first_error);
  }
  rep.aggregates = aggregate_records(rep.records, config.n_grid);
  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

// -- output ----------------------------------------------------------------------

namespace {

std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io_error, "cannot open " + path.string() + " for writing");
  out << text;
  out.flush();
  if (!out) throw Error(ErrorCode::io_error, "failed writing " + path.string());
}

}  // namespace

std::string records_jsonl(std::span<const Json> records) {
  std::string out;
  for (const Json& r : records) {
    out += r.dump();
    out += '\n';
  }
  return out;
}

std::string summary_csv(std::span<const Aggregate> aggregates) {
  std::string out = "n,estimate,ci_lo,ci_hi\n";
  for (const Aggregate& a : aggregates) {
    out += std::to_string(a.n) + "," + fmt_double(a.estimate) + "," + fmt_double(a.ci_lo) + "," +
           fmt_double(a.ci_hi) + "\n";
  }
  return out;
}

Json report_json(const Report& report) {
  Json j;
  j["tool"] = "hypwalk";
  j["version"] = kVersion;
  j["config"] = config_to_json(report.config);
  j["seed"] = Json{{"master", report.seed.value}, {"source", report.seed.source}};
  j["threads"] = report.threads;
  j["complete"] = report.complete;
  j["error"] = report.error.empty() ? Json(nullptr) : Json(report.error);
  j["records"] = report.records.size();
  Json aggs = Json::array();
  for (const Aggregate& a : report.aggregates) {
    Json row;
    row["n"] = a.n;
    row["trials"] = a.trials;
    row["estimate"] = a.estimate;
    row["ci_lo"] = a.ci_lo;
    row["ci_hi"] = a.ci_hi;
    for (const auto& [key, value] : a.extra.items()) row[key] = value;
    aggs.push_back(row);
  }
  j["aggregates"] = aggs;
  j["wall_seconds"] = report.wall_seconds;
  return j;
}

void write_report(const Report& report, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::io_error, "cannot create " + out_dir.string() + ": " + ec.message());
  write_file(out_dir / "records.jsonl", records_jsonl(report.records));
  write_file(out_dir / "summary.csv", summary_csv(report.aggregates));
  write_file(out_dir / "report.json", report_json(report).dump(2) + "\n");
}

std::vector<Json> read_records(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, "cannot read " + path.string());
  std::vector<Json> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(Json::parse(line));
    } catch (const Json::exception& e) {
      throw Error(ErrorCode::parse_error, path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace hypwalk

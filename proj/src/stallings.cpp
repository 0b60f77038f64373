#include "hypwalk/stallings.hpp"

#include <numeric>
#include <utility>

#include "hypwalk/error.hpp"

namespace hypwalk {

namespace {

int label_of(const Letter& unit) { return 2 * unit.factor + (unit.power > 0 ? 0 : 1); }
int inverse_label(int label) { return label ^ 1; }

class Folder {
 public:
  std::size_t add_state() {
    parent_.push_back(parent_.size());
    out_.emplace_back();
    return parent_.size() - 1;
  }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void add_edge(std::size_t u, int label, std::size_t v) {
    insert(find(u), label, find(v));
    insert(find(v), inverse_label(label), find(u));
    drain();
  }

  // Final transitions on root states, renumbered with the base first.
  std::vector<std::map<int, std::size_t>> finish(std::size_t base);

 private:
  void insert(std::size_t u, int label, std::size_t v) {
    auto [it, inserted] = out_[u].try_emplace(label, v);
    if (!inserted && find(it->second) != find(v)) pending_.emplace_back(it->second, v);
  }

  void merge(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (out_[a].size() < out_[b].size()) std::swap(a, b);
    parent_[b] = a;
    auto moved = std::move(out_[b]);
    out_[b].clear();
    for (const auto& [label, target] : moved) insert(a, label, target);
  }

  void drain() {
    while (!pending_.empty()) {
      auto [a, b] = pending_.back();
      pending_.pop_back();
      merge(a, b);
    }
  }

  std::vector<std::size_t> parent_;
  std::vector<std::map<int, std::size_t>> out_;
  std::vector<std::pair<std::size_t, std::size_t>> pending_;
};

std::vector<std::map<int, std::size_t>> Folder::finish(std::size_t base) {
  const std::size_t n = parent_.size();
  std::vector<std::map<int, std::size_t>> adj(n);
  std::vector<char> alive(n, 0);
  for (std::size_t s = 0; s < n; ++s) {
    if (find(s) != s) continue;
    alive[s] = 1;
    for (const auto& [label, target] : out_[s]) adj[s][label] = find(target);
  }
  const std::size_t root = find(base);
  // Prune degree-1 states other than the base until none remain.
  std::vector<std::size_t> stack;
  for (std::size_t s = 0; s < n; ++s) {
    if (alive[s] && s != root && adj[s].size() <= 1) stack.push_back(s);
  }
  while (!stack.empty()) {
    const std::size_t s = stack.back();
    stack.pop_back();
    if (!alive[s] || s == root || adj[s].size() > 1) continue;
    alive[s] = 0;
    for (const auto& [label, target] : adj[s]) {
      adj[target].erase(inverse_label(label));
      if (target != root && alive[target] && adj[target].size() <= 1) stack.push_back(target);
    }
    adj[s].clear();
  }
  std::vector<std::size_t> index(n, CoreGraph::npos);
  std::size_t next = 0;
  index[root] = next++;
  for (std::size_t s = 0; s < n; ++s) {
    if (alive[s] && s != root) index[s] = next++;
  }
  std::vector<std::map<int, std::size_t>> out(next);
  for (std::size_t s = 0; s < n; ++s) {
    if (!alive[s]) continue;
    for (const auto& [label, target] : adj[s]) out[index[s]][label] = index[target];
  }
  return out;
}

}  // namespace

std::size_t CoreGraph::edges() const noexcept {
  std::size_t total = 0;
  for (const auto& m : out_) total += m.size();
  return total / 2;
}

std::size_t CoreGraph::follow(std::size_t state, int label) const {
  const auto& m = out_.at(state);
  auto it = m.find(label);
  return it == m.end() ? npos : it->second;
}

std::int64_t CoreGraph::rank() const noexcept {
  return static_cast<std::int64_t>(edges()) - static_cast<std::int64_t>(states()) + 1;
}

bool CoreGraph::member(const GroupModel& model, const Word& w) const {
  if (!model.is_free()) throw Error(ErrorCode::wrong_model, "membership oracle needs a free group");
  std::size_t state = base();
  for (const Letter& step : unit_steps(model, reduce(model, w))) {
    state = follow(state, label_of(step));
    if (state == npos) return false;
  }
  return state == base();
}

CoreGraph stallings_core(const GroupModel& model, std::span<const Word> gens) {
  if (!model.is_free()) throw Error(ErrorCode::wrong_model, "Stallings folding needs a free group, got " + model.spec());
  Folder folder;
  const std::size_t base = folder.add_state();
  for (const Word& g : gens) {
    const std::vector<Letter> steps = unit_steps(model, reduce(model, g));
    if (steps.empty()) continue;
    std::size_t current = base;
    for (std::size_t i = 0; i < steps.size(); ++i) {
      const std::size_t next = i + 1 == steps.size() ? base : folder.add_state();
      folder.add_edge(current, label_of(steps[i]), next);
      current = next;
    }
  }
  CoreGraph core;
  core.out_ = folder.finish(base);
  return core;
}

}  // namespace hypwalk

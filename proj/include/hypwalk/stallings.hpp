#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "hypwalk/group.hpp"

namespace hypwalk {

/// Folded core graph of a finitely generated subgroup of a free group.
/// Edge labels encode generator i as 2i (forward) and 2i+1 (inverse);
/// every edge is stored in both directions.
class CoreGraph {
 public:
  std::size_t states() const noexcept { return out_.size(); }
  /// Undirected edges (each stored twice in the transition table).
  std::size_t edges() const noexcept;
  std::size_t base() const noexcept { return 0; }

  /// Target of the transition (state, label), or npos.
  std::size_t follow(std::size_t state, int label) const;

  /// Rank of the subgroup: #edges - #states + 1.
  std::int64_t rank() const noexcept;

  bool member(const GroupModel& model, const Word& w) const;

  const std::vector<std::map<int, std::size_t>>& transitions() const noexcept { return out_; }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  friend CoreGraph stallings_core(const GroupModel&, std::span<const Word>);
  std::vector<std::map<int, std::size_t>> out_;
};

/// Builds the petal graph of `gens`, folds it and prunes hanging trees.
/// Throws wrong_model for free products.
CoreGraph stallings_core(const GroupModel& model, std::span<const Word> gens);

inline bool member(const GroupModel& model, const CoreGraph& core, const Word& w) {
  return core.member(model, w);
}
inline std::int64_t rank(const CoreGraph& core) { return core.rank(); }

}  // namespace hypwalk

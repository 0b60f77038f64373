#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "hypwalk/group.hpp"
#include "hypwalk/rational.hpp"

namespace hypwalk {

/// (lambda, c) for a quasi-isometric embedding of an interval.
struct QGConstants {
  Rational lambda{1};
  Rational c{0};
};

/// A discrete path in the Cayley graph: consecutive vertices are adjacent
/// or equal, parametrized by arc length.
class Path {
 public:
  Path() = default;

  /// Validates adjacency of consecutive vertices.
  static Path from_vertices(const GroupModel& model, std::vector<Word> vertices);

  const std::vector<Word>& vertices() const noexcept { return vertices_; }
  const std::vector<std::int64_t>& cumulative_length() const noexcept {
    return cumulative_;
  }
  std::size_t size() const noexcept { return vertices_.size(); }
  bool empty() const noexcept { return vertices_.empty(); }
  const Word& operator[](std::size_t i) const { return vertices_[i]; }
  const Word& front() const { return vertices_.front(); }
  const Word& back() const { return vertices_.back(); }

  /// Arc length of the whole path (0 for empty or single-vertex paths).
  std::int64_t length() const noexcept {
    return cumulative_.empty() ? 0 : cumulative_.back();
  }

  /// Vertices [first, last] inclusive, arc lengths rebased to 0.
  Path subpath(std::size_t first, std::size_t last) const;

  /// Same vertices traversed in the opposite direction.
  Path reversed() const;

  friend bool operator==(const Path& a, const Path& b) {
    return a.vertices_ == b.vertices_;
  }

 private:
  Path(std::vector<Word> v, std::vector<std::int64_t> c)
      : vertices_(std::move(v)), cumulative_(std::move(c)) {}

  std::vector<Word> vertices_;
  std::vector<std::int64_t> cumulative_;

  friend Path concatenate(const GroupModel&, std::span<const Path>);
  friend Path translate(const GroupModel&, const Word&, const Path&);
  friend Path geodesic_path(const GroupModel&, const Word&, const Word&);
};

/// Joins paths end to start; a shared junction vertex is kept once.
Path concatenate(const GroupModel& model, std::span<const Path> pieces);

/// Left translate g * p.
Path translate(const GroupModel& model, const Word& g, const Path& p);

/// The geodesic from g to h spelled by the normal form of g^{-1}h
/// (geodesics in both families are unique, so this is the leftmost one).
Path geodesic_path(const GroupModel& model, const Word& g, const Word& h);

/// Steps between consecutive vertices: reduce(v_i^{-1} v_{i+1}) as a single
/// letter, or an empty optional for a repeated vertex.
std::vector<std::optional<Letter>> path_steps(const GroupModel& model, const Path& p);

struct AxisPath {
  Path path;
  QGConstants constants;  ///< (|f| / tau(f), 2|f|)
};

/// Concatenation of geodesic_path(f^m, f^{m+1}) for m in [first_power,
/// last_power). Throws not_loxodromic when tau(f) = 0.
AxisPath axis_path(const GroupModel& model, const Word& f, std::int64_t first_power,
                   std::int64_t last_power);

}  // namespace hypwalk

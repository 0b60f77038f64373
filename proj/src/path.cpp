#include "hypwalk/path.hpp"

#include <cstdlib>

#include "hypwalk/error.hpp"

namespace hypwalk {

Path Path::from_vertices(const GroupModel& model, std::vector<Word> vertices) {
  std::vector<std::int64_t> cumulative;
  cumulative.reserve(vertices.size());
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    if (i == 0) {
      cumulative.push_back(0);
      continue;
    }
    const std::int64_t step = distance(model, vertices[i - 1], vertices[i]);
    if (step > 1) {
      throw Error(ErrorCode::precondition, "path vertices " + std::to_string(i - 1) + " and " +
                                               std::to_string(i) + " are not adjacent");
    }
    cumulative.push_back(cumulative.back() + step);
  }
  return Path(std::move(vertices), std::move(cumulative));
}

Path Path::subpath(std::size_t first, std::size_t last) const {
  if (first > last || last >= vertices_.size()) {
    throw Error(ErrorCode::index_out_of_range, "subpath bounds out of range");
  }
  std::vector<Word> v(vertices_.begin() + static_cast<std::ptrdiff_t>(first),
                      vertices_.begin() + static_cast<std::ptrdiff_t>(last) + 1);
  std::vector<std::int64_t> c;
  c.reserve(v.size());
  for (std::size_t i = first; i <= last; ++i) c.push_back(cumulative_[i] - cumulative_[first]);
  return Path(std::move(v), std::move(c));
}

Path Path::reversed() const {
  std::vector<Word> v(vertices_.rbegin(), vertices_.rend());
  std::vector<std::int64_t> c;
  c.reserve(v.size());
  const std::int64_t total = length();
  for (auto it = cumulative_.rbegin(); it != cumulative_.rend(); ++it) c.push_back(total - *it);
  return Path(std::move(v), std::move(c));
}

Path concatenate(const GroupModel& model, std::span<const Path> pieces) {
  std::vector<Word> v;
  std::vector<std::int64_t> c;
  for (const Path& piece : pieces) {
    if (piece.empty()) continue;
    std::size_t start = 0;
    std::int64_t offset = 0;
    if (!v.empty()) {
      if (v.back() == piece.front()) {
        start = 1;
        offset = c.back();
      } else {
        const std::int64_t gap = distance(model, v.back(), piece.front());
        if (gap > 1) throw Error(ErrorCode::precondition, "concatenated pieces do not meet");
        offset = c.back() + gap;
      }
    }
    for (std::size_t i = start; i < piece.size(); ++i) {
      v.push_back(piece.vertices_[i]);
      c.push_back(offset + piece.cumulative_[i]);
    }
  }
  return Path(std::move(v), std::move(c));
}

Path translate(const GroupModel& model, const Word& g, const Path& p) {
  std::vector<Word> v;
  v.reserve(p.size());
  for (const Word& x : p.vertices_) v.push_back(multiply(model, g, x));
  return Path(std::move(v), p.cumulative_);
}

Path geodesic_path(const GroupModel& model, const Word& g, const Word& h) {
  const Word relative = multiply(model, invert(model, g), h);
  std::vector<Word> v{g};
  Word current = g;
  for (const Letter& step : unit_steps(model, relative)) {
    append_letter(model, current.letters, step);
    v.push_back(current);
  }
  std::vector<std::int64_t> c(v.size());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = static_cast<std::int64_t>(i);
  return Path(std::move(v), std::move(c));
}

std::vector<std::optional<Letter>> path_steps(const GroupModel& model, const Path& p) {
  std::vector<std::optional<Letter>> steps;
  if (p.size() < 2) return steps;
  steps.reserve(p.size() - 1);
  for (std::size_t i = 0; i + 1 < p.size(); ++i) {
    const Word rel = multiply(model, invert(model, p[i]), p[i + 1]);
    if (rel.empty()) {
      steps.emplace_back();
    } else {
      steps.emplace_back(rel.letters.front());
    }
  }
  return steps;
}

AxisPath axis_path(const GroupModel& model, const Word& f, std::int64_t first_power,
                   std::int64_t last_power) {
  const std::int64_t tau = translation_length(model, f);
  if (tau == 0) throw Error(ErrorCode::not_loxodromic, format_word(f) + " has translation length 0");
  if (first_power > last_power) throw Error(ErrorCode::precondition, "axis range is empty");
  std::vector<Path> pieces;
  Word current = power(model, f, first_power);
  if (first_power == last_power) pieces.push_back(geodesic_path(model, current, current));
  for (std::int64_t m = first_power; m < last_power; ++m) {
    Word next = multiply(model, current, f);
    pieces.push_back(geodesic_path(model, current, next));
    current = std::move(next);
  }
  const std::int64_t len = length(model, f);
  return AxisPath{concatenate(model, pieces), QGConstants{Rational(len, tau), Rational(2 * len)}};
}

}  // namespace hypwalk

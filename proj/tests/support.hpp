#pragma once

#include <cstdint>
#include <vector>

#include "hypwalk/group.hpp"
#include "hypwalk/randwalk.hpp"

namespace testing_support {

/// Reduced product of up to max_letters random generator letters.
inline hypwalk::Word random_word(const hypwalk::GroupModel& m, hypwalk::Stream& rng, int max_letters) {
  const auto gens = m.generators();
  const auto n = static_cast<int>(rng.below(static_cast<std::uint64_t>(max_letters) + 1));
  hypwalk::Word w;
  for (int i = 0; i < n; ++i) {
    hypwalk::append_letter(m, w.letters, gens[rng.below(gens.size())]);
  }
  return w;
}

/// Reduced word of exactly `len` syllables-worth of generator steps, never
/// cancelling (a geodesic spelling).
inline hypwalk::Word random_geodesic(const hypwalk::GroupModel& m, hypwalk::Stream& rng, std::int64_t len) {
  const auto gens = m.generators();
  hypwalk::Word w;
  while (hypwalk::length(m, w) < len) {
    const hypwalk::Letter x = gens[rng.below(gens.size())];
    std::vector<hypwalk::Letter> trial = w.letters;
    hypwalk::append_letter(m, trial, x);
    hypwalk::Word t(trial);
    if (hypwalk::length(m, t) == hypwalk::length(m, w) + 1) w = std::move(t);
  }
  return w;
}

}  // namespace testing_support

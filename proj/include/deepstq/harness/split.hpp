#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "deepstq/error.hpp"
#include "deepstq/harness/manifest.hpp"

namespace deepstq {

enum class SplitMode {
  ContentDisjoint,  // whole reference scenes go to one side
  VideoLevel,       // individual videos are shuffled
};

struct SplitSpec {
  std::vector<std::string> train_ids;  // manifest order
  std::vector<std::string> test_ids;   // manifest order
  std::uint64_t seed = 0;
  double train_fraction = 0.8;
};

// Uniform integer in [0, bound) from a 64-bit engine by rejection, so the
// sequence is identical across standard libraries.
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound + 1) % bound;
  for (;;) {
    const std::uint64_t r = rng();
    if (r <= limit) return r % bound;
  }
}

template <typename T>
void portable_shuffle(std::vector<T>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_below(rng, i));
    std::swap(v[i - 1], v[j]);
  }
}

// Seeded random split. In content-disjoint mode round(fraction * #refs)
// reference scenes, with all their videos, form the training side.
inline SplitSpec make_split(const DatasetManifest& manifest, double train_fraction,
                            std::uint64_t seed, SplitMode mode = SplitMode::ContentDisjoint) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw InvalidArgument("make_split: train fraction must be in (0, 1)");
  std::mt19937_64 rng(seed);
  SplitSpec s;
  s.seed = seed;
  s.train_fraction = train_fraction;

  std::set<std::string> train_set;
  if (mode == SplitMode::ContentDisjoint) {
    const auto refs_set = manifest.reference_ids();
    std::vector<std::string> refs(refs_set.begin(), refs_set.end());
    const auto n_train = static_cast<std::size_t>(std::lround(train_fraction * static_cast<double>(refs.size())));
    if (n_train == 0 || n_train >= refs.size())
      throw InvalidArgument("make_split: fraction " + std::to_string(train_fraction) + " of " +
                            std::to_string(refs.size()) +
                            " references leaves the train or test side empty");
    portable_shuffle(refs, rng);
    std::set<std::string> train_refs(refs.begin(), refs.begin() + static_cast<std::ptrdiff_t>(n_train));
    for (const auto& e : manifest.entries)
      if (train_refs.count(e.reference_id)) train_set.insert(e.video_id);
  } else {
    std::vector<std::string> ids;
    for (const auto& e : manifest.entries) ids.push_back(e.video_id);
    std::sort(ids.begin(), ids.end());
    const auto n_train = static_cast<std::size_t>(std::lround(train_fraction * static_cast<double>(ids.size())));
    if (n_train == 0 || n_train >= ids.size())
      throw InvalidArgument("make_split: fraction leaves the train or test side empty");
    portable_shuffle(ids, rng);
    train_set.insert(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_train));
  }
  for (const auto& e : manifest.entries)
    (train_set.count(e.video_id) ? s.train_ids : s.test_ids).push_back(e.video_id);
  return s;
}

}  // namespace deepstq

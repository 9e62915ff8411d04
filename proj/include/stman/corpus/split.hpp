#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "stman/corpus/dialogue.hpp"

namespace stman::corpus {

struct CorpusSplit {
  std::vector<Dialogue> train;
  std::vector<Dialogue> dev;
  std::vector<Dialogue> test;
};

/// Deterministic shuffled split. Sizes are round(n·train_ratio) and
/// round(n·dev_ratio) with the remainder going to test; ratios default to
/// 8/1/1. Uses the "split" stream of `seed`.
CorpusSplit split_corpus(std::span<const Dialogue> dialogues, std::uint64_t seed,
                         double train_ratio = 0.8, double dev_ratio = 0.1);

/// Random subset of round(fraction·n) dialogues, order preserved.
std::vector<Dialogue> sample_fraction(std::span<const Dialogue> dialogues, double fraction,
                                      std::uint64_t seed);

}  // namespace stman::corpus

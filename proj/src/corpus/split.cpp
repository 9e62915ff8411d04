#include "stman/corpus/split.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "stman/errors.hpp"
#include "stman/rng.hpp"

namespace stman::corpus {

CorpusSplit split_corpus(std::span<const Dialogue> dialogues, std::uint64_t seed,
                         double train_ratio, double dev_ratio) {
  if (train_ratio < 0.0 || dev_ratio < 0.0 || train_ratio + dev_ratio > 1.0) {
    throw ContractError("split ratios must be non-negative and sum to at most 1");
  }
  const std::size_t n = dialogues.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed, "split");
  std::shuffle(order.begin(), order.end(), rng.engine());

  const auto n_train = static_cast<std::size_t>(std::llround(static_cast<double>(n) * train_ratio));
  const auto n_dev = std::min(
      n - n_train, static_cast<std::size_t>(std::llround(static_cast<double>(n) * dev_ratio)));

  CorpusSplit out;
  for (std::size_t i = 0; i < n; ++i) {
    const Dialogue& d = dialogues[order[i]];
    if (i < n_train) {
      out.train.push_back(d);
    } else if (i < n_train + n_dev) {
      out.dev.push_back(d);
    } else {
      out.test.push_back(d);
    }
  }
  return out;
}

std::vector<Dialogue> sample_fraction(std::span<const Dialogue> dialogues, double fraction,
                                      std::uint64_t seed) {
  if (fraction < 0.0 || fraction > 1.0) throw ContractError("fraction must lie in [0, 1]");
  const std::size_t n = dialogues.size();
  const auto k = static_cast<std::size_t>(std::llround(static_cast<double>(n) * fraction));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed, "fraction");
  std::shuffle(order.begin(), order.end(), rng.engine());
  order.resize(k);
  std::sort(order.begin(), order.end());
  std::vector<Dialogue> out;
  out.reserve(k);
  for (std::size_t i : order) out.push_back(dialogues[i]);
  return out;
}

}  // namespace stman::corpus

#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "stman/corpus/split.hpp"
#include "stman/model/config.hpp"

namespace stman::eval {

/// Test-set scores of one trained cell.
struct CellScores {
  std::uint64_t seed = 0;
  double use_accuracy = 0.0;
  double use_f1 = 0.0;
  double sa_accuracy = 0.0;  // 0 for models without the SA head
  double sa_f1 = 0.0;
  std::size_t best_epoch = 0;
};

struct ExperimentRow {
  std::string label;  // variant name or fraction
  std::vector<CellScores> cells;
  CellScores median;  // per-field medians over cells (seed field unused)
};

struct ExperimentReport {
  std::string kind;  // "ablation" or "fraction_sweep"
  std::vector<std::uint64_t> seeds;
  std::vector<ExperimentRow> rows;

  const ExperimentRow* find(std::string_view label) const;
};

/// Median of a non-empty sample; mean of the middle pair for even sizes.
double median(std::vector<double> values);

using CellCallback = std::function<void(const std::string& label, const CellScores&)>;

/// Trains every variant under every seed on the same split and scores it on
/// the test split. `base` supplies everything but the variant flags and seed.
ExperimentReport run_ablation(const ModelConfig& base, const corpus::CorpusSplit& split,
                              std::span<const std::string> variants,
                              std::span<const std::uint64_t> seeds,
                              const CellCallback& on_cell = {});

/// Trains `base` once per (fraction, seed) with the adversarial phase
/// restricted to that fraction of the training split.
ExperimentReport run_fraction_sweep(const ModelConfig& base, const corpus::CorpusSplit& split,
                                    std::span<const double> fractions,
                                    std::span<const std::uint64_t> seeds,
                                    const CellCallback& on_cell = {});

nlohmann::ordered_json to_json(const ExperimentReport& r);
/// Aligned text table of the medians.
std::string format_report(const ExperimentReport& r);

}  // namespace stman::eval

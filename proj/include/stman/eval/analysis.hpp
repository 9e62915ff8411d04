#pragma once

#include <array>
#include <span>
#include <string>

#include <json.hpp>

#include "stman/corpus/dialogue.hpp"
#include "stman/eval/metrics.hpp"

namespace stman::eval {

/// Which user utterance the sentiment heuristic reads.
enum class Anchor : std::uint8_t { Initial, Final };

std::string_view to_string(Anchor a);

struct BaselineResult {
  MetricsReport report;
  std::size_t skipped = 0;  // dialogues without a user utterance
};

/// Predicts satisfaction as the canonical image of the first or last user
/// utterance's sentiment. Throws ContractError when no dialogue qualifies.
BaselineResult heuristic_baseline(std::span<const corpus::Dialogue> dialogues, Anchor anchor);

/// Joint proportions of (satisfaction, anchored user sentiment).
struct CombinationTable {
  Anchor anchor = Anchor::Final;
  std::array<std::array<double, corpus::kNumSentiments>, corpus::kNumSatisfaction> proportion{};
  std::size_t count = 0;
  std::size_t skipped = 0;
};

/// Throws ContractError when no dialogue qualifies.
CombinationTable combination_table(std::span<const corpus::Dialogue> dialogues, Anchor anchor);

nlohmann::ordered_json to_json(const CombinationTable& t);
/// Aligned text grid, satisfaction rows by sentiment columns.
std::string format_table(const CombinationTable& t);

}  // namespace stman::eval

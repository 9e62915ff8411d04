#pragma once

#include <span>

#include "stman/corpus/dialogue.hpp"
#include "stman/corpus/vocab.hpp"
#include "stman/eval/metrics.hpp"
#include "stman/model/stman.hpp"

namespace stman::train {

struct Evaluation {
  eval::MetricsReport use;
  eval::MetricsReport sa;  // empty (count 0) for models without the SA head
  double task_loss = 0.0;  // mean per dialogue, evaluation mode
};

/// Runs the model without dropout over `dialogues` and scores both tasks.
/// Throws ContractError on an empty set.
Evaluation evaluate(const model::StmanModel& model, const corpus::Vocabulary& vocab,
                    std::span<const corpus::Dialogue> dialogues, std::size_t batch_size = 32);

}  // namespace stman::train

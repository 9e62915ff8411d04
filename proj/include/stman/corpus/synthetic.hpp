#pragma once

#include <cstdint>
#include <vector>

#include "stman/corpus/dialogue.hpp"

namespace stman::corpus {

/// Generates `n_dialogues` labeled service dialogues.
///
/// Each dialogue has 4–14 utterances and opens with a user utterance; later
/// speakers switch with probability 0.7 and otherwise repeat. Tokens come
/// from a sentiment-conditioned lexicon plus role-specific filler. With
/// probability `correlation_q` the satisfaction label is the canonical image
/// of the final user utterance's sentiment, otherwise a uniformly drawn
/// different label.
///
/// Dialogue i draws only from an engine seeded with `seed + i`, so the output
/// is independent of generation order.
std::vector<Dialogue> generate_synthetic(std::size_t n_dialogues, double correlation_q,
                                         std::uint64_t seed);

Dialogue generate_synthetic_dialogue(std::size_t index, double correlation_q, std::uint64_t seed);

}  // namespace stman::corpus

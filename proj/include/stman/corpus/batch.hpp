#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "stman/corpus/dialogue.hpp"
#include "stman/corpus/vocab.hpp"

namespace stman::corpus {

inline constexpr std::size_t kMaxTokensPerUtterance = 30;
inline constexpr std::size_t kMaxUtterancesPerDialogue = 14;

/// A dialogue mapped to ids with caps applied (first 30 tokens of each
/// utterance, first 14 utterances) and turn flags derived.
struct EncodedDialogue {
  std::vector<std::vector<std::int64_t>> tokens;
  std::vector<Role> roles;
  std::vector<std::uint8_t> turn_flags;
  std::vector<std::int64_t> sentiments;
  std::int64_t satisfaction = 0;

  std::size_t length() const { return roles.size(); }
};

EncodedDialogue encode(const Dialogue& d, const Vocabulary& vocab);

/// Padded mini-batch. Utterance slot (b, t) lives at index b·max_utterances + t;
/// token (b, t, i) at slot·max_tokens + i. Padding is carried only by masks:
/// padded tokens hold the PAD id with token_mask 0, padded utterances are
/// all-PAD with utterance_valid 0 and every loss weight 0.
struct Batch {
  std::size_t size = 0;
  std::size_t max_utterances = 0;
  std::size_t max_tokens = 0;

  std::vector<std::size_t> lengths;             // real utterances per dialogue
  std::vector<std::int64_t> token_ids;          // size · max_utterances · max_tokens
  std::vector<std::uint8_t> token_mask;         // same layout
  std::vector<std::uint8_t> utterance_valid;    // size · max_utterances
  std::vector<std::uint8_t> is_user;            // 0 on padded slots
  std::vector<std::uint8_t> turn_flags;         // 0 on padded slots
  std::vector<std::int64_t> sentiment;          // -1 on padded slots
  std::vector<double> sa_weight;                // 1/L on real slots, 0 on padding
  std::vector<std::int64_t> satisfaction;       // one per dialogue

  std::size_t slot(std::size_t b, std::size_t t) const { return b * max_utterances + t; }
};

Batch make_batch(std::span<const EncodedDialogue> dialogues);

/// Consecutive batches of `batch_size` dialogues, in input order. Throws
/// ContractError when batch_size is 0.
std::vector<Batch> batchify(std::span<const EncodedDialogue> dialogues, std::size_t batch_size);
std::vector<Batch> batchify(std::span<const Dialogue> dialogues, const Vocabulary& vocab,
                            std::size_t batch_size);

}  // namespace stman::corpus

#include "stman/corpus/batch.hpp"

#include <algorithm>

#include "stman/errors.hpp"

namespace stman::corpus {

EncodedDialogue encode(const Dialogue& d, const Vocabulary& vocab) {
  if (d.utterances.empty()) throw ContractError("dialogue " + d.id + " has no utterances");
  EncodedDialogue out;
  const std::size_t n = std::min(d.utterances.size(), kMaxUtterancesPerDialogue);
  for (std::size_t t = 0; t < n; ++t) {
    const Utterance& u = d.utterances[t];
    if (u.tokens.empty()) throw ContractError("dialogue " + d.id + " has an empty utterance");
    std::vector<std::int64_t> ids;
    const std::size_t m = std::min(u.tokens.size(), kMaxTokensPerUtterance);
    ids.reserve(m);
    for (std::size_t i = 0; i < m; ++i) ids.push_back(vocab.id(u.tokens[i]));
    out.tokens.push_back(std::move(ids));
    out.roles.push_back(u.speaker);
    out.sentiments.push_back(static_cast<std::int64_t>(u.sentiment));
  }
  out.turn_flags = relabel_speaker_turns(out.roles);
  out.satisfaction = static_cast<std::int64_t>(d.satisfaction);
  return out;
}

Batch make_batch(std::span<const EncodedDialogue> dialogues) {
  Batch b;
  b.size = dialogues.size();
  for (const auto& d : dialogues) {
    b.max_utterances = std::max(b.max_utterances, d.length());
    for (const auto& u : d.tokens) b.max_tokens = std::max(b.max_tokens, u.size());
  }
  const std::size_t slots = b.size * b.max_utterances;
  b.token_ids.assign(slots * b.max_tokens, Vocabulary::kPad);
  b.token_mask.assign(slots * b.max_tokens, 0);
  b.utterance_valid.assign(slots, 0);
  b.is_user.assign(slots, 0);
  b.turn_flags.assign(slots, 0);
  b.sentiment.assign(slots, -1);
  b.sa_weight.assign(slots, 0.0);

  for (std::size_t i = 0; i < b.size; ++i) {
    const EncodedDialogue& d = dialogues[i];
    b.lengths.push_back(d.length());
    b.satisfaction.push_back(d.satisfaction);
    for (std::size_t t = 0; t < d.length(); ++t) {
      const std::size_t s = b.slot(i, t);
      b.utterance_valid[s] = 1;
      b.is_user[s] = d.roles[t] == Role::User ? 1 : 0;
      b.turn_flags[s] = d.turn_flags[t];
      b.sentiment[s] = d.sentiments[t];
      b.sa_weight[s] = 1.0 / static_cast<double>(d.length());
      for (std::size_t k = 0; k < d.tokens[t].size(); ++k) {
        b.token_ids[s * b.max_tokens + k] = d.tokens[t][k];
        b.token_mask[s * b.max_tokens + k] = 1;
      }
    }
  }
  return b;
}

std::vector<Batch> batchify(std::span<const EncodedDialogue> dialogues, std::size_t batch_size) {
  if (batch_size == 0) throw ContractError("batchify: batch_size must be >= 1");
  std::vector<Batch> out;
  for (std::size_t start = 0; start < dialogues.size(); start += batch_size) {
    const std::size_t n = std::min(batch_size, dialogues.size() - start);
    out.push_back(make_batch(dialogues.subspan(start, n)));
  }
  return out;
}

std::vector<Batch> batchify(std::span<const Dialogue> dialogues, const Vocabulary& vocab,
                            std::size_t batch_size) {
  std::vector<EncodedDialogue> encoded;
  encoded.reserve(dialogues.size());
  for (const auto& d : dialogues) encoded.push_back(encode(d, vocab));
  return batchify(encoded, batch_size);
}

}  // namespace stman::corpus

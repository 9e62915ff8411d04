#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "stman/corpus/batch.hpp"
#include "stman/numerics/params.hpp"
#include "stman/numerics/tape.hpp"

namespace stman::model {

using num::Parameter;
using num::ParamStore;
using num::Tape;
using num::Var;

/// One LSTM direction. Gate blocks inside the 4E-wide weights are ordered
/// [input, forget, output, cell].
struct LstmWeights {
  Parameter* wx = nullptr;  // D × 4E
  Parameter* wh = nullptr;  // E × 4E
  Parameter* b = nullptr;   // 1 × 4E
};

/// Shared utterance encoder: word embeddings, a BiLSTM, and additive
/// attention pooling
///
///   score_i = tanh(w · [h→_i ; h←_i] + b),  β = masked softmax(score),
///   v = Σ_i β_i [h→_i ; h←_i]
///
/// Parameters are registered under the "enc." prefix.
class Encoder {
 public:
  Encoder(ParamStore& store, std::size_t vocab_size, std::size_t embed_dim, std::size_t hidden);

  std::size_t output_dim() const { return 2 * hidden_; }
  std::size_t hidden() const { return hidden_; }

  struct Rows {
    Var vectors;    // N × 2E
    Var attention;  // N × T, exactly 0 on masked tokens
  };

  /// Encodes N utterances laid out as an N × T token grid (row-major).
  /// Rows with no unmasked token yield a zero vector.
  Rows encode_rows(Tape& tape, std::span<const std::int64_t> token_ids,
                   std::span<const std::uint8_t> token_mask, std::size_t n_rows) const;

  /// 1 × 2E vector for one utterance. Throws ContractError when every token
  /// is masked.
  Rows encode_utterance(Tape& tape, std::span<const std::int64_t> token_ids,
                        std::span<const std::uint8_t> token_mask) const;
  Rows encode_utterance(Tape& tape, std::span<const std::int64_t> token_ids) const;

  struct BatchEncoding {
    Var vectors;                          // one row per real utterance, batch order
    Var attention;
    std::vector<std::int64_t> slot_row;   // per batch slot: row in `vectors`, -1 if padded
  };

  /// Encodes every real utterance in the batch; padded slots map to -1 and
  /// are never computed.
  BatchEncoding encode_batch(Tape& tape, const corpus::Batch& batch) const;

 private:
  std::size_t hidden_;
  Parameter* embed_;
  LstmWeights fwd_;
  LstmWeights bwd_;
  Parameter* att_w_;  // 2E × 1
  Parameter* att_b_;  // 1 × 1
};

}  // namespace stman::model

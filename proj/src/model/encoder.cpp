#include "stman/model/encoder.hpp"

#include "stman/errors.hpp"

namespace stman::model {

namespace {

LstmWeights register_lstm(ParamStore& store, const std::string& prefix, std::size_t in,
                          std::size_t hidden) {
  using num::ParamGroup;
  return LstmWeights{
      &store.add(prefix + ".Wx", ParamGroup::Encoder, in, 4 * hidden),
      &store.add(prefix + ".Wh", ParamGroup::Encoder, hidden, 4 * hidden),
      &store.add(prefix + ".b", ParamGroup::Encoder, 1, 4 * hidden),
  };
}

struct BoundLstm {
  Var wx, wh, b;
};

struct LstmState {
  Var h, c;
};

/// `xw` is the input projection x·Wx of this step.
LstmState lstm_step(const BoundLstm& w, std::size_t hidden, Var xw, LstmState prev,
                    std::span<const std::uint8_t> keep) {
  Var gates = num::add_bias(num::add(xw, num::matmul(prev.h, w.wh)), w.b);
  Var i = num::sigmoid(num::slice_cols(gates, 0, hidden));
  Var f = num::sigmoid(num::slice_cols(gates, hidden, hidden));
  Var o = num::sigmoid(num::slice_cols(gates, 2 * hidden, hidden));
  Var g = num::tanh(num::slice_cols(gates, 3 * hidden, hidden));
  Var c = num::add(num::hadamard(f, prev.c), num::hadamard(i, g));
  Var h = num::hadamard(o, num::tanh(c));
  // Masked positions carry the previous state through unchanged.
  return {num::select_rows(keep, h, prev.h), num::select_rows(keep, c, prev.c)};
}

}  // namespace

Encoder::Encoder(ParamStore& store, std::size_t vocab_size, std::size_t embed_dim,
                 std::size_t hidden)
    : hidden_(hidden),
      embed_(&store.add("enc.embed", num::ParamGroup::Encoder, vocab_size, embed_dim)),
      fwd_(register_lstm(store, "enc.fwd", embed_dim, hidden)),
      bwd_(register_lstm(store, "enc.bwd", embed_dim, hidden)),
      att_w_(&store.add("enc.att.w", num::ParamGroup::Encoder, 2 * hidden, 1)),
      att_b_(&store.add("enc.att.b", num::ParamGroup::Encoder, 1, 1)) {}

Encoder::Rows Encoder::encode_rows(Tape& tape, std::span<const std::int64_t> token_ids,
                                   std::span<const std::uint8_t> token_mask,
                                   std::size_t n_rows) const {
  if (n_rows == 0 || token_ids.size() % n_rows != 0 || token_mask.size() != token_ids.size()) {
    throw ShapeError("encode_rows: token grid of " + std::to_string(token_ids.size()) +
                     " ids and " + std::to_string(token_mask.size()) + " mask bits for " +
                     std::to_string(n_rows) + " rows");
  }
  const std::size_t steps = token_ids.size() / n_rows;
  if (steps == 0) throw ShapeError("encode_rows: zero-length token grid");

  Var embed = tape.param(*embed_);
  const BoundLstm fw{tape.param(*fwd_.wx), tape.param(*fwd_.wh), tape.param(*fwd_.b)};
  const BoundLstm bw{tape.param(*bwd_.wx), tape.param(*bwd_.wh), tape.param(*bwd_.b)};

  // gather(E, ids)·Wx == gather(E·Wx, ids). Projecting the vocabulary once
  // is cheaper whenever it has fewer rows than the grid has token positions.
  const bool project_vocab = embed_->value.rows() < n_rows * steps;
  const Var table_f = project_vocab ? num::matmul(embed, fw.wx) : Var{};
  const Var table_b = project_vocab ? num::matmul(embed, bw.wx) : Var{};

  std::vector<Var> xw_f(steps), xw_b(steps);
  std::vector<std::vector<std::uint8_t>> keep(steps, std::vector<std::uint8_t>(n_rows));
  for (std::size_t t = 0; t < steps; ++t) {
    std::vector<std::int64_t> ids(n_rows);
    for (std::size_t r = 0; r < n_rows; ++r) {
      const std::size_t k = r * steps + t;
      keep[t][r] = token_mask[k];
      ids[r] = token_mask[k] != 0 ? token_ids[k] : -1;
    }
    if (project_vocab) {
      xw_f[t] = num::gather_rows(table_f, ids);
      xw_b[t] = num::gather_rows(table_b, ids);
    } else {
      const Var x = num::gather_rows(embed, ids);
      xw_f[t] = num::matmul(x, fw.wx);
      xw_b[t] = num::matmul(x, bw.wx);
    }
  }

  const Var zeros = tape.constant(num::Matrix(n_rows, hidden_));
  std::vector<Var> h_fwd(steps), h_bwd(steps);
  LstmState state{zeros, zeros};
  for (std::size_t t = 0; t < steps; ++t) {
    state = lstm_step(fw, hidden_, xw_f[t], state, keep[t]);
    h_fwd[t] = state.h;
  }
  state = {zeros, zeros};
  for (std::size_t t = steps; t-- > 0;) {
    state = lstm_step(bw, hidden_, xw_b[t], state, keep[t]);
    h_bwd[t] = state.h;
  }

  const Var att_w = tape.param(*att_w_);
  const Var att_b = tape.param(*att_b_);
  std::vector<Var> states(steps), scores(steps);
  for (std::size_t t = 0; t < steps; ++t) {
    const Var pair[] = {h_fwd[t], h_bwd[t]};
    states[t] = num::hconcat(pair);
    scores[t] = num::tanh(num::add_bias(num::matmul(states[t], att_w), att_b));
  }
  Var beta = num::masked_softmax_rows(num::hconcat(scores), token_mask);

  Var pooled = num::mul_col(states[0], num::slice_cols(beta, 0, 1));
  for (std::size_t t = 1; t < steps; ++t) {
    pooled = num::add(pooled, num::mul_col(states[t], num::slice_cols(beta, t, 1)));
  }
  return {pooled, beta};
}

Encoder::Rows Encoder::encode_utterance(Tape& tape, std::span<const std::int64_t> token_ids,
                                        std::span<const std::uint8_t> token_mask) const {
  bool any = false;
  for (auto m : token_mask) any = any || m != 0;
  if (!any) throw ContractError("encode_utterance: every token is masked");
  return encode_rows(tape, token_ids, token_mask, 1);
}

Encoder::Rows Encoder::encode_utterance(Tape& tape, std::span<const std::int64_t> token_ids) const {
  const std::vector<std::uint8_t> mask(token_ids.size(), 1);
  return encode_utterance(tape, token_ids, mask);
}

Encoder::BatchEncoding Encoder::encode_batch(Tape& tape, const corpus::Batch& batch) const {
  BatchEncoding out;
  out.slot_row.assign(batch.size * batch.max_utterances, -1);
  std::vector<std::int64_t> ids;
  std::vector<std::uint8_t> mask;
  std::int64_t rows = 0;
  for (std::size_t s = 0; s < out.slot_row.size(); ++s) {
    if (batch.utterance_valid[s] == 0) continue;
    out.slot_row[s] = rows++;
    const std::size_t base = s * batch.max_tokens;
    ids.insert(ids.end(), batch.token_ids.begin() + static_cast<std::ptrdiff_t>(base),
               batch.token_ids.begin() + static_cast<std::ptrdiff_t>(base + batch.max_tokens));
    mask.insert(mask.end(), batch.token_mask.begin() + static_cast<std::ptrdiff_t>(base),
                batch.token_mask.begin() + static_cast<std::ptrdiff_t>(base + batch.max_tokens));
  }
  if (rows == 0) throw ContractError("encode_batch: batch has no utterances");
  Rows r = encode_rows(tape, ids, mask, static_cast<std::size_t>(rows));
  out.vectors = r.vectors;
  out.attention = r.attention;
  return out;
}

}  // namespace stman::model

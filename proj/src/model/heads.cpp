#include "stman/model/heads.hpp"

#include "stman/corpus/dialogue.hpp"
#include "stman/errors.hpp"

namespace stman::model {

using num::ParamGroup;

UseHead::UseHead(ParamStore& store, std::size_t hidden, std::size_t attention)
    : wu_(&store.add("use.Wu", ParamGroup::UseHead, hidden, attention)),
      bu_(&store.add("use.bu", ParamGroup::UseHead, 1, attention)),
      uu_(&store.add("use.Uu", ParamGroup::UseHead, attention, 1)),
      wo_(&store.add("use.Wo", ParamGroup::UseHead, 2 * hidden, corpus::kNumSatisfaction)),
      bo_(&store.add("use.bo", ParamGroup::UseHead, 1, corpus::kNumSatisfaction)) {}

UseHead::Output UseHead::decode(Tape& tape, std::span<const Var> hidden_steps,
                                std::span<const std::uint8_t> keep, Var last) const {
  if (hidden_steps.empty()) throw ShapeError("use_decode: no hidden states");
  const std::size_t rows = hidden_steps[0].rows();
  if (keep.size() != rows * hidden_steps.size()) {
    throw ShapeError("use_decode: role mask has " + std::to_string(keep.size()) + " entries for " +
                     std::to_string(rows) + " dialogues × " + std::to_string(hidden_steps.size()) +
                     " steps");
  }
  const Var wu = tape.param(*wu_);
  const Var bu = tape.param(*bu_);
  const Var uu = tape.param(*uu_);
  std::vector<Var> scores;
  scores.reserve(hidden_steps.size());
  for (Var h : hidden_steps) {
    scores.push_back(num::matmul(num::tanh(num::add_bias(num::matmul(h, wu), bu)), uu));
  }
  Var alpha = num::masked_softmax_rows(num::hconcat(scores), keep);
  Var pooled = num::mul_col(hidden_steps[0], num::slice_cols(alpha, 0, 1));
  for (std::size_t t = 1; t < hidden_steps.size(); ++t) {
    pooled = num::add(pooled, num::mul_col(hidden_steps[t], num::slice_cols(alpha, t, 1)));
  }
  const Var parts[] = {pooled, last};
  Var logits = num::add_bias(num::matmul(num::hconcat(parts), tape.param(*wo_)), tape.param(*bo_));
  return {num::softmax_rows(logits), alpha};
}

SaHead::SaHead(ParamStore& store, std::size_t hidden)
    : w_(&store.add("sa.W", ParamGroup::SaHead, hidden, corpus::kNumSentiments)),
      b_(&store.add("sa.b", ParamGroup::SaHead, 1, corpus::kNumSentiments)) {}

Var SaHead::decode_step(Tape& tape, Var hidden) const {
  return num::softmax_rows(num::add_bias(num::matmul(hidden, tape.param(*w_)), tape.param(*b_)));
}

std::vector<Var> SaHead::decode(Tape& tape, std::span<const Var> hidden_steps) const {
  std::vector<Var> out;
  out.reserve(hidden_steps.size());
  for (Var h : hidden_steps) out.push_back(decode_step(tape, h));
  return out;
}

Discriminator::Discriminator(ParamStore& store, std::size_t hidden)
    : gru_(register_gru(store, "td.gru", ParamGroup::Discriminator, hidden, hidden, false)),
      w_(&store.add("td.W", ParamGroup::Discriminator, hidden, kNumTasks)),
      b_(&store.add("td.b", ParamGroup::Discriminator, 1, kNumTasks)),
      hidden_(hidden) {}

std::vector<Var> Discriminator::discriminate(
    Tape& tape, std::span<const Var> feature_steps,
    const std::vector<std::vector<std::uint8_t>>& valid) const {
  if (feature_steps.empty()) throw ShapeError("discriminate: no feature steps");
  if (valid.size() != feature_steps.size()) {
    throw ShapeError("discriminate: validity mask covers " + std::to_string(valid.size()) +
                     " of " + std::to_string(feature_steps.size()) + " steps");
  }
  const Var w = tape.param(*w_);
  const Var b = tape.param(*b_);
  Var h = tape.constant(num::Matrix(feature_steps[0].rows(), hidden_));
  std::vector<Var> out;
  out.reserve(feature_steps.size());
  for (std::size_t t = 0; t < feature_steps.size(); ++t) {
    h = num::select_rows(valid[t], gru_step(tape, gru_, h, feature_steps[t]), h);
    out.push_back(num::softmax_rows(num::add_bias(num::matmul(h, w), b)));
  }
  return out;
}

std::size_t argmax(std::span<const double> row) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < row.size(); ++i) {
    if (row[i] > row[best]) best = i;
  }
  return best;
}

}  // namespace stman::model

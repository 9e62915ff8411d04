#include "stman/model/stman.hpp"

#include "stman/errors.hpp"

namespace stman::model {

StmanModel::StmanModel(const ModelConfig& config, std::size_t vocab_size)
    : config_(config), vocab_size_(vocab_size) {
  config_.validate();
  encoder_ = std::make_unique<Encoder>(params_, vocab_size, config_.D, config_.E);
  interaction_ = std::make_unique<Interaction>(params_, config_, encoder_->output_dim());
  use_head_ = std::make_unique<UseHead>(params_, config_.K, config_.H);
  if (config_.use_aux) sa_head_ = std::make_unique<SaHead>(params_, config_.K);
  if (config_.use_td) discriminator_ = std::make_unique<Discriminator>(params_, config_.K);
}

void StmanModel::init(std::uint64_t seed) {
  params_.init_uniform(seed, -config_.init_range, config_.init_range);
}

StepLayout make_layout(const corpus::Batch& batch, std::span<const std::int64_t> slot_row) {
  StepLayout l;
  l.batch = batch.size;
  l.steps = batch.max_utterances;
  l.row.assign(l.steps, std::vector<std::int64_t>(l.batch, -1));
  l.valid.assign(l.steps, std::vector<std::uint8_t>(l.batch, 0));
  l.turn_flag.assign(l.steps, std::vector<std::int64_t>(l.batch, -1));
  for (std::size_t t = 0; t < l.steps; ++t) {
    for (std::size_t b = 0; b < l.batch; ++b) {
      const std::size_t s = batch.slot(b, t);
      if (batch.utterance_valid[s] == 0) continue;
      l.row[t][b] = slot_row[s];
      l.valid[t][b] = 1;
      l.turn_flag[t][b] = batch.turn_flags[s];
    }
  }
  return l;
}

std::vector<std::uint8_t> attention_keep(const corpus::Batch& batch, bool use_mask) {
  std::vector<std::uint8_t> keep(batch.utterance_valid.size());
  for (std::size_t s = 0; s < keep.size(); ++s) {
    keep[s] = use_mask ? static_cast<std::uint8_t>(batch.utterance_valid[s] & batch.is_user[s])
                       : batch.utterance_valid[s];
  }
  return keep;
}

ForwardResult StmanModel::forward(Tape& tape, const corpus::Batch& batch, Pass pass,
                                  Rng* dropout_rng) const {
  Encoder::BatchEncoding enc = encoder_->encode_batch(tape, batch);
  return forward_from_utterances(tape, enc.vectors, make_layout(batch, enc.slot_row), batch, pass,
                                 dropout_rng);
}

ForwardResult StmanModel::forward_unbatched(Tape& tape, const corpus::EncodedDialogue& dialogue,
                                            Pass pass, Rng* dropout_rng) const {
  std::vector<Var> rows;
  rows.reserve(dialogue.length());
  for (const auto& ids : dialogue.tokens) rows.push_back(encoder_->encode_utterance(tape, ids).vectors);
  const corpus::Batch single = corpus::make_batch(std::span(&dialogue, 1));
  return forward_from_utterances(tape, num::stack_rows(rows),
                                 StepLayout::single(dialogue.turn_flags), single, pass, dropout_rng);
}

ForwardResult StmanModel::forward_from_utterances(Tape& tape, Var utterances, StepLayout layout,
                                                  const corpus::Batch& batch, Pass pass,
                                                  Rng* dropout_rng) const {
  ForwardResult out;
  out.layout = std::move(layout);

  if (dropout_rng != nullptr && config_.dropout > 0.0) {
    // Inverted dropout: survivors are scaled so evaluation needs no rescale.
    const double keep_p = 1.0 - config_.dropout;
    num::Matrix mask(utterances.rows(), utterances.cols());
    for (double& m : mask.values()) m = dropout_rng->bernoulli(keep_p) ? 1.0 / keep_p : 0.0;
    utterances = num::hadamard(utterances, tape.constant(std::move(mask)));
  }
  out.utterances = utterances;
  out.projected = interaction_->project(tape, utterances);

  if (pass == Pass::Task || pass == Pass::Both) {
    out.streams = interaction_->run(tape, out.projected, out.layout);
    const auto keep = attention_keep(batch, config_.use_mask);
    out.use = use_head_->decode(tape, out.streams.h_use, keep, out.streams.h_use.back());
    if (sa_head_) out.sa_probs = sa_head_->decode(tape, out.streams.h_sa);
  }

  if (pass == Pass::Adversarial || pass == Pass::Both) {
    if (!discriminator_) throw ContractError("adversarial pass requires use_td");
    std::vector<Var> x_use, x_sa;
    for (std::size_t t = 0; t < out.layout.steps; ++t) {
      x_use.push_back(num::gather_rows(out.projected.x_use, out.layout.row[t]));
      x_sa.push_back(num::gather_rows(out.projected.x_sa, out.layout.row[t]));
    }
    out.td_use = discriminator_->discriminate(tape, x_use, out.layout.valid);
    out.td_sa = discriminator_->discriminate(tape, x_sa, out.layout.valid);
  }
  return out;
}

Predictions StmanModel::predict(const corpus::Batch& batch) const {
  Tape tape;
  ForwardResult f = forward(tape, batch, Pass::Task, nullptr);
  Predictions p;
  const num::Matrix& use = f.use.probs.value();
  for (std::size_t b = 0; b < batch.size; ++b) {
    p.satisfaction.push_back(argmax(use.row(b)));
    std::vector<std::size_t> sents;
    if (!f.sa_probs.empty()) {
      for (std::size_t t = 0; t < batch.lengths[b]; ++t) {
        sents.push_back(argmax(f.sa_probs[t].value().row(b)));
      }
    }
    p.sentiment.push_back(std::move(sents));
  }
  return p;
}

}  // namespace stman::model

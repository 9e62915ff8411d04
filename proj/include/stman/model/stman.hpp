#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "stman/corpus/batch.hpp"
#include "stman/model/config.hpp"
#include "stman/model/encoder.hpp"
#include "stman/model/heads.hpp"
#include "stman/model/interaction.hpp"
#include "stman/rng.hpp"

namespace stman::model {

enum class Pass : std::uint8_t {
  Task,         // encoder → interaction → USE/SA heads
  Adversarial,  // encoder → projections → discriminator
  Both,
};

struct ForwardResult {
  StepLayout layout;
  Var utterances;                  // encoder output rows (after dropout)
  Interaction::Projected projected;
  Interaction::Streams streams;    // empty for Pass::Adversarial
  UseHead::Output use;             // unbound for Pass::Adversarial
  std::vector<Var> sa_probs;       // per step; empty without the SA task
  std::vector<Var> td_use;         // discriminator output on X^m steps
  std::vector<Var> td_sa;          // discriminator output on X^a steps
};

struct Predictions {
  std::vector<std::size_t> satisfaction;               // per dialogue
  std::vector<std::vector<std::size_t>> sentiment;     // per dialogue, per real utterance
};

/// The full network. Sub-modules allocated depend on the variant flags:
/// without use_aux there is no SA projection, SA GRU or SA head; without
/// use_td no discriminator; without use_st no turn embeddings.
class StmanModel {
 public:
  StmanModel(const ModelConfig& config, std::size_t vocab_size);
  StmanModel(const StmanModel&) = delete;
  StmanModel& operator=(const StmanModel&) = delete;

  const ModelConfig& config() const { return config_; }
  std::size_t vocab_size() const { return vocab_size_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

  /// U(-init_range, init_range) everywhere.
  void init(std::uint64_t seed);

  const Encoder& encoder() const { return *encoder_; }
  const Interaction& interaction() const { return *interaction_; }
  const UseHead& use_head() const { return *use_head_; }
  const SaHead* sa_head() const { return sa_head_.get(); }
  const Discriminator* discriminator() const { return discriminator_.get(); }

  /// `dropout_rng` == nullptr means evaluation mode (no dropout).
  ForwardResult forward(Tape& tape, const corpus::Batch& batch, Pass pass,
                        Rng* dropout_rng = nullptr) const;

  /// Same network on one dialogue without any padding: each utterance is
  /// encoded on its own at its exact length. Reference path for the
  /// batched implementation.
  ForwardResult forward_unbatched(Tape& tape, const corpus::EncodedDialogue& dialogue, Pass pass,
                                  Rng* dropout_rng = nullptr) const;

  Predictions predict(const corpus::Batch& batch) const;

 private:
  ForwardResult forward_from_utterances(Tape& tape, Var utterances, StepLayout layout,
                                        const corpus::Batch& batch, Pass pass,
                                        Rng* dropout_rng) const;

  ModelConfig config_;
  std::size_t vocab_size_;
  ParamStore params_;
  std::unique_ptr<Encoder> encoder_;
  std::unique_ptr<Interaction> interaction_;
  std::unique_ptr<UseHead> use_head_;
  std::unique_ptr<SaHead> sa_head_;
  std::unique_ptr<Discriminator> discriminator_;
};

/// Step layout of a padded batch given the encoder's slot → row map.
StepLayout make_layout(const corpus::Batch& batch, std::span<const std::int64_t> slot_row);

/// batch × steps attention eligibility: real user utterances when
/// use_mask is on, every real utterance otherwise.
std::vector<std::uint8_t> attention_keep(const corpus::Batch& batch, bool use_mask);

}  // namespace stman::model

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "stman/model/config.hpp"
#include "stman/numerics/params.hpp"
#include "stman/numerics/tape.hpp"

namespace stman::model {

using num::Parameter;
using num::ParamStore;
using num::Tape;
using num::Var;

enum class Task : std::uint8_t { Use, Sa };

/// Bias-free GRU weights in row-vector convention (x · W). The shared-link
/// matrices Us* are present only for the task-private variant.
struct GruWeights {
  Parameter* wr = nullptr;
  Parameter* wz = nullptr;
  Parameter* wh = nullptr;
  Parameter* ur = nullptr;
  Parameter* uz = nullptr;
  Parameter* uh = nullptr;
  Parameter* usr = nullptr;
  Parameter* usz = nullptr;
  Parameter* ush = nullptr;

  bool has_shared_links() const { return usr != nullptr; }
};

GruWeights register_gru(ParamStore& store, const std::string& prefix, num::ParamGroup group,
                        std::size_t input, std::size_t hidden, bool shared_links);

/// Standard GRU step:
///   r = δ(x Wr + h Ur), z = δ(x Wz + h Uz), ĥ = τ(x Wh + (h ⊙ r) Uh),
///   h' = (1 − z) ⊙ h + z ⊙ ĥ
Var gru_step(Tape& tape, const GruWeights& w, Var h_prev, Var x);

/// Task-private variant; every gate also reads the same-step shared state:
///   r = δ(x Wr + h Ur + hs Usr), z = δ(x Wz + h Uz + hs Usz),
///   ĥ = τ(x Wh + (h ⊙ r) Uh + hs Ush), h' = (1 − z) ⊙ h + z ⊙ ĥ
Var gru_task_step(Tape& tape, const GruWeights& w, Var h_prev, Var h_shared, Var x);

/// Per-step view of a batch for the recurrent layers: step t has one row per
/// dialogue.
struct StepLayout {
  std::size_t batch = 0;
  std::size_t steps = 0;
  std::vector<std::vector<std::int64_t>> row;          // [t][b] row in the utterance matrix, -1 if padded
  std::vector<std::vector<std::uint8_t>> valid;        // [t][b]
  std::vector<std::vector<std::int64_t>> turn_flag;    // [t][b], -1 if padded

  /// Layout of a single unpadded dialogue whose utterances are rows 0..L-1.
  static StepLayout single(std::span<const std::uint8_t> turn_flags);
};

/// Dense projections, the shared GRU applied to each task stream, the two
/// task-private GRUs, and the speaker-turn embeddings.
class Interaction {
 public:
  Interaction(ParamStore& store, const ModelConfig& config, std::size_t input_dim);

  struct Projected {
    Var x_use;  // rows × K
    Var x_sa;   // rows × K; unbound when the SA stream is disabled
  };

  /// X^m = tanh(V W_dm + b_dm), X^a = tanh(V W_da + b_da).
  Projected project(Tape& tape, Var utterances) const;

  Var shared_step(Tape& tape, Var h_prev, Var x) const;
  /// x_aug must already carry the turn embedding when use_st is on.
  Var task_step(Tape& tape, Task task, Var h_prev, Var h_shared, Var x_aug) const;

  struct Streams {
    std::vector<Var> x_use, x_sa;        // per step, batch × K
    std::vector<Var> shared_use, shared_sa;
    std::vector<Var> h_use, h_sa;
  };

  /// Runs both task streams over all steps from zero initial states. Padded
  /// steps carry each dialogue's state forward, so the final step holds the
  /// last real hidden state of every dialogue.
  Streams run(Tape& tape, const Projected& projected, const StepLayout& layout) const;

  bool has_sa_stream() const { return dense_sa_w_ != nullptr; }
  std::size_t hidden() const { return hidden_; }
  std::size_t turn_dim() const { return turn_dim_; }
  bool uses_turns() const { return turn_emb_ != nullptr; }

 private:
  std::size_t hidden_;
  std::size_t turn_dim_;
  Parameter* dense_use_w_;
  Parameter* dense_use_b_;
  Parameter* dense_sa_w_ = nullptr;
  Parameter* dense_sa_b_ = nullptr;
  GruWeights shared_;
  GruWeights use_;
  GruWeights sa_;
  Parameter* turn_emb_ = nullptr;  // 2 × Z
};

}  // namespace stman::model

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "stman/model/interaction.hpp"

namespace stman::model {

inline constexpr std::size_t kNumTasks = 2;  // discriminator classes {USE, SA}
inline constexpr std::int64_t kTaskUse = 0;
inline constexpr std::int64_t kTaskSa = 1;

/// Satisfaction decoder with role-selected attention:
///   u_t = tanh(h_t Wu + bu), α = masked softmax(u_t · Uu) over kept steps,
///   o = [Σ_t α_t h_t ; h_L], p = softmax(o Wo + bo)
class UseHead {
 public:
  UseHead(ParamStore& store, std::size_t hidden, std::size_t attention);

  struct Output {
    Var probs;  // batch × 3
    Var alpha;  // batch × steps
  };

  /// `keep` is batch × steps (row-major): positions eligible for attention.
  /// `last` holds each dialogue's final real hidden state. A row with nothing
  /// kept gets α = 0 and o = [0 ; h_L].
  Output decode(Tape& tape, std::span<const Var> hidden_steps,
                std::span<const std::uint8_t> keep, Var last) const;

 private:
  Parameter* wu_;
  Parameter* bu_;
  Parameter* uu_;
  Parameter* wo_;
  Parameter* bo_;
};

/// Per-utterance sentiment decoder: p_t = softmax(h_t Wa + ba).
class SaHead {
 public:
  SaHead(ParamStore& store, std::size_t hidden);
  Var decode_step(Tape& tape, Var hidden) const;
  std::vector<Var> decode(Tape& tape, std::span<const Var> hidden_steps) const;

 private:
  Parameter* w_;
  Parameter* b_;
};

/// Task discriminator: a GRU over task-specific features followed by a
/// per-step softmax over {USE, SA}.
class Discriminator {
 public:
  Discriminator(ParamStore& store, std::size_t hidden);
  /// Per-step probabilities (batch × 2). Padded steps carry the GRU state.
  std::vector<Var> discriminate(Tape& tape, std::span<const Var> feature_steps,
                                const std::vector<std::vector<std::uint8_t>>& valid) const;

 private:
  GruWeights gru_;
  Parameter* w_;
  Parameter* b_;
  std::size_t hidden_;
};

/// Index of the largest entry; ties go to the lowest index.
std::size_t argmax(std::span<const double> row);

}  // namespace stman::model

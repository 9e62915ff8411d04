#pragma once

#include "stman/corpus/batch.hpp"
#include "stman/model/stman.hpp"

namespace stman::train {

using num::Var;

/// Multi-task loss averaged over the dialogues of the batch. Per dialogue:
///
///   L = −log p^m[g^m] − (1/L) Σ_t log p^a_t[g^a_t]
///
/// where t ranges over real utterances only. The SA term is dropped when
/// `use_aux` is off. Logs clamp at 1e-12.
Var task_loss(const model::ForwardResult& f, const corpus::Batch& batch, bool use_aux);

/// Satisfaction term alone, averaged over dialogues.
Var use_loss(const model::ForwardResult& f, const corpus::Batch& batch);

/// Discriminator log-likelihood of the true task label (X^m → USE,
/// X^a → SA), averaged over the 2L feature rows of each dialogue and then
/// over dialogues. A perfect discriminator scores 0; a uniform one −ln 2.
/// The maximization step ascends this value, the minimization step descends it.
Var adv_objective(const model::ForwardResult& f, const corpus::Batch& batch);

/// Fraction of real feature rows the discriminator assigns to the right task.
double discriminator_accuracy(const model::ForwardResult& f, const corpus::Batch& batch);

}  // namespace stman::train

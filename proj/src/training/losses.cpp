#include "stman/training/losses.hpp"

#include "stman/errors.hpp"

namespace stman::train {

namespace {

struct StepTargets {
  std::vector<std::int64_t> target;
  std::vector<double> weight;
};

StepTargets sentiment_targets(const corpus::Batch& batch, std::size_t t) {
  StepTargets s;
  const double inv_b = 1.0 / static_cast<double>(batch.size);
  for (std::size_t b = 0; b < batch.size; ++b) {
    const std::size_t slot = batch.slot(b, t);
    s.target.push_back(batch.sentiment[slot]);
    s.weight.push_back(batch.sa_weight[slot] * inv_b);
  }
  return s;
}

}  // namespace

Var use_loss(const model::ForwardResult& f, const corpus::Batch& batch) {
  if (!f.use.probs.valid()) throw ContractError("use_loss: forward result has no USE output");
  const std::vector<double> weights(batch.size, 1.0 / static_cast<double>(batch.size));
  return num::scale(num::log_likelihood(f.use.probs, batch.satisfaction, weights), -1.0);
}

Var task_loss(const model::ForwardResult& f, const corpus::Batch& batch, bool use_aux) {
  Var loss = use_loss(f, batch);
  if (!use_aux) return loss;
  if (f.sa_probs.size() != batch.max_utterances) {
    throw ContractError("task_loss: SA output missing for an auxiliary-task model");
  }
  Var sa_ll;
  for (std::size_t t = 0; t < f.sa_probs.size(); ++t) {
    const StepTargets s = sentiment_targets(batch, t);
    Var ll = num::log_likelihood(f.sa_probs[t], s.target, s.weight);
    sa_ll = sa_ll.valid() ? num::add(sa_ll, ll) : ll;
  }
  return num::sub(loss, sa_ll);
}

Var adv_objective(const model::ForwardResult& f, const corpus::Batch& batch) {
  if (f.td_use.size() != batch.max_utterances || f.td_sa.size() != batch.max_utterances) {
    throw ContractError("adv_objective: forward result has no discriminator output");
  }
  const double inv_b = 1.0 / static_cast<double>(batch.size);
  Var total;
  for (std::size_t t = 0; t < batch.max_utterances; ++t) {
    std::vector<std::int64_t> use_target(batch.size, -1), sa_target(batch.size, -1);
    std::vector<double> weight(batch.size, 0.0);
    for (std::size_t b = 0; b < batch.size; ++b) {
      if (batch.utterance_valid[batch.slot(b, t)] == 0) continue;
      use_target[b] = model::kTaskUse;
      sa_target[b] = model::kTaskSa;
      weight[b] = inv_b / (2.0 * static_cast<double>(batch.lengths[b]));
    }
    Var step = num::add(num::log_likelihood(f.td_use[t], use_target, weight),
                        num::log_likelihood(f.td_sa[t], sa_target, weight));
    total = total.valid() ? num::add(total, step) : step;
  }
  return total;
}

double discriminator_accuracy(const model::ForwardResult& f, const corpus::Batch& batch) {
  std::size_t correct = 0, total = 0;
  for (std::size_t t = 0; t < batch.max_utterances; ++t) {
    for (std::size_t b = 0; b < batch.size; ++b) {
      if (batch.utterance_valid[batch.slot(b, t)] == 0) continue;
      correct += model::argmax(f.td_use[t].value().row(b)) == static_cast<std::size_t>(model::kTaskUse);
      correct += model::argmax(f.td_sa[t].value().row(b)) == static_cast<std::size_t>(model::kTaskSa);
      total += 2;
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
}

}  // namespace stman::train

#include "stman/training/evaluate.hpp"

#include "stman/corpus/batch.hpp"
#include "stman/errors.hpp"
#include "stman/training/losses.hpp"

namespace stman::train {

namespace {

template <std::size_t N>
std::vector<std::string> label_names(const std::array<std::string_view, N>& names) {
  return {names.begin(), names.end()};
}

}  // namespace

Evaluation evaluate(const model::StmanModel& model, const corpus::Vocabulary& vocab,
                    std::span<const corpus::Dialogue> dialogues, std::size_t batch_size) {
  if (dialogues.empty()) throw ContractError("evaluate: no dialogues");
  const bool with_sa = model.sa_head() != nullptr;

  std::vector<std::size_t> use_pred, use_true, sa_pred, sa_true;
  double loss_sum = 0.0;
  for (const corpus::Batch& batch : corpus::batchify(dialogues, vocab, batch_size)) {
    num::Tape tape;
    const model::ForwardResult f = model.forward(tape, batch, model::Pass::Task);
    loss_sum += task_loss(f, batch, with_sa).scalar() * static_cast<double>(batch.size);

    const num::Matrix& use = f.use.probs.value();
    for (std::size_t b = 0; b < batch.size; ++b) {
      use_pred.push_back(model::argmax(use.row(b)));
      use_true.push_back(static_cast<std::size_t>(batch.satisfaction[b]));
      if (!with_sa) continue;
      for (std::size_t t = 0; t < batch.lengths[b]; ++t) {
        sa_pred.push_back(model::argmax(f.sa_probs[t].value().row(b)));
        sa_true.push_back(static_cast<std::size_t>(batch.sentiment[batch.slot(b, t)]));
      }
    }
  }

  Evaluation e;
  e.use = eval::compute_metrics(use_pred, use_true, label_names(corpus::kSatisfactionNames));
  if (with_sa) {
    e.sa = eval::compute_metrics(sa_pred, sa_true, label_names(corpus::kSentimentNames));
  } else {
    e.sa.classes = label_names(corpus::kSentimentNames);
  }
  e.task_loss = loss_sum / static_cast<double>(dialogues.size());
  return e;
}

}  // namespace stman::train

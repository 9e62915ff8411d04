#include "stman/training/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include "stman/errors.hpp"
#include "stman/training/evaluate.hpp"
#include "stman/training/losses.hpp"

namespace stman::train {

using num::ParamGroup;

ParamRoles param_roles(model::StmanModel& m) {
  ParamRoles r;
  auto& store = m.params();
  r.encoder = store.in_groups({ParamGroup::Encoder});
  if (m.config().use_td) {
    r.adversary = m.config().adv_target == AdvTarget::DenseLayers
                      ? store.in_groups({ParamGroup::Discriminator, ParamGroup::DenseUse,
                                         ParamGroup::DenseSa})
                      : store.in_groups({ParamGroup::Discriminator, ParamGroup::UseHead,
                                         ParamGroup::SaHead});
  }
  for (num::Parameter* p : store.all()) {
    if (p->group != ParamGroup::Discriminator) r.task.push_back(p);
  }
  return r;
}

Trainer::Trainer(model::StmanModel& m)
    : model_(m),
      roles_(param_roles(m)),
      task_opt_(m.config().momentum_mu),
      min_opt_(m.config().momentum_mu),
      max_opt_(m.config().momentum_mu) {}

double Trainer::task_step(const corpus::Batch& batch, double lr, Rng* dropout) {
  model_.params().zero_grad();
  num::Tape tape;
  const auto f = model_.forward(tape, batch, model::Pass::Task, dropout);
  const Var loss = task_loss(f, batch, model_.config().use_aux);
  tape.backward(loss);
  task_opt_.step(roles_.task, lr, Direction::Descend);
  return loss.scalar();
}

double Trainer::adv_min_step(const corpus::Batch& batch, double lr, Rng* dropout) {
  model_.params().zero_grad();
  num::Tape tape;
  const auto f = model_.forward(tape, batch, model::Pass::Adversarial, dropout);
  const Var obj = adv_objective(f, batch);
  tape.backward(obj);
  min_opt_.step(roles_.encoder, lr, Direction::Descend);
  return obj.scalar();
}

double Trainer::adv_max_step(const corpus::Batch& batch, double lr, Rng* dropout,
                             double* td_accuracy) {
  model_.params().zero_grad();
  num::Tape tape;
  const auto f = model_.forward(tape, batch, model::Pass::Adversarial, dropout);
  const Var obj = adv_objective(f, batch);
  if (td_accuracy != nullptr) *td_accuracy = discriminator_accuracy(f, batch);
  tape.backward(obj);
  max_opt_.step(roles_.adversary, lr, Direction::Ascend);
  return obj.scalar();
}

bool Trainer::adversarial_phase_runs(std::size_t epoch) const {
  if (!model_.config().use_td) return false;
  return model_.config().adv_schedule == AdvSchedule::EveryEpoch || epoch == 0;
}

EpochStats Trainer::train_epoch(std::span<const corpus::Batch> adv_batches,
                                std::span<const corpus::Batch> task_batches, std::size_t epoch,
                                Rng* dropout) {
  const ModelConfig& c = model_.config();
  EpochStats s;
  s.epoch = epoch;
  s.lr = learning_rate(c.lr, c.lr_decay, epoch);

  if (adversarial_phase_runs(epoch) && !adv_batches.empty()) {
    double obj_sum = 0.0, acc_sum = 0.0;
    for (const corpus::Batch& b : adv_batches) {
      adv_min_step(b, s.lr, dropout);
      double acc = 0.0;
      obj_sum += adv_max_step(b, s.lr, dropout, &acc);
      acc_sum += acc;
    }
    const auto n = static_cast<double>(adv_batches.size());
    s.adv_objective = obj_sum / n;
    s.td_accuracy = acc_sum / n;
  }

  double loss_sum = 0.0;
  for (const corpus::Batch& b : task_batches) loss_sum += task_step(b, s.lr, dropout);
  if (!task_batches.empty()) s.task_loss = loss_sum / static_cast<double>(task_batches.size());
  return s;
}

namespace {

std::vector<corpus::Batch> shuffled_batches(const std::vector<corpus::EncodedDialogue>& data,
                                            std::size_t batch_size, Rng& rng) {
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng.engine());
  std::vector<corpus::EncodedDialogue> shuffled;
  shuffled.reserve(data.size());
  for (std::size_t i : order) shuffled.push_back(data[i]);
  return corpus::batchify(shuffled, batch_size);
}

}  // namespace

TrainedModel train_model(const ModelConfig& config, const corpus::CorpusSplit& split,
                         const TrainOptions& options) {
  config.validate();
  if (split.train.empty()) throw ContractError("train_model: empty training split");

  TrainedModel out;
  out.vocab = corpus::Vocabulary::build(split.train, config.min_count);
  out.model = std::make_unique<model::StmanModel>(config, out.vocab.size());
  out.model->init(config.seed);

  std::vector<corpus::EncodedDialogue> train_data, adv_data;
  for (const auto& d : split.train) train_data.push_back(corpus::encode(d, out.vocab));
  if (config.use_td && config.td_fraction > 0.0) {
    for (const auto& d : corpus::sample_fraction(split.train, config.td_fraction, config.seed)) {
      adv_data.push_back(corpus::encode(d, out.vocab));
    }
  }

  Rng shuffle_rng(config.seed, "shuffle");
  Rng dropout_rng(config.seed, "dropout");
  Trainer trainer(*out.model);

  std::optional<num::ParamStore> best;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::vector<corpus::Batch> adv_batches;
    if (trainer.adversarial_phase_runs(epoch) && !adv_data.empty()) {
      adv_batches = shuffled_batches(adv_data, config.batch, shuffle_rng);
    }
    const auto task_batches = shuffled_batches(train_data, config.batch, shuffle_rng);
    EpochStats s = trainer.train_epoch(adv_batches, task_batches, epoch, &dropout_rng);

    if (!split.dev.empty()) {
      const Evaluation dev = evaluate(*out.model, out.vocab, split.dev, config.batch);
      s.dev_use_accuracy = dev.use.accuracy;
      s.dev_use_f1 = dev.use.macro_f1;
      if (dev.sa.count > 0) {
        s.dev_sa_accuracy = dev.sa.accuracy;
        s.dev_sa_f1 = dev.sa.macro_f1;
      }
      if (std::isnan(out.log.best_dev_f1) || s.dev_use_f1 > out.log.best_dev_f1) {
        out.log.best_epoch = epoch;
        out.log.best_dev_f1 = s.dev_use_f1;
        if (options.select_best) best = out.model->params();
      }
    } else {
      out.log.best_epoch = epoch;
    }
    out.log.epochs.push_back(s);
    if (options.on_epoch) options.on_epoch(s);
  }
  if (best) out.model->params().copy_values_from(*best);
  return out;
}

}  // namespace stman::train

#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <vector>

#include "stman/corpus/batch.hpp"
#include "stman/corpus/split.hpp"
#include "stman/corpus/vocab.hpp"
#include "stman/model/stman.hpp"
#include "stman/training/optimizer.hpp"

namespace stman::train {

struct EpochStats {
  std::size_t epoch = 0;
  double lr = 0.0;
  double task_loss = 0.0;  // mean over task batches, measured before each update
  double adv_objective = std::numeric_limits<double>::quiet_NaN();  // NaN: no adversarial phase
  double td_accuracy = std::numeric_limits<double>::quiet_NaN();
  double dev_use_accuracy = std::numeric_limits<double>::quiet_NaN();
  double dev_use_f1 = std::numeric_limits<double>::quiet_NaN();
  double dev_sa_accuracy = std::numeric_limits<double>::quiet_NaN();
  double dev_sa_f1 = std::numeric_limits<double>::quiet_NaN();
};

/// Parameter partition for the alternating schedule.
struct ParamRoles {
  std::vector<num::Parameter*> encoder;    // minimization half of the adversarial phase
  std::vector<num::Parameter*> adversary;  // maximization half: discriminator + contested layers
  std::vector<num::Parameter*> task;       // task phase: everything but the discriminator
};

ParamRoles param_roles(model::StmanModel& m);

/// Owns the optimizer state of one training run. Each update role keeps
/// its own momentum buffers.
class Trainer {
 public:
  explicit Trainer(model::StmanModel& m);

  /// One descent step on the task loss; returns the loss before the update.
  double task_step(const corpus::Batch& batch, double lr, Rng* dropout = nullptr);
  /// One descent step of the adversarial objective on the encoder only.
  double adv_min_step(const corpus::Batch& batch, double lr, Rng* dropout = nullptr);
  /// One ascent step of the adversarial objective on the discriminator and
  /// the contested layers. Also reports discriminator accuracy before the step.
  double adv_max_step(const corpus::Batch& batch, double lr, Rng* dropout = nullptr,
                      double* td_accuracy = nullptr);

  /// Adversarial phase over `adv_batches` (when enabled for this epoch),
  /// then the task phase over `task_batches`.
  EpochStats train_epoch(std::span<const corpus::Batch> adv_batches,
                         std::span<const corpus::Batch> task_batches, std::size_t epoch,
                         Rng* dropout = nullptr);

  bool adversarial_phase_runs(std::size_t epoch) const;
  const ParamRoles& roles() const { return roles_; }

 private:
  model::StmanModel& model_;
  ParamRoles roles_;
  MomentumOptimizer task_opt_;
  MomentumOptimizer min_opt_;
  MomentumOptimizer max_opt_;
};

struct TrainOptions {
  /// Called after each epoch, once dev metrics are filled in.
  std::function<void(const EpochStats&)> on_epoch;
  /// Restore the parameters of the best dev epoch at the end.
  bool select_best = true;
};

struct TrainLog {
  std::vector<EpochStats> epochs;
  std::size_t best_epoch = 0;
  double best_dev_f1 = std::numeric_limits<double>::quiet_NaN();
};

struct TrainedModel {
  std::unique_ptr<model::StmanModel> model;
  corpus::Vocabulary vocab;
  TrainLog log;
};

/// Full run: vocabulary from the training split, parameter init, per-epoch
/// shuffling, learning-rate decay, dev evaluation and best-epoch selection
/// by dev USE macro F1. Every random draw derives from config.seed.
TrainedModel train_model(const ModelConfig& config, const corpus::CorpusSplit& split,
                         const TrainOptions& options = {});

}  // namespace stman::train

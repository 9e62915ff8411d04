#include "stman/model/interaction.hpp"

#include "stman/errors.hpp"

namespace stman::model {

using num::ParamGroup;

GruWeights register_gru(ParamStore& store, const std::string& prefix, ParamGroup group,
                        std::size_t input, std::size_t hidden, bool shared_links) {
  GruWeights w;
  w.wr = &store.add(prefix + ".Wr", group, input, hidden);
  w.wz = &store.add(prefix + ".Wz", group, input, hidden);
  w.wh = &store.add(prefix + ".Wh", group, input, hidden);
  w.ur = &store.add(prefix + ".Ur", group, hidden, hidden);
  w.uz = &store.add(prefix + ".Uz", group, hidden, hidden);
  w.uh = &store.add(prefix + ".Uh", group, hidden, hidden);
  if (shared_links) {
    w.usr = &store.add(prefix + ".Usr", group, hidden, hidden);
    w.usz = &store.add(prefix + ".Usz", group, hidden, hidden);
    w.ush = &store.add(prefix + ".Ush", group, hidden, hidden);
  }
  return w;
}

namespace {

Var gru_update(Var h_prev, Var z, Var candidate) {
  return num::add(num::hadamard(num::one_minus(z), h_prev), num::hadamard(z, candidate));
}

}  // namespace

Var gru_step(Tape& tape, const GruWeights& w, Var h_prev, Var x) {
  Var r = num::sigmoid(num::add(num::matmul(x, tape.param(*w.wr)),
                                num::matmul(h_prev, tape.param(*w.ur))));
  Var z = num::sigmoid(num::add(num::matmul(x, tape.param(*w.wz)),
                                num::matmul(h_prev, tape.param(*w.uz))));
  Var cand = num::tanh(num::add(num::matmul(x, tape.param(*w.wh)),
                                num::matmul(num::hadamard(h_prev, r), tape.param(*w.uh))));
  return gru_update(h_prev, z, cand);
}

Var gru_task_step(Tape& tape, const GruWeights& w, Var h_prev, Var h_shared, Var x) {
  if (!w.has_shared_links()) throw ContractError("gru_task_step: weights lack shared links");
  auto gate = [&](Parameter* wx, Parameter* uh, Parameter* us, Var hidden_in) {
    return num::add(num::add(num::matmul(x, tape.param(*wx)), num::matmul(hidden_in, tape.param(*uh))),
                    num::matmul(h_shared, tape.param(*us)));
  };
  Var r = num::sigmoid(gate(w.wr, w.ur, w.usr, h_prev));
  Var z = num::sigmoid(gate(w.wz, w.uz, w.usz, h_prev));
  Var cand = num::tanh(gate(w.wh, w.uh, w.ush, num::hadamard(h_prev, r)));
  return gru_update(h_prev, z, cand);
}

StepLayout StepLayout::single(std::span<const std::uint8_t> turn_flags) {
  StepLayout l;
  l.batch = 1;
  l.steps = turn_flags.size();
  for (std::size_t t = 0; t < l.steps; ++t) {
    l.row.push_back({static_cast<std::int64_t>(t)});
    l.valid.push_back({1});
    l.turn_flag.push_back({static_cast<std::int64_t>(turn_flags[t])});
  }
  return l;
}

Interaction::Interaction(ParamStore& store, const ModelConfig& config, std::size_t input_dim)
    : hidden_(config.K),
      turn_dim_(config.use_st ? config.Z : 0),
      dense_use_w_(&store.add("dense_use.W", ParamGroup::DenseUse, input_dim, config.K)),
      dense_use_b_(&store.add("dense_use.b", ParamGroup::DenseUse, 1, config.K)) {
  const std::size_t k = config.K;
  if (config.use_aux) {
    dense_sa_w_ = &store.add("dense_sa.W", ParamGroup::DenseSa, input_dim, k);
    dense_sa_b_ = &store.add("dense_sa.b", ParamGroup::DenseSa, 1, k);
  }
  shared_ = register_gru(store, "gru_shared", ParamGroup::SharedGru, k, k, false);
  use_ = register_gru(store, "gru_use", ParamGroup::UseGru, k + turn_dim_, k, true);
  if (config.use_aux) {
    sa_ = register_gru(store, "gru_sa", ParamGroup::SaGru, k + turn_dim_, k, true);
  }
  if (turn_dim_ > 0) turn_emb_ = &store.add("turn.emb", ParamGroup::TurnEmbedding, 2, turn_dim_);
}

Interaction::Projected Interaction::project(Tape& tape, Var utterances) const {
  if (utterances.cols() != dense_use_w_->value.rows()) {
    throw ShapeError("project: utterance width " + std::to_string(utterances.cols()) +
                     " does not match projection input " + dense_use_w_->value.shape_str());
  }
  Projected p;
  p.x_use = num::tanh(num::add_bias(num::matmul(utterances, tape.param(*dense_use_w_)),
                                    tape.param(*dense_use_b_)));
  if (has_sa_stream()) {
    p.x_sa = num::tanh(num::add_bias(num::matmul(utterances, tape.param(*dense_sa_w_)),
                                     tape.param(*dense_sa_b_)));
  }
  return p;
}

Var Interaction::shared_step(Tape& tape, Var h_prev, Var x) const {
  return gru_step(tape, shared_, h_prev, x);
}

Var Interaction::task_step(Tape& tape, Task task, Var h_prev, Var h_shared, Var x_aug) const {
  if (task == Task::Sa && !has_sa_stream()) throw ContractError("task_step: SA stream disabled");
  return gru_task_step(tape, task == Task::Use ? use_ : sa_, h_prev, h_shared, x_aug);
}

Interaction::Streams Interaction::run(Tape& tape, const Projected& projected,
                                      const StepLayout& layout) const {
  Streams s;
  const Var zeros = tape.constant(num::Matrix(layout.batch, hidden_));
  const Var emb = turn_emb_ != nullptr ? tape.param(*turn_emb_) : Var();

  auto run_stream = [&](Task task, Var features, std::vector<Var>& xs, std::vector<Var>& shared,
                        std::vector<Var>& hs) {
    Var h_shared = zeros;
    Var h = zeros;
    for (std::size_t t = 0; t < layout.steps; ++t) {
      const auto& keep = layout.valid[t];
      Var x = num::gather_rows(features, layout.row[t]);
      h_shared = num::select_rows(keep, shared_step(tape, h_shared, x), h_shared);
      Var x_aug = x;
      if (emb.valid()) {
        const Var parts[] = {x, num::gather_rows(emb, layout.turn_flag[t])};
        x_aug = num::hconcat(parts);
      }
      h = num::select_rows(keep, task_step(tape, task, h, h_shared, x_aug), h);
      xs.push_back(x);
      shared.push_back(h_shared);
      hs.push_back(h);
    }
  };

  run_stream(Task::Use, projected.x_use, s.x_use, s.shared_use, s.h_use);
  if (has_sa_stream() && projected.x_sa.valid()) {
    run_stream(Task::Sa, projected.x_sa, s.x_sa, s.shared_sa, s.h_sa);
  }
  return s;
}

}  // namespace stman::model

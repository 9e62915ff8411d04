#include "stman/training/optimizer.hpp"

#include <cmath>

#include "stman/errors.hpp"

namespace stman::train {

void momentum_step(num::Matrix& theta, num::Matrix& velocity, const num::Matrix& grad, double lr,
                   double mu) {
  if (!theta.same_shape(velocity) || !theta.same_shape(grad)) {
    throw ShapeError("momentum_step: parameter " + theta.shape_str() + ", velocity " +
                     velocity.shape_str() + ", gradient " + grad.shape_str());
  }
  for (std::size_t i = 0; i < theta.size(); ++i) {
    velocity[i] = mu * velocity[i] - lr * grad[i];
    theta[i] += velocity[i];
  }
}

double learning_rate(double lr0, double decay, std::size_t epoch) {
  return lr0 * std::pow(decay, static_cast<double>(epoch));
}

void MomentumOptimizer::step(std::span<num::Parameter* const> params, double lr,
                             Direction direction) {
  const double signed_lr = direction == Direction::Descend ? lr : -lr;
  for (num::Parameter* p : params) {
    auto [it, inserted] = velocity_.try_emplace(p->name, p->value.rows(), p->value.cols());
    momentum_step(p->value, it->second, p->grad, signed_lr, mu_);
  }
}

const num::Matrix* MomentumOptimizer::velocity(const std::string& name) const {
  auto it = velocity_.find(name);
  return it == velocity_.end() ? nullptr : &it->second;
}

}  // namespace stman::train

#pragma once

#include <span>
#include <string>
#include <unordered_map>

#include "stman/numerics/params.hpp"

namespace stman::train {

/// v ← μ·v − lr·g;  θ ← θ + v
void momentum_step(num::Matrix& theta, num::Matrix& velocity, const num::Matrix& grad, double lr,
                   double mu);

/// lr₀ · decay^epoch
double learning_rate(double lr0, double decay, std::size_t epoch);

enum class Direction { Descend, Ascend };

/// Momentum SGD with one zero-initialized velocity buffer per parameter,
/// created on first use.
class MomentumOptimizer {
 public:
  explicit MomentumOptimizer(double mu) : mu_(mu) {}

  /// Updates each parameter from its current gradient. Ascend flips the
  /// gradient sign.
  void step(std::span<num::Parameter* const> params, double lr,
            Direction direction = Direction::Descend);

  const num::Matrix* velocity(const std::string& name) const;
  std::size_t buffer_count() const { return velocity_.size(); }

 private:
  double mu_;
  std::unordered_map<std::string, num::Matrix> velocity_;
};

}  // namespace stman::train

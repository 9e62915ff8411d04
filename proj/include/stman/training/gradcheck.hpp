#pragma once

#include <functional>
#include <string>

#include "stman/corpus/batch.hpp"
#include "stman/corpus/vocab.hpp"
#include "stman/model/config.hpp"
#include "stman/numerics/params.hpp"
#include "stman/numerics/tape.hpp"

namespace stman::train {

struct GradCheckOptions {
  double h = 1e-5;          // central-difference step
  double tolerance = 1e-4;  // max relative error
  double floor = 1e-6;      // denominator floor; see relative_error
};

struct GradCheckReport {
  std::size_t checked = 0;
  std::size_t failed = 0;
  double max_rel_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;

  bool passed() const { return failed == 0; }
};

/// |a − n| / max(|a|, |n|, floor). The floor keeps round-off in the
/// numeric estimate from dominating on near-zero entries.
double relative_error(double analytic, double numeric, double floor);

/// Compares reverse-mode gradients of `objective` against central finite
/// differences for every entry of every parameter in `params`. Parameter
/// values are restored afterwards; gradients hold the analytic values.
GradCheckReport check_gradients(num::ParamStore& params,
                                const std::function<num::Var(num::Tape&)>& objective,
                                const GradCheckOptions& options = {});

/// Two three-utterance dialogues of three tokens each, with mixed speaker
/// patterns, and a config with D=5, E=4, K=4, Z=3, H=3 and every flag on.
struct GradCheckToy {
  ModelConfig config;
  corpus::Vocabulary vocab;
  corpus::Batch batch;
};

GradCheckToy make_grad_check_toy();

}  // namespace stman::train

#include "stman/training/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace stman::train {

double relative_error(double analytic, double numeric, double floor) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

GradCheckReport check_gradients(num::ParamStore& params,
                                const std::function<num::Var(num::Tape&)>& objective,
                                const GradCheckOptions& options) {
  params.zero_grad();
  {
    num::Tape tape;
    tape.backward(objective(tape));
  }
  auto evaluate = [&] {
    num::Tape tape;
    return objective(tape).scalar();
  };

  GradCheckReport r;
  for (num::Parameter* p : params.all()) {
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      const double original = p->value[i];
      p->value[i] = original + options.h;
      const double up = evaluate();
      p->value[i] = original - options.h;
      const double down = evaluate();
      p->value[i] = original;

      const double numeric = (up - down) / (2.0 * options.h);
      const double err = relative_error(p->grad[i], numeric, options.floor);
      ++r.checked;
      if (err > options.tolerance) ++r.failed;
      if (err > r.max_rel_error || r.worst_param.empty()) {
        r.max_rel_error = err;
        r.worst_param = p->name;
        r.worst_index = i;
        r.worst_analytic = p->grad[i];
        r.worst_numeric = numeric;
      }
    }
  }
  return r;
}

GradCheckToy make_grad_check_toy() {
  using corpus::Role;
  using corpus::Sentiment;
  GradCheckToy toy;
  toy.config.D = 5;
  toy.config.E = 4;
  toy.config.K = 4;
  toy.config.Z = 3;
  toy.config.H = 3;
  toy.config.dropout = 0.0;

  auto utt = [](std::vector<std::string> tokens, Role r, Sentiment s) {
    return corpus::Utterance{std::move(tokens), r, s};
  };
  const std::vector<corpus::Dialogue> dialogues = {
      {"toy-a",
       {utt({"where", "is", "parcel"}, Role::User, Sentiment::Negative),
        utt({"checking", "it", "now"}, Role::Staff, Sentiment::Neutral),
        utt({"thanks", "great", "help"}, Role::User, Sentiment::Positive)},
       corpus::Satisfaction::WellSatisfied},
      {"toy-b",
       {utt({"hello", "how", "help"}, Role::Staff, Sentiment::Neutral),
        utt({"parcel", "is", "late"}, Role::User, Sentiment::Negative),
        utt({"still", "late", "parcel"}, Role::User, Sentiment::Negative)},
       corpus::Satisfaction::Unsatisfied},
  };
  toy.vocab = corpus::Vocabulary::build(dialogues, 1);
  std::vector<corpus::EncodedDialogue> encoded;
  for (const auto& d : dialogues) encoded.push_back(corpus::encode(d, toy.vocab));
  toy.batch = corpus::make_batch(encoded);
  return toy;
}

}  // namespace stman::train

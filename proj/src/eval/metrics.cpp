#include "stman/eval/metrics.hpp"

#include "stman/errors.hpp"

namespace stman::eval {

namespace {

void check_inputs(std::span<const std::size_t> preds, std::span<const std::size_t> truths) {
  if (preds.empty()) throw ContractError("metrics: no predictions");
  if (preds.size() != truths.size()) {
    throw ContractError("metrics: " + std::to_string(preds.size()) + " predictions for " +
                        std::to_string(truths.size()) + " truths");
  }
}

std::vector<std::vector<std::size_t>> confusion_matrix(std::span<const std::size_t> preds,
                                                       std::span<const std::size_t> truths,
                                                       std::size_t n) {
  std::vector<std::vector<std::size_t>> c(n, std::vector<std::size_t>(n, 0));
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i] >= n || truths[i] >= n) throw ContractError("metrics: label out of range");
    ++c[truths[i]][preds[i]];
  }
  return c;
}

std::vector<ClassScores> class_scores(const std::vector<std::vector<std::size_t>>& c) {
  const std::size_t n = c.size();
  std::vector<ClassScores> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t j = 0; j < n; ++j) {
      out[k].support += c[k][j];
      out[k].predicted += c[j][k];
    }
    const double tp = static_cast<double>(c[k][k]);
    out[k].precision = out[k].predicted == 0 ? 0.0 : tp / static_cast<double>(out[k].predicted);
    out[k].recall = out[k].support == 0 ? 0.0 : tp / static_cast<double>(out[k].support);
    const double denom = out[k].precision + out[k].recall;
    out[k].f1 = denom == 0.0 ? 0.0 : 2.0 * out[k].precision * out[k].recall / denom;
  }
  return out;
}

double mean_f1(const std::vector<ClassScores>& scores) {
  double s = 0.0;
  for (const auto& c : scores) s += c.f1;
  return s / static_cast<double>(scores.size());
}

}  // namespace

double accuracy(std::span<const std::size_t> preds, std::span<const std::size_t> truths) {
  check_inputs(preds, truths);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) hits += preds[i] == truths[i];
  return static_cast<double>(hits) / static_cast<double>(preds.size());
}

double macro_f1(std::span<const std::size_t> preds, std::span<const std::size_t> truths,
                std::size_t n_classes) {
  check_inputs(preds, truths);
  if (n_classes == 0) throw ContractError("macro_f1: no classes");
  return mean_f1(class_scores(confusion_matrix(preds, truths, n_classes)));
}

MetricsReport compute_metrics(std::span<const std::size_t> preds,
                              std::span<const std::size_t> truths,
                              const std::vector<std::string>& classes) {
  check_inputs(preds, truths);
  MetricsReport r;
  r.classes = classes;
  r.count = preds.size();
  r.confusion = confusion_matrix(preds, truths, classes.size());
  r.per_class = class_scores(r.confusion);
  r.macro_f1 = mean_f1(r.per_class);
  r.accuracy = accuracy(preds, truths);
  return r;
}

nlohmann::ordered_json to_json(const MetricsReport& r) {
  nlohmann::ordered_json j;
  j["classes"] = r.classes;
  j["count"] = r.count;
  j["accuracy"] = r.accuracy;
  j["macro_f1"] = r.macro_f1;
  auto per = nlohmann::ordered_json::array();
  for (std::size_t k = 0; k < r.per_class.size(); ++k) {
    const auto& c = r.per_class[k];
    per.push_back({{"class", k < r.classes.size() ? r.classes[k] : std::to_string(k)},
                   {"precision", c.precision},
                   {"recall", c.recall},
                   {"f1", c.f1},
                   {"support", c.support},
                   {"predicted", c.predicted}});
  }
  j["per_class"] = std::move(per);
  j["confusion"] = r.confusion;
  j["loss_curve"] = r.loss_curve;
  return j;
}

MetricsReport metrics_from_json(const nlohmann::ordered_json& j) {
  try {
    MetricsReport r;
    r.classes = j.at("classes").get<std::vector<std::string>>();
    r.count = j.at("count").get<std::size_t>();
    r.accuracy = j.at("accuracy").get<double>();
    r.macro_f1 = j.at("macro_f1").get<double>();
    for (const auto& c : j.at("per_class")) {
      r.per_class.push_back({c.at("precision").get<double>(), c.at("recall").get<double>(),
                             c.at("f1").get<double>(), c.at("support").get<std::size_t>(),
                             c.at("predicted").get<std::size_t>()});
    }
    r.confusion = j.at("confusion").get<std::vector<std::vector<std::size_t>>>();
    r.loss_curve = j.at("loss_curve").get<std::vector<double>>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("metrics report: ") + e.what());
  }
}

}  // namespace stman::eval

#pragma once

#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace stman::eval {

struct ClassScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;    // true instances
  std::size_t predicted = 0;  // predicted instances

  friend bool operator==(const ClassScores&, const ClassScores&) = default;
};

struct MetricsReport {
  std::vector<std::string> classes;
  std::size_t count = 0;
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  std::vector<ClassScores> per_class;
  std::vector<std::vector<std::size_t>> confusion;  // [truth][prediction]
  std::vector<double> loss_curve;

  friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

/// matches / total. Throws ContractError on empty or mismatched input.
double accuracy(std::span<const std::size_t> preds, std::span<const std::size_t> truths);

/// Unweighted mean over `n_classes` of F1 = 2PR/(P+R). Zero denominators
/// give 0, so a class absent from both predictions and truths scores 0.
double macro_f1(std::span<const std::size_t> preds, std::span<const std::size_t> truths,
                std::size_t n_classes);

MetricsReport compute_metrics(std::span<const std::size_t> preds,
                              std::span<const std::size_t> truths,
                              const std::vector<std::string>& classes);

nlohmann::ordered_json to_json(const MetricsReport& r);
/// Throws ParseError on missing or mistyped fields.
MetricsReport metrics_from_json(const nlohmann::ordered_json& j);

}  // namespace stman::eval

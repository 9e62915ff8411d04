#include "stman/eval/experiments.hpp"

#include <algorithm>
#include <cstdio>

#include "stman/errors.hpp"
#include "stman/training/evaluate.hpp"
#include "stman/training/trainer.hpp"

namespace stman::eval {

namespace {

CellScores train_and_score(const ModelConfig& config, const corpus::CorpusSplit& split) {
  if (split.test.empty()) throw ContractError("experiment: empty test split");
  const train::TrainedModel m = train::train_model(config, split);
  const train::Evaluation e = train::evaluate(*m.model, m.vocab, split.test, config.batch);
  CellScores s;
  s.seed = config.seed;
  s.use_accuracy = e.use.accuracy;
  s.use_f1 = e.use.macro_f1;
  if (e.sa.count > 0) {
    s.sa_accuracy = e.sa.accuracy;
    s.sa_f1 = e.sa.macro_f1;
  }
  s.best_epoch = m.log.best_epoch;
  return s;
}

CellScores median_cell(const std::vector<CellScores>& cells) {
  auto field = [&](double CellScores::*f) {
    std::vector<double> v;
    for (const auto& c : cells) v.push_back(c.*f);
    return median(std::move(v));
  };
  CellScores m;
  m.use_accuracy = field(&CellScores::use_accuracy);
  m.use_f1 = field(&CellScores::use_f1);
  m.sa_accuracy = field(&CellScores::sa_accuracy);
  m.sa_f1 = field(&CellScores::sa_f1);
  return m;
}

std::string fraction_label(double f) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", f);
  return buf;
}

nlohmann::ordered_json cell_json(const CellScores& c) {
  return {{"use_accuracy", c.use_accuracy}, {"use_macro_f1", c.use_f1},
          {"sa_accuracy", c.sa_accuracy},   {"sa_macro_f1", c.sa_f1}};
}

}  // namespace

const ExperimentRow* ExperimentReport::find(std::string_view label) const {
  for (const auto& r : rows) {
    if (r.label == label) return &r;
  }
  return nullptr;
}

double median(std::vector<double> values) {
  if (values.empty()) throw ContractError("median of an empty sample");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

ExperimentReport run_ablation(const ModelConfig& base, const corpus::CorpusSplit& split,
                              std::span<const std::string> variants,
                              std::span<const std::uint64_t> seeds, const CellCallback& on_cell) {
  if (seeds.empty()) throw ContractError("ablation: no seeds");
  ExperimentReport r{"ablation", {seeds.begin(), seeds.end()}, {}};
  for (const std::string& v : variants) {
    ExperimentRow row{v, {}, {}};
    for (std::uint64_t seed : seeds) {
      ModelConfig c = with_variant(base, v);
      c.seed = seed;
      row.cells.push_back(train_and_score(c, split));
      if (on_cell) on_cell(v, row.cells.back());
    }
    row.median = median_cell(row.cells);
    r.rows.push_back(std::move(row));
  }
  return r;
}

ExperimentReport run_fraction_sweep(const ModelConfig& base, const corpus::CorpusSplit& split,
                                    std::span<const double> fractions,
                                    std::span<const std::uint64_t> seeds,
                                    const CellCallback& on_cell) {
  if (seeds.empty()) throw ContractError("fraction sweep: no seeds");
  ExperimentReport r{"fraction_sweep", {seeds.begin(), seeds.end()}, {}};
  for (double f : fractions) {
    if (!(f >= 0.0 && f <= 1.0)) {
      throw ContractError("fraction sweep: fraction " + fraction_label(f) + " outside [0, 1]");
    }
    ExperimentRow row{fraction_label(f), {}, {}};
    for (std::uint64_t seed : seeds) {
      ModelConfig c = base;
      c.td_fraction = f;
      c.seed = seed;
      row.cells.push_back(train_and_score(c, split));
      if (on_cell) on_cell(row.label, row.cells.back());
    }
    row.median = median_cell(row.cells);
    r.rows.push_back(std::move(row));
  }
  return r;
}

nlohmann::ordered_json to_json(const ExperimentReport& r) {
  nlohmann::ordered_json j;
  j["kind"] = r.kind;
  j["seeds"] = r.seeds;
  auto rows = nlohmann::ordered_json::array();
  for (const auto& row : r.rows) {
    auto cells = nlohmann::ordered_json::array();
    for (const auto& c : row.cells) {
      auto cj = cell_json(c);
      cj["seed"] = c.seed;
      cj["best_epoch"] = c.best_epoch;
      cells.push_back(std::move(cj));
    }
    rows.push_back({{"label", row.label}, {"median", cell_json(row.median)}, {"cells", cells}});
  }
  j["rows"] = std::move(rows);
  return j;
}

std::string format_report(const ExperimentReport& r) {
  std::string out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-14s %10s %10s %10s %10s\n",
                r.kind == "ablation" ? "variant" : "fraction", "USE F1", "USE Acc", "SA F1",
                "SA Acc");
  out += buf;
  for (const auto& row : r.rows) {
    const CellScores& m = row.median;
    std::snprintf(buf, sizeof buf, "%-14s %10.4f %10.4f %10.4f %10.4f\n", row.label.c_str(),
                  m.use_f1, m.use_accuracy, m.sa_f1, m.sa_accuracy);
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "medians over %zu seed(s), scored on the test split\n",
                r.seeds.size());
  out += buf;
  return out;
}

}  // namespace stman::eval

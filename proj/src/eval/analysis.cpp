#include "stman/eval/analysis.hpp"

#include <cstdio>

#include "stman/errors.hpp"

namespace stman::eval {

namespace {

const corpus::Utterance* anchored(const corpus::Dialogue& d, Anchor a) {
  return a == Anchor::Initial ? corpus::first_user_utterance(d) : corpus::last_user_utterance(d);
}

std::vector<std::string> names(std::span<const std::string_view> src) {
  return {src.begin(), src.end()};
}

}  // namespace

std::string_view to_string(Anchor a) { return a == Anchor::Initial ? "initial" : "final"; }

BaselineResult heuristic_baseline(std::span<const corpus::Dialogue> dialogues, Anchor anchor) {
  BaselineResult r;
  std::vector<std::size_t> preds, truths;
  for (const auto& d : dialogues) {
    const corpus::Utterance* u = anchored(d, anchor);
    if (u == nullptr) {
      ++r.skipped;
      continue;
    }
    preds.push_back(static_cast<std::size_t>(corpus::canonical_satisfaction(u->sentiment)));
    truths.push_back(static_cast<std::size_t>(d.satisfaction));
  }
  if (preds.empty()) {
    throw ContractError("heuristic baseline: no dialogue has a user utterance (" +
                        std::to_string(r.skipped) + " skipped)");
  }
  r.report = compute_metrics(preds, truths, names(corpus::kSatisfactionNames));
  return r;
}

CombinationTable combination_table(std::span<const corpus::Dialogue> dialogues, Anchor anchor) {
  CombinationTable t;
  t.anchor = anchor;
  std::array<std::array<std::size_t, corpus::kNumSentiments>, corpus::kNumSatisfaction> counts{};
  for (const auto& d : dialogues) {
    const corpus::Utterance* u = anchored(d, anchor);
    if (u == nullptr) {
      ++t.skipped;
      continue;
    }
    ++counts[static_cast<std::size_t>(d.satisfaction)][static_cast<std::size_t>(u->sentiment)];
    ++t.count;
  }
  if (t.count == 0) throw ContractError("combination table: no dialogue has a user utterance");
  for (std::size_t i = 0; i < corpus::kNumSatisfaction; ++i) {
    for (std::size_t j = 0; j < corpus::kNumSentiments; ++j) {
      t.proportion[i][j] = static_cast<double>(counts[i][j]) / static_cast<double>(t.count);
    }
  }
  return t;
}

nlohmann::ordered_json to_json(const CombinationTable& t) {
  nlohmann::ordered_json j;
  j["anchor"] = to_string(t.anchor);
  j["count"] = t.count;
  j["skipped"] = t.skipped;
  j["rows"] = names(corpus::kSatisfactionNames);
  j["cols"] = names(corpus::kSentimentNames);
  j["proportion"] = t.proportion;
  return j;
}

std::string format_table(const CombinationTable& t) {
  std::string out;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%-16s", (std::string(to_string(t.anchor)) + " user").c_str());
  out += buf;
  for (auto s : corpus::kSentimentNames) {
    std::snprintf(buf, sizeof buf, "%10s", std::string(s).c_str());
    out += buf;
  }
  out += '\n';
  for (std::size_t i = 0; i < corpus::kNumSatisfaction; ++i) {
    std::snprintf(buf, sizeof buf, "%-16s", std::string(corpus::kSatisfactionNames[i]).c_str());
    out += buf;
    for (double p : t.proportion[i]) {
      std::snprintf(buf, sizeof buf, "%10.4f", p);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

}  // namespace stman::eval

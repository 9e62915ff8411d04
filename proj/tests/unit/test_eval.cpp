#include <doctest.h>

#include <cmath>

#include "../support/oracles.hpp"
#include "stman/corpus/split.hpp"
#include "stman/corpus/synthetic.hpp"
#include "stman/errors.hpp"
#include "stman/eval/analysis.hpp"
#include "stman/eval/experiments.hpp"
#include "stman/eval/metrics.hpp"
#include "stman/rng.hpp"

using namespace stman;
using namespace stman::eval;
using Labels = std::vector<std::size_t>;

namespace {

const std::vector<std::string> kClasses{"a", "b", "c"};

corpus::Dialogue tiny(corpus::Sentiment first, corpus::Sentiment last, corpus::Satisfaction sat) {
  corpus::Dialogue d;
  d.id = "t";
  d.satisfaction = sat;
  d.utterances = {{{"x"}, corpus::Role::User, first},
                  {{"y"}, corpus::Role::Staff, corpus::Sentiment::Neutral},
                  {{"z"}, corpus::Role::User, last}};
  return d;
}

}  // namespace

TEST_SUITE("metrics") {
  TEST_CASE("worked examples") {
    const Labels truths{0, 0, 1, 2}, preds{0, 1, 1, 2};
    CHECK(accuracy(truths, truths) == 1.0);
    CHECK(accuracy(preds, truths) == 0.75);
    CHECK(std::abs(macro_f1(preds, truths, 3) - 7.0 / 9.0) < 1e-15);
    CHECK(macro_f1(truths, truths, 3) == 1.0);
    const Labels uniform{0, 1, 2, 0, 1, 2}, constant(6, 0);
    CHECK(std::abs(macro_f1(constant, uniform, 3) - 1.0 / 6.0) < 1e-15);
  }

  TEST_CASE("absent classes score zero") {
    const Labels only_zero{0, 0};
    CHECK(macro_f1(only_zero, only_zero, 3) == doctest::Approx(1.0 / 3.0));
  }

  TEST_CASE("contract errors") {
    const Labels empty, one{0}, two{0, 1}, bad{5};
    CHECK_THROWS_AS(accuracy(empty, empty), ContractError);
    CHECK_THROWS_AS(accuracy(one, two), ContractError);
    CHECK_THROWS_AS(macro_f1(empty, empty, 3), ContractError);
    CHECK_THROWS_AS(compute_metrics(bad, one, kClasses), ContractError);
  }

  TEST_CASE("random labels: accuracy near one third") {
    Rng rng(17);
    Labels p(10000), t(10000);
    for (std::size_t i = 0; i < p.size(); ++i) {
      p[i] = rng.below(3);
      t[i] = rng.below(3);
    }
    CHECK(std::abs(accuracy(p, t) - 1.0 / 3.0) < 0.02);
  }

  TEST_CASE("agrees exactly with the brute-force confusion oracle") {
    Rng rng(23);
    for (int trial = 0; trial < 1000; ++trial) {
      const std::size_t n = 1 + rng.below(40);
      Labels p(n), t(n);
      for (std::size_t i = 0; i < n; ++i) {
        p[i] = rng.below(3);
        t[i] = rng.below(3);
      }
      const auto r = compute_metrics(p, t, kClasses);
      CHECK(r.accuracy == oracle::brute_accuracy(p, t));
      CHECK(r.macro_f1 == oracle::brute_macro_f1(p, t, 3));
      CHECK(r.confusion == oracle::brute_confusion(p, t, 3));
      CHECK(accuracy(p, t) == r.accuracy);
      CHECK(macro_f1(p, t, 3) == r.macro_f1);
    }
  }

  TEST_CASE("report invariants and JSON round trip") {
    Rng rng(29);
    Labels p(200), t(200);
    for (std::size_t i = 0; i < p.size(); ++i) {
      p[i] = rng.below(3);
      t[i] = rng.below(3);
    }
    auto r = compute_metrics(p, t, kClasses);
    for (std::size_t k = 0; k < 3; ++k) {
      std::size_t row = 0;
      for (auto c : r.confusion[k]) row += c;
      CHECK(row == r.per_class[k].support);
      for (double v : {r.per_class[k].precision, r.per_class[k].recall, r.per_class[k].f1}) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
      }
    }
    r.loss_curve = {1.1, 0.9, 0.7};
    const auto text = to_json(r).dump();
    CHECK(metrics_from_json(nlohmann::ordered_json::parse(text)) == r);
    CHECK_THROWS_AS(metrics_from_json(nlohmann::ordered_json::parse("{\"accuracy\": 1}")), ParseError);
  }
}

TEST_SUITE("heuristics") {
  TEST_CASE("single dialogue") {
    using S = corpus::Sentiment;
    const std::vector<corpus::Dialogue> ds{tiny(S::Positive, S::Negative, corpus::Satisfaction::Unsatisfied)};
    CHECK(heuristic_baseline(ds, Anchor::Final).report.accuracy == 1.0);
    CHECK(heuristic_baseline(ds, Anchor::Initial).report.accuracy == 0.0);
    const auto table = combination_table(ds, Anchor::Final);
    CHECK(table.proportion[0][0] == 1.0);
    CHECK(table.count == 1);
  }

  TEST_CASE("dialogues without a user utterance are skipped") {
    auto staff_only = tiny(corpus::Sentiment::Neutral, corpus::Sentiment::Neutral, corpus::Satisfaction::Met);
    for (auto& u : staff_only.utterances) u.speaker = corpus::Role::Staff;
    const std::vector<corpus::Dialogue> mixed{staff_only, tiny(corpus::Sentiment::Neutral, corpus::Sentiment::Neutral, corpus::Satisfaction::Met)};
    const auto r = heuristic_baseline(mixed, Anchor::Final);
    CHECK(r.skipped == 1);
    CHECK(r.report.count == 1);
    const std::vector<corpus::Dialogue> none{staff_only};
    CHECK_THROWS_AS(heuristic_baseline(none, Anchor::Final), ContractError);
    CHECK_THROWS_AS(combination_table(none, Anchor::Final), ContractError);
  }

  TEST_CASE("counts match the oracle; final beats initial on final-correlated data") {
    for (double q : {0.5, 0.8, 0.9, 1.0}) {
      const auto ds = corpus::generate_synthetic(800, q, 31);
      const auto fin = heuristic_baseline(ds, Anchor::Final);
      const auto ini = heuristic_baseline(ds, Anchor::Initial);
      const auto of = oracle::count_final_heuristic(ds);
      const auto oi = oracle::count_initial_heuristic(ds);
      CHECK(fin.report.accuracy == static_cast<double>(of.correct) / static_cast<double>(of.total));
      CHECK(ini.report.accuracy == static_cast<double>(oi.correct) / static_cast<double>(oi.total));
      CHECK(fin.report.accuracy >= ini.report.accuracy);
      if (q == 1.0) CHECK(fin.report.accuracy == 1.0);
      if (q == 0.8) {
        CHECK(fin.report.accuracy >= 0.76);
        CHECK(fin.report.accuracy <= 0.84);
      }
    }
  }

  TEST_CASE("combination tables sum to one and match a recount") {
    const auto ds = corpus::generate_synthetic(500, 0.7, 37);
    for (Anchor a : {Anchor::Initial, Anchor::Final}) {
      const auto t = combination_table(ds, a);
      double sum = 0.0;
      std::array<std::array<std::size_t, 3>, 3> counts{};
      for (const auto& d : ds) {
        const auto* u = a == Anchor::Final ? corpus::last_user_utterance(d) : corpus::first_user_utterance(d);
        ++counts[static_cast<std::size_t>(d.satisfaction)][static_cast<std::size_t>(u->sentiment)];
      }
      for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 3; ++j) {
          sum += t.proportion[i][j];
          CHECK(t.proportion[i][j] == static_cast<double>(counts[i][j]) / static_cast<double>(ds.size()));
        }
      }
      CHECK(std::abs(sum - 1.0) < 1e-12);
      CHECK(nlohmann::ordered_json::parse(to_json(t).dump())["count"] == ds.size());
      CHECK_FALSE(format_table(t).empty());
    }
  }
}

TEST_SUITE("experiments") {
  TEST_CASE("median") {
    CHECK(median({3.0}) == 3.0);
    CHECK(median({5.0, 1.0, 3.0}) == 3.0);
    CHECK(median({4.0, 1.0, 3.0, 2.0}) == 2.5);
    CHECK_THROWS_AS(median({}), ContractError);
  }

  TEST_CASE("small ablation and sweep produce complete reports") {
    const auto ds = corpus::generate_synthetic(40, 0.9, 5);
    const auto split = corpus::split_corpus(ds, 5);
    ModelConfig base;
    base.K = 6;
    base.E = 3;
    base.D = 6;
    base.Z = 3;
    base.H = 3;
    base.epochs = 1;
    base.batch = 8;
    const std::vector<std::string> variants{"basic", "stman"};
    const std::vector<std::uint64_t> seeds{1, 2};
    std::size_t cells = 0;
    const auto r = run_ablation(base, split, variants, seeds, [&](const std::string&, const CellScores&) { ++cells; });
    CHECK(cells == 4);
    REQUIRE(r.rows.size() == 2);
    REQUIRE(r.find("stman") != nullptr);
    const auto& row = *r.find("stman");
    CHECK(row.median.use_f1 == median({row.cells[0].use_f1, row.cells[1].use_f1}));
    CHECK(nlohmann::ordered_json::parse(to_json(r).dump())["kind"] == "ablation");

    const std::vector<double> fractions{0.0, 1.0};
    const auto sweep = run_fraction_sweep(with_variant(base, "stman"), split, fractions, seeds);
    CHECK(sweep.find("0") != nullptr);
    CHECK(sweep.find("1") != nullptr);
    const std::vector<double> bad{1.5};
    CHECK_THROWS_AS(run_fraction_sweep(with_variant(base, "stman"), split, bad, seeds), ContractError);
    CHECK_FALSE(format_report(sweep).empty());
  }
}

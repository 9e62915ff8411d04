// Acceptance run: one PASS/FAIL line per criterion, then a summary line.
// Exit status is 0 once every selected criterion has been evaluated; with
// --strict any FAIL makes it 1.

#include <unistd.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "../support/oracles.hpp"
#include "stman/cli/app.hpp"
#include "stman/corpus/batch.hpp"
#include "stman/corpus/split.hpp"
#include "stman/corpus/synthetic.hpp"
#include "stman/eval/analysis.hpp"
#include "stman/eval/experiments.hpp"
#include "stman/eval/metrics.hpp"
#include "stman/model/stman.hpp"
#include "stman/training/evaluate.hpp"
#include "stman/training/gradcheck.hpp"
#include "stman/training/losses.hpp"
#include "stman/training/trainer.hpp"

using namespace stman;
using model::Pass;
using model::StmanModel;
namespace fs = std::filesystem;

namespace {

// Fixed desk-scale corpus shared by the training criteria.
constexpr std::size_t kCorpusSize = 600;
constexpr double kCorpusQ = 0.9;
constexpr std::uint64_t kCorpusSeed = 7;
const std::vector<std::uint64_t> kSeeds{1, 2, 3, 4, 5};

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  std::vector<std::string> notes;  // informational lines printed under the verdict

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

corpus::CorpusSplit desk_split() {
  const auto ds = corpus::generate_synthetic(kCorpusSize, kCorpusQ, kCorpusSeed);
  return corpus::split_corpus(ds, kCorpusSeed);
}

/// Defaults scaled to K=32, E=16 and 10 epochs.
ModelConfig scaled_basic() {
  ModelConfig c = with_variant(ModelConfig{}, "basic");
  c.K = 32;
  c.E = 16;
  c.epochs = 10;
  return c;
}

/// Diagnostic configuration used for the ablation ordering: the scaled
/// defaults with a wider init and a larger step, the smallest change under
/// which the scaled Basic model leaves the majority-class plateau.
ModelConfig desk_tuned(ModelConfig c) {
  c.init_range = 0.3;
  c.lr = 0.3;
  return c;
}

std::string fmt(double v, int digits = 4) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

std::string sci(double v) {
  std::ostringstream s;
  s << std::scientific << std::setprecision(2) << v;
  return s.str();
}

// ---- 1 -----------------------------------------------------------------------

Outcome gradient_integrity() {
  Outcome o;
  const auto toy = train::make_grad_check_toy();
  for (double range : {toy.config.init_range, 0.5}) {
    ModelConfig c = toy.config;
    c.init_range = range;
    StmanModel m(c, toy.vocab.size());
    m.init(1);
    const auto task = train::check_gradients(m.params(), [&](num::Tape& t) {
      return train::task_loss(m.forward(t, toy.batch, Pass::Task), toy.batch, true);
    });
    const auto adv = train::check_gradients(m.params(), [&](num::Tape& t) {
      return train::adv_objective(m.forward(t, toy.batch, Pass::Adversarial), toy.batch);
    });
    o.require(task.passed(), "task loss at init " + fmt(range, 2) + ", worst " + task.worst_param);
    o.require(adv.passed(), "adversarial loss at init " + fmt(range, 2) + ", worst " + adv.worst_param);
    o.detail << " init U(+-" << range << "): " << task.checked << " entries, max rel err task "
             << sci(task.max_rel_error) << " adv " << sci(adv.max_rel_error) << ";";
  }
  return o;
}

// ---- 2 -----------------------------------------------------------------------

Outcome exactness_fixtures() {
  Outcome o;
  using corpus::Role;
  const std::vector<Role> roles{Role::User, Role::Staff, Role::User, Role::Staff, Role::User,
                                Role::Staff, Role::User, Role::User, Role::Staff};
  o.require(corpus::relabel_speaker_turns(roles) == std::vector<std::uint8_t>{0, 1, 0, 1, 0, 1, 0, 0, 1},
            "speaker-turn relabeling");

  const auto toy = train::make_grad_check_toy();
  StmanModel m(toy.config, toy.vocab.size());
  m.init(2);
  {
    num::Tape t;
    const auto f = m.forward(t, toy.batch, Pass::Task);
    bool staff_zero = true, sums_one = true;
    for (std::size_t b = 0; b < toy.batch.size; ++b) {
      double sum = 0.0;
      for (std::size_t s = 0; s < toy.batch.lengths[b]; ++s) {
        const double a = f.use.alpha.value()(b, s);
        if (toy.batch.is_user[toy.batch.slot(b, s)] == 0 && a != 0.0) staff_zero = false;
        sum += a;
      }
      if (std::abs(sum - 1.0) > 1e-12) sums_one = false;
    }
    o.require(staff_zero, "staff attention not exactly 0");
    o.require(sums_one, "user attention does not sum to 1");
  }

  for (auto* p : m.params().all()) p->value.fill(0.0);
  {
    num::Tape t;
    const num::Matrix prev = num::Matrix::from_rows({{0.6, -0.2, 1.0, 0.3}});
    const num::Var x = t.constant(num::Matrix(1, toy.config.K + toy.config.Z, 0.7));
    const num::Var hs = t.constant(num::Matrix(1, toy.config.K, -0.4));
    const num::Matrix h = m.interaction().task_step(t, model::Task::Use, t.constant(prev), hs, x).value();
    bool half = true;
    for (std::size_t i = 0; i < prev.size(); ++i) half = half && h[i] == 0.5 * prev[i];
    o.require(half, "zero-parameter GRU step");

    const auto f = m.forward(t, toy.batch, Pass::Task);
    const double loss = train::use_loss(f, toy.batch).scalar();
    o.require(std::abs(loss - std::log(3.0)) <= 1e-12, "uniform USE loss");
    o.detail << " uniform USE loss " << std::setprecision(15) << loss << ";";
  }

  const double lr0 = train::learning_rate(0.1, 0.8, 0), lr1 = train::learning_rate(0.1, 0.8, 1),
               lr2 = train::learning_rate(0.1, 0.8, 2);
  o.require(lr0 == 0.1 && std::abs(lr1 - 0.08) < 1e-15 && std::abs(lr2 - 0.064) < 1e-15, "lr schedule");
  o.detail << " lr " << lr0 << ", " << lr1 << ", " << lr2;
  return o;
}

// ---- 3 -----------------------------------------------------------------------

Outcome oracle_equivalence() {
  Outcome o;
  // Metrics against brute-force confusion counting.
  Rng rng(3);
  std::size_t mismatches = 0;
  const std::vector<std::string> classes{"a", "b", "c"};
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng.below(50);
    std::vector<std::size_t> p(n), t(n);
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = rng.below(3);
      t[i] = rng.below(3);
    }
    const auto r = eval::compute_metrics(p, t, classes);
    if (r.accuracy != oracle::brute_accuracy(p, t) || r.macro_f1 != oracle::brute_macro_f1(p, t, 3) ||
        r.confusion != oracle::brute_confusion(p, t, 3)) {
      ++mismatches;
    }
  }
  o.require(mismatches == 0, std::to_string(mismatches) + " metric mismatches");
  o.detail << " metrics: 1000 cases, " << mismatches << " mismatches;";

  // Batch-of-1 training vs the unpadded path, five optimizer steps each.
  const auto split = desk_split();
  ModelConfig c = with_variant(ModelConfig{}, "stman");
  c.K = 8;
  c.E = 4;
  c.D = 8;
  c.Z = 4;
  c.H = 4;
  const auto vocab = corpus::Vocabulary::build(split.train);
  double worst_loss = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    const auto enc = corpus::encode(split.train[i], vocab);
    const auto batch = corpus::make_batch(std::span(&enc, 1));
    StmanModel a(c, vocab.size()), b(c, vocab.size());
    a.init(i + 1);
    b.init(i + 1);
    train::Trainer trainer(a);
    train::MomentumOptimizer opt(c.momentum_mu);
    auto task_b = train::param_roles(b).task;
    for (int step = 0; step < 5; ++step) {
      const double la = trainer.task_step(batch, c.lr);
      b.params().zero_grad();
      num::Tape t;
      const num::Var lb = train::task_loss(b.forward_unbatched(t, enc, Pass::Task), batch, true);
      t.backward(lb);
      opt.step(task_b, c.lr);
      worst_loss = std::max(worst_loss, std::abs(la - lb.scalar()));
    }
  }
  o.require(worst_loss <= 1e-10, "batch-of-1 vs unbatched losses");
  o.detail << " batch-of-1 vs unbatched training: max loss gap " << sci(worst_loss) << ";";

  // Scalar recurrence oracle vs batched encoder and interaction.
  const std::vector<corpus::EncodedDialogue> dialogues{corpus::encode(split.train[0], vocab),
                                                       corpus::encode(split.train[1], vocab),
                                                       corpus::encode(split.train[2], vocab)};
  ModelConfig small = c;
  small.K = 4;
  small.init_range = 0.5;
  StmanModel m(small, vocab.size());
  m.init(9);
  const auto batch = corpus::make_batch(dialogues);
  num::Tape t;
  const auto f = m.forward(t, batch, Pass::Both);
  double worst = 0.0;
  auto gap = [&](std::span<const double> a, const oracle::Vec& b) {
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  };
  for (std::size_t b = 0; b < dialogues.size(); ++b) {
    const auto& d = dialogues[b];
    const auto ref = oracle::forward_dialogue(m.params(), d.tokens, d.roles, d.turn_flags, true);
    for (std::size_t s = 0; s < d.length(); ++s) {
      gap(f.utterances.value().row(static_cast<std::size_t>(f.layout.row[s][b])), ref.utterance_vectors[s]);
      gap(f.streams.h_use[s].value().row(b), ref.h_use[s]);
      gap(f.streams.h_sa[s].value().row(b), ref.h_sa[s]);
    }
    gap(f.use.probs.value().row(b), ref.use_probs);
  }
  o.require(worst <= 1e-10, "recurrence oracle");
  o.detail << " recurrence oracle max gap " << sci(worst);
  return o;
}

// ---- 4 -----------------------------------------------------------------------

struct SanityRun {
  bool loss_down = false;
  double dev_accuracy = 0.0;
  double first_loss = 0.0, last_loss = 0.0;
};

SanityRun sanity_run(const ModelConfig& c, const corpus::CorpusSplit& split) {
  const auto run = train::train_model(c, split);
  SanityRun r;
  r.first_loss = run.log.epochs.front().task_loss;
  r.last_loss = run.log.epochs.back().task_loss;
  r.loss_down = r.last_loss < r.first_loss;
  r.dev_accuracy = train::evaluate(*run.model, run.vocab, split.dev).use.accuracy;
  return r;
}

Outcome training_sanity() {
  Outcome o;
  const auto split = desk_split();
  auto tally = [&](const ModelConfig& base, std::ostringstream& out) {
    int ok = 0;
    for (std::uint64_t seed : kSeeds) {
      ModelConfig c = base;
      c.seed = seed;
      const auto r = sanity_run(c, split);
      const bool good = r.loss_down && r.dev_accuracy >= 0.70;
      ok += good ? 1 : 0;
      out << " s" << seed << "(loss " << fmt(r.first_loss, 3) << "->" << fmt(r.last_loss, 3) << ", dev acc "
          << fmt(r.dev_accuracy, 3) << ")";
    }
    return ok;
  };
  std::ostringstream spec_detail;
  const int ok = tally(scaled_basic(), spec_detail);
  o.require(ok >= 4, std::to_string(ok) + "/5 seeds meet both conditions");
  o.detail << " scaled defaults:" << spec_detail.str() << "; " << ok << "/5 seeds pass";

  std::ostringstream tuned_detail;
  const int tuned_ok = tally(desk_tuned(scaled_basic()), tuned_detail);
  o.notes.push_back("informational, init U(+-0.3) and lr 0.3:" + tuned_detail.str() + "; " +
                    std::to_string(tuned_ok) + "/5 seeds pass");
  return o;
}

// ---- 5 -----------------------------------------------------------------------

Outcome ablation_direction() {
  Outcome o;
  const auto split = desk_split();
  const ModelConfig base = desk_tuned(scaled_basic());
  const auto& variants = variant_names();
  const auto report = eval::run_ablation(base, split, variants, kSeeds);
  auto f1 = [&](const char* v) { return report.find(v)->median.use_f1; };

  const double stman = f1("stman"), basic = f1("basic"), no_aux = f1("basic-aux");
  o.require(stman >= basic - 0.02, "STMAN < Basic - 0.02");
  o.require(basic >= no_aux, "Basic < Basic-Aux");
  o.detail << " median test USE macro F1:";
  for (const auto& v : variants) o.detail << " " << v << " " << fmt(f1(v.c_str()), 3);
  o.notes.push_back(std::string("informational: STMAN > Basic+TD is ") + (stman > f1("basic+td") ? "true" : "false") +
                    ", Basic+ST > Basic is " + (f1("basic+st") > basic ? "true" : "false"));
  return o;
}

// ---- 6 -----------------------------------------------------------------------

Outcome adversarial_mechanics() {
  Outcome o;
  const auto toy = train::make_grad_check_toy();
  auto td_accuracy = [&](const StmanModel& m) {
    num::Tape t;
    return train::discriminator_accuracy(m.forward(t, toy.batch, Pass::Adversarial), toy.batch);
  };
  auto enc_fp = [](const StmanModel& m) {
    return m.params().fingerprint([](const num::Parameter& p) { return p.group == num::ParamGroup::Encoder; });
  };
  auto td_fp = [](const StmanModel& m) {
    return m.params().fingerprint([](const num::Parameter& p) { return p.group == num::ParamGroup::Discriminator; });
  };

  {
    StmanModel m(toy.config, toy.vocab.size());
    m.init(1);
    train::Trainer tr(m);
    const auto enc = enc_fp(m);
    std::size_t steps = 0;
    double acc = td_accuracy(m);
    while (acc <= 0.9 && steps < 200) {
      tr.adv_max_step(toy.batch, toy.config.lr);
      ++steps;
      acc = td_accuracy(m);
    }
    o.require(acc > 0.9, "TD accuracy " + fmt(acc, 3) + " after 200 steps");
    o.require(enc_fp(m) == enc, "encoder moved during maximization");
    o.detail << " TD accuracy " << fmt(acc, 3) << " after " << steps << " max steps;";
  }

  // A wide init so a 1e-3 step moves the objective by a resolvable amount.
  int increases = 0;
  double worst = -1e300;
  ModelConfig wide = toy.config;
  wide.init_range = 0.5;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    StmanModel m(wide, toy.vocab.size());
    m.init(seed);
    train::Trainer tr(m);
    const double before = tr.adv_min_step(toy.batch, 1e-3);
    num::Tape t;
    const double after = train::adv_objective(m.forward(t, toy.batch, Pass::Adversarial), toy.batch).scalar();
    worst = std::max(worst, after - before);
    if (after > before) ++increases;
  }
  o.require(increases == 0, std::to_string(increases) + "/20 min steps increased the objective");
  o.detail << " min step lr 1e-3: " << increases << "/20 increases (largest change " << sci(worst) << ");";

  {
    const auto split = desk_split();
    ModelConfig c = with_variant(ModelConfig{}, "stman");
    c.K = 8;
    c.E = 4;
    c.D = 8;
    c.Z = 4;
    c.H = 4;
    const auto vocab = corpus::Vocabulary::build(split.train);
    StmanModel m(c, vocab.size());
    m.init(4);
    train::Trainer tr(m);
    const auto batches = corpus::batchify(split.train, vocab, c.batch);
    std::size_t changed = 0;
    for (std::size_t epoch = 0; epoch < 2; ++epoch) {
      for (const auto& b : batches) {
        tr.adv_min_step(b, c.lr);
        tr.adv_max_step(b, c.lr);
      }
      const auto fp = td_fp(m);
      for (const auto& b : batches) {
        tr.task_step(b, c.lr);
        if (td_fp(m) != fp) ++changed;
      }
    }
    o.require(changed == 0, "TD changed during task updates");
    o.detail << " TD fingerprint constant over " << 2 * batches.size() << " task updates";
  }
  return o;
}

// ---- 7 -----------------------------------------------------------------------

Outcome heuristic_baselines() {
  Outcome o;
  const auto ds = corpus::generate_synthetic(kCorpusSize, kCorpusQ, kCorpusSeed);
  const auto fin = eval::heuristic_baseline(ds, eval::Anchor::Final);
  const auto count = oracle::count_final_heuristic(ds);
  const double expected = static_cast<double>(count.correct) / static_cast<double>(count.total);
  o.require(fin.report.accuracy == expected, "final heuristic differs from counting oracle");

  const auto exact = corpus::generate_synthetic(kCorpusSize, 1.0, kCorpusSeed);
  const double limit = eval::heuristic_baseline(exact, eval::Anchor::Final).report.accuracy;
  o.require(limit == 1.0, "q=1 accuracy " + fmt(limit));

  double worst = 0.0;
  for (const auto* corpus : {&ds, &exact}) {
    for (auto a : {eval::Anchor::Initial, eval::Anchor::Final}) {
      const auto t = eval::combination_table(*corpus, a);
      double sum = 0.0;
      for (const auto& row : t.proportion)
        for (double v : row) sum += v;
      worst = std::max(worst, std::abs(sum - 1.0));
    }
  }
  o.require(worst <= 1e-12, "table sums");
  o.detail << " final-sentiment accuracy " << fmt(fin.report.accuracy) << " (oracle " << count.correct << "/"
           << count.total << "), q=1 accuracy " << fmt(limit) << ", max table sum error " << sci(worst);
  return o;
}

// ---- 8 -----------------------------------------------------------------------

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "stman");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  return stman::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Outcome determinism() {
  Outcome o;
  const fs::path root = fs::temp_directory_path() / ("stman_acceptance_" + std::to_string(::getpid()));
  std::vector<fs::path> dirs{root / "run1", root / "run2"};
  for (const auto& dir : dirs) {
    fs::create_directories(dir);
    const std::string d = dir.string();
    int status = cli({"gen-data", "--n", "120", "--q", "0.9", "--seed", "11", "--out", d + "/corpus.jsonl"});
    status |= cli({"train", "--corpus", d + "/corpus.jsonl", "--variant", "stman", "--seed", "11", "--set", "K=16",
                   "--set", "E=8", "--set", "D=16", "--set", "Z=8", "--set", "H=8", "--set", "epochs=2", "--quiet",
                   "--out", d + "/model.json"});
    status |= cli({"eval", "--checkpoint", d + "/model.json", "--corpus", d + "/corpus.jsonl", "--log",
                   d + "/model.json.log.json", "--out", d + "/report.json"});
    o.require(status == 0, "a command failed in " + d);
  }
  for (const char* name : {"corpus.jsonl", "model.json", "model.json.log.json", "report.json"}) {
    const auto a = slurp(dirs[0] / name), b = slurp(dirs[1] / name);
    o.require(!a.empty() && a == b, std::string(name) + " differs");
    o.detail << " " << name << " " << a.size() << " bytes " << (a == b ? "identical" : "DIFFERENT") << ";";
  }
  fs::remove_all(root);
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"STMAN acceptance criteria"};
  std::vector<int> only;
  bool strict = false;
  app.add_option("--only", only, "criteria to run (default: all)")->check(CLI::Range(1, 8));
  app.add_flag("--strict", strict, "exit with status 1 if any criterion fails");
  CLI11_PARSE(app, argc, argv);

  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "gradient integrity", gradient_integrity},
      {2, "exactness fixtures", exactness_fixtures},
      {3, "oracle equivalence", oracle_equivalence},
      {4, "training sanity", training_sanity},
      {5, "ablation direction", ablation_direction},
      {6, "adversarial mechanics", adversarial_mechanics},
      {7, "heuristic baselines", heuristic_baselines},
      {8, "determinism", determinism},
  };
  const std::set<int> selected(only.begin(), only.end());

  int passed = 0, failed = 0;
  std::vector<int> failing;
  for (const auto& c : criteria) {
    if (!selected.empty() && !selected.contains(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " [exception: " << e.what() << "]";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << "criterion " << c.id << " " << (o.pass ? "PASS" : "FAIL") << " " << c.name << " ("
              << fmt(secs, 1) << " s):" << o.detail.str() << "\n";
    for (const auto& n : o.notes) std::cout << "    " << n << "\n";
    std::cout.flush();
    if (o.pass) {
      ++passed;
    } else {
      ++failed;
      failing.push_back(c.id);
    }
  }
  std::cout << "acceptance: " << passed << " passed, " << failed << " failed";
  if (!failing.empty()) {
    std::cout << " (failing:";
    for (int id : failing) std::cout << " " << id;
    std::cout << ")";
  }
  std::cout << "\n";
  return strict && failed > 0 ? 1 : 0;
}

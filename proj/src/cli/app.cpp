#include "stman/cli/app.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "stman/corpus/jsonl.hpp"
#include "stman/corpus/split.hpp"
#include "stman/corpus/synthetic.hpp"
#include "stman/errors.hpp"
#include "stman/eval/analysis.hpp"
#include "stman/eval/experiments.hpp"
#include "stman/training/checkpoint.hpp"
#include "stman/training/evaluate.hpp"
#include "stman/training/gradcheck.hpp"
#include "stman/training/losses.hpp"
#include "stman/training/trainer.hpp"

namespace stman::cli {

namespace {

using Json = nlohmann::ordered_json;

/// Options shared by every command that builds a ModelConfig.
struct ConfigArgs {
  std::string config_path;
  std::vector<std::string> overrides;  // key=value
  std::optional<std::uint64_t> seed;
  std::string variant;

  void attach(CLI::App& cmd, bool with_variant) {
    cmd.add_option("--config", config_path, "key=value config file")->check(CLI::ExistingFile);
    cmd.add_option("--set", overrides, "override one config field (key=value), repeatable");
    cmd.add_option("--seed", seed, "run seed (overrides config and STMAN_SEED)");
    if (with_variant) {
      cmd.add_option("--variant", variant,
                     "basic, basic-mask, basic-aux, basic+td, basic+st or stman");
    }
  }

  /// defaults < config file < STMAN_SEED < --variant < --set < --seed
  ModelConfig build() const {
    ModelConfig c = config_path.empty() ? ModelConfig{} : load_config(config_path);
    apply_env_overrides(c);
    if (!variant.empty()) c = with_variant(c, variant);
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ParseError("--set expects key=value, got '" + kv + "'");
      set_config_field(c, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (seed) c.seed = *seed;
    c.validate();
    return c;
  }
};

Json number_or_null(double v) { return std::isnan(v) ? Json(nullptr) : Json(v); }

void write_json(const std::string& path, const Json& j) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ContractError("cannot write " + path);
  f << j.dump(2) << '\n';
}

std::string fixed(double v, int digits = 4) {
  if (std::isnan(v)) return "-";
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

Json epoch_json(const train::EpochStats& s) {
  return {{"epoch", s.epoch},
          {"lr", s.lr},
          {"task_loss", s.task_loss},
          {"adv_objective", number_or_null(s.adv_objective)},
          {"td_accuracy", number_or_null(s.td_accuracy)},
          {"dev_use_accuracy", number_or_null(s.dev_use_accuracy)},
          {"dev_use_macro_f1", number_or_null(s.dev_use_f1)},
          {"dev_sa_accuracy", number_or_null(s.dev_sa_accuracy)},
          {"dev_sa_macro_f1", number_or_null(s.dev_sa_f1)}};
}

std::vector<corpus::Dialogue> select_split(std::vector<corpus::Dialogue> all,
                                           const std::string& which, std::uint64_t seed) {
  if (which == "all") return all;
  corpus::CorpusSplit s = corpus::split_corpus(all, seed);
  if (which == "train") return std::move(s.train);
  if (which == "dev") return std::move(s.dev);
  return std::move(s.test);
}

std::vector<std::uint64_t> seed_list(std::size_t n) {
  std::vector<std::uint64_t> seeds;
  for (std::size_t i = 1; i <= n; ++i) seeds.push_back(i);
  return seeds;
}

void print_metrics(std::ostream& out, const std::string& task, const eval::MetricsReport& m) {
  out << task << ": accuracy " << fixed(m.accuracy) << "  macro-F1 " << fixed(m.macro_f1)
      << "  (n=" << m.count << ")\n";
}

// ---------------------------------------------------------------- commands

int cmd_gen_data(std::size_t n, double q, std::optional<std::uint64_t> seed,
                 const std::string& out_path, std::ostream& out) {
  ModelConfig c;
  apply_env_overrides(c);
  const std::uint64_t s = seed.value_or(c.seed);
  const auto dialogues = corpus::generate_synthetic(n, q, s);
  corpus::write_corpus(out_path, dialogues);
  out << "wrote " << dialogues.size() << " dialogues to " << out_path << " (q=" << q
      << ", seed=" << s << ")\n";
  return kExitOk;
}

struct TrainArgs {
  ConfigArgs cfg;
  std::string corpus, out, log;
  std::optional<std::uint64_t> split_seed;
  bool quiet = false;
};

int cmd_train(const TrainArgs& a, std::ostream& out) {
  const ModelConfig config = a.cfg.build();
  const auto dialogues = corpus::parse_corpus(a.corpus);
  const auto split = corpus::split_corpus(dialogues, a.split_seed.value_or(config.seed));
  out << "variant " << variant_of(config) << ": train " << split.train.size() << ", dev "
      << split.dev.size() << ", test " << split.test.size() << " dialogues\n";

  train::TrainOptions opts;
  if (!a.quiet) {
    opts.on_epoch = [&out](const train::EpochStats& s) {
      out << "epoch " << s.epoch << "  lr " << fixed(s.lr, 5) << "  task " << fixed(s.task_loss)
          << "  adv " << fixed(s.adv_objective) << "  dev USE acc " << fixed(s.dev_use_accuracy)
          << " F1 " << fixed(s.dev_use_f1) << "  dev SA acc " << fixed(s.dev_sa_accuracy) << '\n';
    };
  }
  const train::TrainedModel m = train::train_model(config, split, opts);
  train::save_checkpoint(a.out, *m.model, m.vocab);

  Json log;
  log["variant"] = variant_of(config);
  log["config"] = to_config_text(config);
  auto epochs = Json::array();
  for (const auto& s : m.log.epochs) epochs.push_back(epoch_json(s));
  log["epochs"] = std::move(epochs);
  log["best_epoch"] = m.log.best_epoch;
  log["best_dev_use_macro_f1"] = number_or_null(m.log.best_dev_f1);
  const std::string log_path = a.log.empty() ? a.out + ".log.json" : a.log;
  write_json(log_path, log);
  out << "best epoch " << m.log.best_epoch << " (dev USE F1 " << fixed(m.log.best_dev_f1)
      << "); checkpoint " << a.out << ", log " << log_path << '\n';
  return kExitOk;
}

struct EvalArgs {
  std::string checkpoint, corpus, split = "test", out, log;
  std::optional<std::uint64_t> split_seed;
};

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  const train::Checkpoint ck = train::load_checkpoint(a.checkpoint);
  const ModelConfig& config = ck.model->config();
  const auto dialogues = select_split(corpus::parse_corpus(a.corpus), a.split,
                                      a.split_seed.value_or(config.seed));
  train::Evaluation e = train::evaluate(*ck.model, ck.vocab, dialogues, config.batch);
  if (!a.log.empty()) {
    std::ifstream f(a.log);
    if (!f) throw ContractError("cannot read training log " + a.log);
    Json log;
    try {
      f >> log;
      for (const auto& ep : log.at("epochs")) e.use.loss_curve.push_back(ep.at("task_loss").get<double>());
    } catch (const nlohmann::json::exception& ex) {
      throw ParseError(a.log + ": " + ex.what());
    }
  }

  print_metrics(out, "USE", e.use);
  if (e.sa.count > 0) print_metrics(out, "SA ", e.sa);
  out << "task loss " << fixed(e.task_loss) << '\n';
  if (!a.out.empty()) {
    Json r;
    r["checkpoint_variant"] = variant_of(config);
    r["split"] = a.split;
    r["dialogues"] = dialogues.size();
    r["task_loss"] = e.task_loss;
    r["use"] = eval::to_json(e.use);
    r["sa"] = e.sa.count > 0 ? eval::to_json(e.sa) : Json(nullptr);
    write_json(a.out, r);
  }
  return kExitOk;
}

struct ExperimentArgs {
  ConfigArgs cfg;
  std::string corpus, out;
  std::size_t seeds = 3;
  std::optional<std::uint64_t> split_seed;
  std::vector<std::string> variants;
  std::vector<double> fractions{0.0, 0.25, 0.5, 0.75, 1.0};
};

int cmd_ablate(const ExperimentArgs& a, std::ostream& out) {
  const ModelConfig base = a.cfg.build();
  const auto dialogues = corpus::parse_corpus(a.corpus);
  const auto split = corpus::split_corpus(dialogues, a.split_seed.value_or(base.seed));
  const auto variants = a.variants.empty() ? variant_names() : a.variants;
  const auto seeds = seed_list(a.seeds);
  const auto report = eval::run_ablation(base, split, variants, seeds,
                                         [&out](const std::string& v, const eval::CellScores& c) {
                                           out << "  " << v << " seed " << c.seed << ": USE F1 "
                                               << fixed(c.use_f1) << '\n';
                                         });
  out << eval::format_report(report);
  if (!a.out.empty()) write_json(a.out, eval::to_json(report));
  return kExitOk;
}

int cmd_sweep(const ExperimentArgs& a, std::ostream& out) {
  const ModelConfig base = a.cfg.build();
  if (!base.use_td) throw ContractError("sweep: the fraction applies to the adversarial phase; use a variant with use_td");
  const auto dialogues = corpus::parse_corpus(a.corpus);
  const auto split = corpus::split_corpus(dialogues, a.split_seed.value_or(base.seed));
  const auto seeds = seed_list(a.seeds);
  const auto report = eval::run_fraction_sweep(
      base, split, a.fractions, seeds, [&out](const std::string& f, const eval::CellScores& c) {
        out << "  fraction " << f << " seed " << c.seed << ": USE F1 " << fixed(c.use_f1) << '\n';
      });
  out << eval::format_report(report);
  if (!a.out.empty()) write_json(a.out, eval::to_json(report));
  return kExitOk;
}

int cmd_analyze(const std::string& corpus_path, const std::string& out_path, std::ostream& out) {
  const auto dialogues = corpus::parse_corpus(corpus_path);
  Json r;
  for (eval::Anchor anchor : {eval::Anchor::Initial, eval::Anchor::Final}) {
    const std::string name(eval::to_string(anchor));
    const auto b = eval::heuristic_baseline(dialogues, anchor);
    const auto t = eval::combination_table(dialogues, anchor);
    out << name << "-user-sentiment baseline: accuracy " << fixed(b.report.accuracy)
        << "  macro-F1 " << fixed(b.report.macro_f1) << "  (skipped " << b.skipped << ")\n";
    out << eval::format_table(t);
    Json entry;
    entry["baseline"] = eval::to_json(b.report);
    entry["skipped"] = b.skipped;
    entry["combination"] = eval::to_json(t);
    r[name] = std::move(entry);
  }
  if (!out_path.empty()) write_json(out_path, r);
  return kExitOk;
}

int cmd_grad_check(std::uint64_t seed, double range, std::ostream& out) {
  train::GradCheckToy toy = train::make_grad_check_toy();
  model::StmanModel m(toy.config, toy.vocab.size());
  m.params().init_uniform(seed, -range, range);

  bool ok = true;
  auto report = [&](const char* label, const train::GradCheckReport& r) {
    out << label << ": " << r.checked << " entries, max relative error " << r.max_rel_error
        << " at " << r.worst_param << '[' << r.worst_index << "], "
        << (r.passed() ? "ok" : std::to_string(r.failed) + " above tolerance") << '\n';
    ok = ok && r.passed();
  };
  report("task loss", train::check_gradients(m.params(), [&](num::Tape& t) {
           return train::task_loss(m.forward(t, toy.batch, model::Pass::Task), toy.batch, true);
         }));
  report("adversarial objective", train::check_gradients(m.params(), [&](num::Tape& t) {
           return train::adv_objective(m.forward(t, toy.batch, model::Pass::Adversarial),
                                       toy.batch);
         }));
  return ok ? kExitOk : kExitFailure;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Speaker turn-aware multi-task adversarial network for dialogue satisfaction "
               "and sentiment",
               "stman"};
  app.require_subcommand(1);

  std::size_t gen_n = 0;
  double gen_q = 0.9;
  std::optional<std::uint64_t> gen_seed;
  std::string gen_out;
  auto* gen = app.add_subcommand("gen-data", "generate a synthetic labeled corpus");
  gen->add_option("--n", gen_n, "number of dialogues")->required();
  gen->add_option("--q", gen_q, "probability satisfaction follows the final user sentiment")
      ->check(CLI::Range(0.0, 1.0));
  gen->add_option("--seed", gen_seed, "generator seed (default: STMAN_SEED or 1)");
  gen->add_option("--out", gen_out, "output JSON Lines file")->required();

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "train a model and write a checkpoint");
  tr.cfg.attach(*train_cmd, true);
  train_cmd->add_option("--corpus", tr.corpus, "JSON Lines corpus")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--out", tr.out, "checkpoint path")->required();
  train_cmd->add_option("--log", tr.log, "per-epoch log (default: <out>.log.json)");
  train_cmd->add_option("--split-seed", tr.split_seed, "train/dev/test split seed (default: run seed)");
  train_cmd->add_flag("--quiet", tr.quiet, "no per-epoch output");

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "score a checkpoint on a corpus split");
  eval_cmd->add_option("--checkpoint", ev.checkpoint)->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--corpus", ev.corpus)->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--split", ev.split, "train, dev, test or all")
      ->check(CLI::IsMember({"train", "dev", "test", "all"}));
  eval_cmd->add_option("--split-seed", ev.split_seed, "split seed (default: checkpoint seed)");
  eval_cmd->add_option("--log", ev.log, "training log whose loss curve goes into the report")
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--out", ev.out, "JSON report path");

  ExperimentArgs ab;
  auto* ablate = app.add_subcommand("ablate", "train every variant over several seeds");
  ab.cfg.attach(*ablate, false);
  ablate->add_option("--corpus", ab.corpus)->required()->check(CLI::ExistingFile);
  ablate->add_option("--seeds", ab.seeds, "number of seeds (1..N)")->check(CLI::PositiveNumber);
  ablate->add_option("--variants", ab.variants, "subset of variants")->delimiter(',');
  ablate->add_option("--split-seed", ab.split_seed, "split seed (default: config seed)");
  ablate->add_option("--out", ab.out, "JSON report path");

  ExperimentArgs sw;
  sw.cfg.variant = "stman";
  auto* sweep = app.add_subcommand("sweep", "vary the adversarial-phase training fraction");
  sw.cfg.attach(*sweep, true);
  sweep->add_option("--corpus", sw.corpus)->required()->check(CLI::ExistingFile);
  sweep->add_option("--seeds", sw.seeds, "number of seeds (1..N)")->check(CLI::PositiveNumber);
  sweep->add_option("--fractions", sw.fractions, "comma-separated fractions in [0, 1]")
      ->delimiter(',');
  sweep->add_option("--split-seed", sw.split_seed, "split seed (default: config seed)");
  sweep->add_option("--out", sw.out, "JSON report path");

  std::string an_corpus, an_out;
  auto* analyze = app.add_subcommand("analyze", "sentiment heuristics and combination tables");
  analyze->add_option("--corpus", an_corpus)->required()->check(CLI::ExistingFile);
  analyze->add_option("--out", an_out, "JSON report path");

  std::uint64_t gc_seed = 1;
  double gc_range = 0.5;
  auto* grad = app.add_subcommand("grad-check", "finite-difference check of the full model on a toy");
  grad->add_option("--seed", gc_seed, "parameter init seed");
  grad->add_option("--init-range", gc_range, "init from U(-r, r)")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*gen) return cmd_gen_data(gen_n, gen_q, gen_seed, gen_out, out);
    if (*train_cmd) return cmd_train(tr, out);
    if (*eval_cmd) return cmd_eval(ev, out);
    if (*ablate) return cmd_ablate(ab, out);
    if (*sweep) return cmd_sweep(sw, out);
    if (*analyze) return cmd_analyze(an_corpus, an_out, out);
    if (*grad) return cmd_grad_check(gc_seed, gc_range, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace stman::cli

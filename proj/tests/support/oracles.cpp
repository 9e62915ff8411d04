#include "oracles.hpp"

#include <cmath>
#include <stdexcept>

namespace oracle {

Mat to_mat(const stman::num::Matrix& m) {
  Mat out(m.rows(), Vec(m.cols()));
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) out[r][c] = m(r, c);
  }
  return out;
}

Mat param(const stman::num::ParamStore& store, const std::string& name) {
  return to_mat(store.get(name).value);
}

Mat matmul(const Mat& a, const Mat& b) {
  const std::size_t m = a.size(), n = b.size(), p = b.empty() ? 0 : b[0].size();
  Mat out(m, Vec(p, 0.0));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += a[i][k] * b[k][j];
      out[i][j] = s;
    }
  }
  return out;
}

Vec vecmat(const Vec& x, const Mat& w) { return matmul(Mat{x}, w)[0]; }

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::vector<long double> softmax_ld(std::span<const double> x) {
  long double mx = x[0];
  for (double v : x) mx = std::max<long double>(mx, v);
  std::vector<long double> e(x.size());
  long double z = 0.0L;
  for (std::size_t i = 0; i < x.size(); ++i) {
    e[i] = std::exp(static_cast<long double>(x[i]) - mx);
    z += e[i];
  }
  for (auto& v : e) v /= z;
  return e;
}

Vec softmax(std::span<const double> x) {
  const auto ld = softmax_ld(x);
  return {ld.begin(), ld.end()};
}

double central_difference(const std::function<double()>& f, double& x, double h) {
  const double orig = x;
  x = orig + h;
  const double up = f();
  x = orig - h;
  const double down = f();
  x = orig;
  return (up - down) / (2.0 * h);
}

namespace {

Vec add(Vec a, const Vec& b) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
  return a;
}

Vec concat(Vec a, const Vec& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

bool has(const stman::num::ParamStore& p, const std::string& name) {
  return p.find(name) != nullptr;
}

struct Gru {
  Mat wr, wz, wh, ur, uz, uh, usr, usz, ush;
  bool linked = false;

  Gru(const stman::num::ParamStore& p, const std::string& prefix)
      : wr(param(p, prefix + ".Wr")),
        wz(param(p, prefix + ".Wz")),
        wh(param(p, prefix + ".Wh")),
        ur(param(p, prefix + ".Ur")),
        uz(param(p, prefix + ".Uz")),
        uh(param(p, prefix + ".Uh")) {
    if (has(p, prefix + ".Usr")) {
      linked = true;
      usr = param(p, prefix + ".Usr");
      usz = param(p, prefix + ".Usz");
      ush = param(p, prefix + ".Ush");
    }
  }

  Vec step(const Vec& h, const Vec& x, const Vec* hs = nullptr) const {
    if (linked) return gru_step(wr, wz, wh, ur, uz, uh, h, x, &usr, &usz, &ush, hs);
    return gru_step(wr, wz, wh, ur, uz, uh, h, x);
  }
};

Vec dense_tanh(const Vec& v, const Mat& w, const Vec& b) {
  Vec y = add(vecmat(v, w), b);
  for (double& e : y) e = std::tanh(e);
  return y;
}

}  // namespace

LstmState lstm_step(const Mat& wx, const Mat& wh, const Vec& b, const Vec& x, const LstmState& s) {
  const std::size_t e = s.h.size();
  Vec pre = add(add(vecmat(x, wx), vecmat(s.h, wh)), b);
  LstmState out{Vec(e), Vec(e)};
  for (std::size_t j = 0; j < e; ++j) {
    const double i = sigmoid(pre[j]);
    const double f = sigmoid(pre[e + j]);
    const double o = sigmoid(pre[2 * e + j]);
    const double g = std::tanh(pre[3 * e + j]);
    out.c[j] = f * s.c[j] + i * g;
    out.h[j] = o * std::tanh(out.c[j]);
  }
  return out;
}

Vec gru_step(const Mat& wr, const Mat& wz, const Mat& wh, const Mat& ur, const Mat& uz,
             const Mat& uh, const Vec& h, const Vec& x, const Mat* usr, const Mat* usz,
             const Mat* ush, const Vec* hs) {
  const std::size_t k = h.size();
  Vec r = add(vecmat(x, wr), vecmat(h, ur));
  Vec z = add(vecmat(x, wz), vecmat(h, uz));
  if (hs != nullptr) {
    r = add(r, vecmat(*hs, *usr));
    z = add(z, vecmat(*hs, *usz));
  }
  for (std::size_t j = 0; j < k; ++j) {
    r[j] = sigmoid(r[j]);
    z[j] = sigmoid(z[j]);
  }
  Vec hr(k);
  for (std::size_t j = 0; j < k; ++j) hr[j] = h[j] * r[j];
  Vec cand = add(vecmat(x, wh), vecmat(hr, uh));
  if (hs != nullptr) cand = add(cand, vecmat(*hs, *ush));
  Vec out(k);
  for (std::size_t j = 0; j < k; ++j) out[j] = (1.0 - z[j]) * h[j] + z[j] * std::tanh(cand[j]);
  return out;
}

EncodedUtterance encode_utterance(const stman::num::ParamStore& p,
                                  std::span<const std::int64_t> ids) {
  const Mat embed = param(p, "enc.embed");
  const Mat fwx = param(p, "enc.fwd.Wx"), fwh = param(p, "enc.fwd.Wh");
  const Mat bwx = param(p, "enc.bwd.Wx"), bwh = param(p, "enc.bwd.Wh");
  const Vec fb = param(p, "enc.fwd.b")[0], bb = param(p, "enc.bwd.b")[0];
  const Mat att_w = param(p, "enc.att.w");
  const double att_b = param(p, "enc.att.b")[0][0];
  const std::size_t e = fwh.size();
  const std::size_t n = ids.size();

  std::vector<Vec> hf(n), hb(n);
  LstmState s{Vec(e, 0.0), Vec(e, 0.0)};
  for (std::size_t t = 0; t < n; ++t) {
    s = lstm_step(fwx, fwh, fb, embed[static_cast<std::size_t>(ids[t])], s);
    hf[t] = s.h;
  }
  s = {Vec(e, 0.0), Vec(e, 0.0)};
  for (std::size_t t = n; t-- > 0;) {
    s = lstm_step(bwx, bwh, bb, embed[static_cast<std::size_t>(ids[t])], s);
    hb[t] = s.h;
  }
  std::vector<Vec> states(n);
  Vec scores(n);
  for (std::size_t t = 0; t < n; ++t) {
    states[t] = concat(hf[t], hb[t]);
    scores[t] = std::tanh(vecmat(states[t], att_w)[0] + att_b);
  }
  EncodedUtterance out{Vec(2 * e, 0.0), softmax(scores)};
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t j = 0; j < 2 * e; ++j) out.vector[j] += out.beta[t] * states[t][j];
  }
  return out;
}

DialogueOutput forward_dialogue(const stman::num::ParamStore& p,
                                const std::vector<std::vector<std::int64_t>>& token_ids,
                                const std::vector<stman::corpus::Role>& roles,
                                const std::vector<std::uint8_t>& turn_flags, bool use_mask) {
  DialogueOutput out;
  const std::size_t L = token_ids.size();
  for (const auto& ids : token_ids) out.utterance_vectors.push_back(encode_utterance(p, ids).vector);

  const bool with_sa = has(p, "dense_sa.W");
  const bool with_turns = has(p, "turn.emb");
  const Mat emb = with_turns ? param(p, "turn.emb") : Mat{};
  const Gru shared(p, "gru_shared");

  auto run = [&](const std::string& dense, const std::string& gru_name, std::vector<Vec>& hs_out,
                 std::vector<Vec>* features) {
    const Mat w = param(p, dense + ".W");
    const Vec b = param(p, dense + ".b")[0];
    const Gru task(p, gru_name);
    const std::size_t k = w[0].size();
    Vec h_shared(k, 0.0), h(k, 0.0);
    for (std::size_t t = 0; t < L; ++t) {
      const Vec x = dense_tanh(out.utterance_vectors[t], w, b);
      if (features != nullptr) features->push_back(x);
      h_shared = shared.step(h_shared, x);
      const Vec x_aug = with_turns ? concat(x, emb[turn_flags[t]]) : x;
      h = task.step(h, x_aug, &h_shared);
      hs_out.push_back(h);
    }
  };
  std::vector<Vec> x_use, x_sa;
  run("dense_use", "gru_use", out.h_use, &x_use);
  if (with_sa) run("dense_sa", "gru_sa", out.h_sa, &x_sa);

  // USE head
  const Mat wu = param(p, "use.Wu"), uu = param(p, "use.Uu"), wo = param(p, "use.Wo");
  const Vec bu = param(p, "use.bu")[0], bo = param(p, "use.bo")[0];
  const std::size_t k = out.h_use[0].size();
  Vec scores;
  std::vector<std::size_t> kept;
  for (std::size_t t = 0; t < L; ++t) {
    if (use_mask && roles[t] != stman::corpus::Role::User) continue;
    Vec u = add(vecmat(out.h_use[t], wu), bu);
    for (double& v : u) v = std::tanh(v);
    scores.push_back(vecmat(u, uu)[0]);
    kept.push_back(t);
  }
  out.alpha.assign(L, 0.0);
  Vec pooled(k, 0.0);
  if (!kept.empty()) {
    const Vec a = softmax(scores);
    for (std::size_t i = 0; i < kept.size(); ++i) {
      out.alpha[kept[i]] = a[i];
      for (std::size_t j = 0; j < k; ++j) pooled[j] += a[i] * out.h_use[kept[i]][j];
    }
  }
  out.use_probs = softmax(add(vecmat(concat(pooled, out.h_use.back()), wo), bo));

  if (with_sa) {
    const Mat wa = param(p, "sa.W");
    const Vec ba = param(p, "sa.b")[0];
    for (const Vec& h : out.h_sa) out.sa_probs.push_back(softmax(add(vecmat(h, wa), ba)));
  }

  if (has(p, "td.W")) {
    const Gru td(p, "td.gru");
    const Mat tw = param(p, "td.W");
    const Vec tb = param(p, "td.b")[0];
    auto disc = [&](const std::vector<Vec>& xs, std::vector<Vec>& dst) {
      Vec h(tw.size(), 0.0);
      for (const Vec& x : xs) {
        h = td.step(h, x);
        dst.push_back(softmax(add(vecmat(h, tw), tb)));
      }
    };
    disc(x_use, out.td_use);
    disc(x_sa, out.td_sa);
  }
  return out;
}

std::vector<std::vector<std::size_t>> brute_confusion(std::span<const std::size_t> preds,
                                                      std::span<const std::size_t> truths,
                                                      std::size_t n_classes) {
  std::vector<std::vector<std::size_t>> c(n_classes, std::vector<std::size_t>(n_classes, 0));
  for (std::size_t t = 0; t < n_classes; ++t) {
    for (std::size_t p = 0; p < n_classes; ++p) {
      for (std::size_t i = 0; i < preds.size(); ++i) {
        if (truths[i] == t && preds[i] == p) ++c[t][p];
      }
    }
  }
  return c;
}

double brute_accuracy(std::span<const std::size_t> preds, std::span<const std::size_t> truths) {
  std::size_t n_classes = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    n_classes = std::max({n_classes, preds[i] + 1, truths[i] + 1});
  }
  const auto c = brute_confusion(preds, truths, n_classes);
  std::size_t diag = 0;
  for (std::size_t k = 0; k < n_classes; ++k) diag += c[k][k];
  return static_cast<double>(diag) / static_cast<double>(preds.size());
}

double brute_macro_f1(std::span<const std::size_t> preds, std::span<const std::size_t> truths,
                      std::size_t n_classes) {
  const auto c = brute_confusion(preds, truths, n_classes);
  double sum = 0.0;
  for (std::size_t k = 0; k < n_classes; ++k) {
    std::size_t col = 0, row = 0;
    for (std::size_t j = 0; j < n_classes; ++j) {
      col += c[j][k];
      row += c[k][j];
    }
    const double tp = static_cast<double>(c[k][k]);
    const double prec = col == 0 ? 0.0 : tp / static_cast<double>(col);
    const double rec = row == 0 ? 0.0 : tp / static_cast<double>(row);
    sum += (prec + rec) == 0.0 ? 0.0 : 2.0 * prec * rec / (prec + rec);
  }
  return sum / static_cast<double>(n_classes);
}

namespace {

HeuristicCount count_heuristic(std::span<const stman::corpus::Dialogue> dialogues, bool final) {
  HeuristicCount h;
  for (const auto& d : dialogues) {
    int sentiment = -1;
    for (std::size_t i = 0; i < d.utterances.size(); ++i) {
      const auto& u = d.utterances[final ? d.utterances.size() - 1 - i : i];
      if (u.speaker == stman::corpus::Role::User) {
        sentiment = static_cast<int>(u.sentiment);
        break;
      }
    }
    if (sentiment < 0) {
      ++h.skipped;
      continue;
    }
    ++h.total;
    // negative/neutral/positive and unsatisfied/met/well_satisfied share indices
    if (sentiment == static_cast<int>(d.satisfaction)) ++h.correct;
  }
  return h;
}

}  // namespace

HeuristicCount count_final_heuristic(std::span<const stman::corpus::Dialogue> dialogues) {
  return count_heuristic(dialogues, true);
}

HeuristicCount count_initial_heuristic(std::span<const stman::corpus::Dialogue> dialogues) {
  return count_heuristic(dialogues, false);
}

}  // namespace oracle

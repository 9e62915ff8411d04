#include "stman/numerics/tape.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "stman/errors.hpp"

namespace stman::num {

namespace {

[[noreturn]] void shape_fail(const char* op, const Matrix& a, const Matrix& b) {
  throw ShapeError(std::string(op) + ": incompatible shapes " + a.shape_str() + " and " +
                   b.shape_str());
}

Tape& tape_of(Var a) {
  if (!a.valid()) throw ContractError("operation on an unbound Var");
  return *a.tape();
}

Tape& tape_of(Var a, Var b) {
  Tape& t = tape_of(a);
  if (b.tape() != &t) throw ContractError("operands live on different tapes");
  return t;
}

bool needs(const Tape& t, Var v) { return t.node(v.id()).needs_grad; }

Node make_node(Op op, Matrix value, std::initializer_list<Var> parents, const Tape& t) {
  Node n;
  n.op = op;
  n.value = std::move(value);
  for (Var p : parents) {
    n.parents.push_back(p.id());
    n.needs_grad = n.needs_grad || needs(t, p);
  }
  return n;
}

Matrix& grad_slot(Tape& t, std::uint32_t id) {
  Node& n = t.node_mut(id);
  if (n.param != nullptr) return n.param->grad;
  if (n.grad.empty() && !n.val().empty()) n.grad = Matrix(n.val().rows(), n.val().cols());
  return n.grad;
}

void softmax_row_into(std::span<const double> in, std::span<double> out,
                      const std::uint8_t* keep) {
  double mx = -INFINITY;
  for (std::size_t j = 0; j < in.size(); ++j) {
    if (keep == nullptr || keep[j] != 0) mx = std::max(mx, in[j]);
  }
  if (mx == -INFINITY) {
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  double total = 0.0;
  for (std::size_t j = 0; j < in.size(); ++j) {
    if (keep == nullptr || keep[j] != 0) {
      out[j] = std::exp(in[j] - mx);
      total += out[j];
    } else {
      out[j] = 0.0;
    }
  }
  for (double& x : out) x /= total;
}

}  // namespace

// ---- Var / Tape --------------------------------------------------------------

const Matrix& Var::value() const { return tape_->node(id_).val(); }

Matrix Var::grad() const {
  const Node& n = tape_->node(id_);
  if (n.param != nullptr) return n.param->grad;
  if (n.grad.empty()) return Matrix(n.val().rows(), n.val().cols());
  return n.grad;
}

double Var::scalar() const {
  const Matrix& v = value();
  if (v.rows() != 1 || v.cols() != 1) {
    throw ShapeError("scalar(): expected (1x1), got " + v.shape_str());
  }
  return v[0];
}

Var Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

Var Tape::constant(Matrix value) {
  Node n;
  n.op = Op::Constant;
  n.value = std::move(value);
  return push(std::move(n));
}

Var Tape::param(Parameter& p) {
  Node n;
  n.op = Op::Param;
  n.param = &p;
  n.needs_grad = true;
  return push(std::move(n));
}

void Tape::backward(Var loss) {
  if (loss.tape() != this) throw ContractError("backward: loss is not on this tape");
  const Matrix& lv = loss.value();
  if (lv.rows() != 1 || lv.cols() != 1) {
    throw ShapeError("backward: loss must be (1x1), got " + lv.shape_str());
  }
  for (auto& n : nodes_) {
    if (n.param == nullptr) n.grad = Matrix();
  }
  if (!nodes_[loss.id()].needs_grad) return;
  if (nodes_[loss.id()].param != nullptr) {
    nodes_[loss.id()].param->grad[0] += 1.0;
    return;
  }
  nodes_[loss.id()].grad = Matrix(1, 1, 1.0);
  for (std::uint32_t id = loss.id() + 1; id-- > 0;) {
    const Node& n = nodes_[id];
    if (!n.needs_grad || n.param != nullptr || n.grad.empty()) continue;
    propagate(id);
  }
}

void Tape::propagate(std::uint32_t id) {
  // Parents always precede children, so references into nodes_ stay valid
  // here: nothing is pushed during backward.
  const Node& n = nodes_[id];
  const Matrix& g = n.grad;
  const Matrix& y = n.value;
  auto parent_needs = [&](std::size_t k) { return nodes_[n.parents[k]].needs_grad; };
  auto pval = [&](std::size_t k) -> const Matrix& { return nodes_[n.parents[k]].val(); };
  auto pgrad = [&](std::size_t k) -> Matrix& { return grad_slot(*this, n.parents[k]); };

  switch (n.op) {
    case Op::Constant:
    case Op::Param:
      break;
    case Op::MatMul:
      if (parent_needs(0)) matmul_bt_acc(g, pval(1), pgrad(0));
      if (parent_needs(1)) matmul_at_acc(pval(0), g, pgrad(1));
      break;
    case Op::Add:
    case Op::Sub: {
      const double sign_b = n.op == Op::Add ? 1.0 : -1.0;
      if (parent_needs(0)) {
        Matrix& ga = pgrad(0);
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
      }
      if (parent_needs(1)) {
        Matrix& gb = pgrad(1);
        for (std::size_t i = 0; i < g.size(); ++i) gb[i] += sign_b * g[i];
      }
      break;
    }
    case Op::Hadamard: {
      if (parent_needs(0)) {
        Matrix& ga = pgrad(0);
        const Matrix& b = pval(1);
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * b[i];
      }
      if (parent_needs(1)) {
        Matrix& gb = pgrad(1);
        const Matrix& a = pval(0);
        for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * a[i];
      }
      break;
    }
    case Op::Scale: {
      Matrix& ga = pgrad(0);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += n.scalar * g[i];
      break;
    }
    case Op::Sigmoid: {
      Matrix& ga = pgrad(0);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * y[i] * (1.0 - y[i]);
      break;
    }
    case Op::Tanh: {
      Matrix& ga = pgrad(0);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * (1.0 - y[i] * y[i]);
      break;
    }
    case Op::OneMinus: {
      Matrix& ga = pgrad(0);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] -= g[i];
      break;
    }
    case Op::AddBias: {
      if (parent_needs(0)) {
        Matrix& ga = pgrad(0);
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
      }
      if (parent_needs(1)) {
        Matrix& gb = pgrad(1);
        for (std::size_t r = 0; r < g.rows(); ++r) {
          auto row = g.row(r);
          for (std::size_t c = 0; c < g.cols(); ++c) gb[c] += row[c];
        }
      }
      break;
    }
    case Op::SoftmaxRows:
    case Op::MaskedSoftmaxRows: {
      // dx = y ⊙ (g - <g, y>); excluded entries have y = 0 and get nothing.
      Matrix& ga = pgrad(0);
      for (std::size_t r = 0; r < g.rows(); ++r) {
        auto yr = y.row(r);
        auto gr = g.row(r);
        double dot = 0.0;
        for (std::size_t c = 0; c < g.cols(); ++c) dot += gr[c] * yr[c];
        auto out = ga.row(r);
        for (std::size_t c = 0; c < g.cols(); ++c) out[c] += yr[c] * (gr[c] - dot);
      }
      break;
    }
    case Op::HConcat: {
      std::size_t offset = 0;
      for (std::size_t k = 0; k < n.parents.size(); ++k) {
        const std::size_t w = pval(k).cols();
        if (parent_needs(k)) {
          Matrix& gk = pgrad(k);
          for (std::size_t r = 0; r < g.rows(); ++r) {
            for (std::size_t c = 0; c < w; ++c) gk(r, c) += g(r, offset + c);
          }
        }
        offset += w;
      }
      break;
    }
    case Op::StackRows: {
      std::size_t offset = 0;
      for (std::size_t k = 0; k < n.parents.size(); ++k) {
        const std::size_t h = pval(k).rows();
        if (parent_needs(k)) {
          Matrix& gk = pgrad(k);
          for (std::size_t i = 0; i < h * g.cols(); ++i) gk[i] += g[offset * g.cols() + i];
        }
        offset += h;
      }
      break;
    }
    case Op::SliceCols: {
      Matrix& ga = pgrad(0);
      const auto start = static_cast<std::size_t>(n.index[0]);
      for (std::size_t r = 0; r < g.rows(); ++r) {
        for (std::size_t c = 0; c < g.cols(); ++c) ga(r, start + c) += g(r, c);
      }
      break;
    }
    case Op::GatherRows: {
      Matrix& ga = pgrad(0);
      for (std::size_t r = 0; r < g.rows(); ++r) {
        if (n.index[r] < 0) continue;
        auto dst = ga.row(static_cast<std::size_t>(n.index[r]));
        auto src = g.row(r);
        for (std::size_t c = 0; c < g.cols(); ++c) dst[c] += src[c];
      }
      break;
    }
    case Op::MulCol: {
      const Matrix& a = pval(0);
      const Matrix& c = pval(1);
      if (parent_needs(0)) {
        Matrix& ga = pgrad(0);
        for (std::size_t r = 0; r < g.rows(); ++r) {
          for (std::size_t j = 0; j < g.cols(); ++j) ga(r, j) += g(r, j) * c[r];
        }
      }
      if (parent_needs(1)) {
        Matrix& gc = pgrad(1);
        for (std::size_t r = 0; r < g.rows(); ++r) {
          double s = 0.0;
          for (std::size_t j = 0; j < g.cols(); ++j) s += g(r, j) * a(r, j);
          gc[r] += s;
        }
      }
      break;
    }
    case Op::SelectRows: {
      for (std::size_t k = 0; k < 2; ++k) {
        if (!parent_needs(k)) continue;
        Matrix& gk = pgrad(k);
        for (std::size_t r = 0; r < g.rows(); ++r) {
          const bool from_a = n.aux[r] != 0.0;
          if (from_a != (k == 0)) continue;
          auto dst = gk.row(r);
          auto src = g.row(r);
          for (std::size_t c = 0; c < g.cols(); ++c) dst[c] += src[c];
        }
      }
      break;
    }
    case Op::SumAll: {
      Matrix& ga = pgrad(0);
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[0];
      break;
    }
    case Op::LogLikelihood: {
      Matrix& ga = pgrad(0);
      const Matrix& p = pval(0);
      for (std::size_t r = 0; r < p.rows(); ++r) {
        if (n.index[r] < 0) continue;
        const auto t = static_cast<std::size_t>(n.index[r]);
        const double pr = p(r, t);
        if (pr > kLogEpsilon) ga(r, t) += g[0] * n.aux[r] / pr;
      }
      break;
    }
  }
}

// ---- Ops ---------------------------------------------------------------------

Var matmul(Var a, Var b) {
  Tape& t = tape_of(a, b);
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  if (av.cols() != bv.rows()) shape_fail("matmul", av, bv);
  Matrix out(av.rows(), bv.cols());
  matmul_into(av, bv, out);
  return t.push(make_node(Op::MatMul, std::move(out), {a, b}, t));
}

namespace {

template <typename F>
Var binary_elementwise(Op op, const char* name, Var a, Var b, F f) {
  Tape& t = tape_of(a, b);
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  if (!av.same_shape(bv)) shape_fail(name, av, bv);
  Matrix out(av.rows(), av.cols());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(av[i], bv[i]);
  return t.push(make_node(op, std::move(out), {a, b}, t));
}

template <typename F>
Var unary_elementwise(Op op, Var a, F f) {
  Tape& t = tape_of(a);
  const Matrix& av = a.value();
  Matrix out(av.rows(), av.cols());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(av[i]);
  return t.push(make_node(op, std::move(out), {a}, t));
}

}  // namespace

Var add(Var a, Var b) {
  return binary_elementwise(Op::Add, "add", a, b, [](double x, double y) { return x + y; });
}

Var sub(Var a, Var b) {
  return binary_elementwise(Op::Sub, "sub", a, b, [](double x, double y) { return x - y; });
}

Var hadamard(Var a, Var b) {
  return binary_elementwise(Op::Hadamard, "hadamard", a, b,
                            [](double x, double y) { return x * y; });
}

Var scale(Var a, double s) {
  Var v = unary_elementwise(Op::Scale, a, [s](double x) { return s * x; });
  v.tape()->node_mut(v.id()).scalar = s;
  return v;
}

Var sigmoid(Var a) {
  return unary_elementwise(Op::Sigmoid, a, [](double x) {
    // Split by sign so exp never overflows.
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
  });
}

Var tanh(Var a) {
  return unary_elementwise(Op::Tanh, a, [](double x) { return std::tanh(x); });
}

Var one_minus(Var a) {
  return unary_elementwise(Op::OneMinus, a, [](double x) { return 1.0 - x; });
}

Var add_bias(Var a, Var b) {
  Tape& t = tape_of(a, b);
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  if (bv.rows() != 1 || bv.cols() != av.cols()) shape_fail("add_bias", av, bv);
  Matrix out = av;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    for (std::size_t c = 0; c < out.cols(); ++c) row[c] += bv[c];
  }
  return t.push(make_node(Op::AddBias, std::move(out), {a, b}, t));
}

Var softmax_rows(Var a) {
  Tape& t = tape_of(a);
  const Matrix& av = a.value();
  if (av.cols() == 0) throw ShapeError("softmax: need at least one column, got " + av.shape_str());
  Matrix out(av.rows(), av.cols());
  for (std::size_t r = 0; r < av.rows(); ++r) softmax_row_into(av.row(r), out.row(r), nullptr);
  return t.push(make_node(Op::SoftmaxRows, std::move(out), {a}, t));
}

Var softmax_row(Var a) {
  if (a.rows() != 1) throw ShapeError("softmax_row: expected a row vector, got " + a.value().shape_str());
  return softmax_rows(a);
}

Var masked_softmax_rows(Var a, std::span<const std::uint8_t> keep) {
  Tape& t = tape_of(a);
  const Matrix& av = a.value();
  if (av.cols() == 0) throw ShapeError("masked_softmax: need at least one column, got " + av.shape_str());
  if (keep.size() != av.size()) {
    throw ShapeError("masked_softmax: mask has " + std::to_string(keep.size()) +
                     " entries for scores " + av.shape_str());
  }
  Matrix out(av.rows(), av.cols());
  for (std::size_t r = 0; r < av.rows(); ++r) {
    softmax_row_into(av.row(r), out.row(r), keep.data() + r * av.cols());
  }
  return t.push(make_node(Op::MaskedSoftmaxRows, std::move(out), {a}, t));
}

Var masked_softmax(Var a, std::span<const std::uint8_t> keep) {
  if (a.rows() != 1) throw ShapeError("masked_softmax: expected a row vector, got " + a.value().shape_str());
  return masked_softmax_rows(a, keep);
}

Var concat(Var a, Var b) {
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  if (av.rows() != 1 || bv.rows() != 1 || av.cols() == 0 || bv.cols() == 0) {
    shape_fail("concat (non-empty row vectors required)", av, bv);
  }
  const Var parts[] = {a, b};
  return hconcat(parts);
}

Var hconcat(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("hconcat: no operands");
  Tape& t = tape_of(parts[0]);
  const std::size_t rows = parts[0].rows();
  std::size_t cols = 0;
  Node n;
  n.op = Op::HConcat;
  for (Var p : parts) {
    if (p.tape() != &t) throw ContractError("operands live on different tapes");
    if (p.rows() != rows) shape_fail("hconcat", parts[0].value(), p.value());
    cols += p.cols();
    n.parents.push_back(p.id());
    n.needs_grad = n.needs_grad || needs(t, p);
  }
  Matrix out(rows, cols);
  std::size_t offset = 0;
  for (Var p : parts) {
    const Matrix& pv = p.value();
    for (std::size_t r = 0; r < rows; ++r) {
      std::copy(pv.row(r).begin(), pv.row(r).end(), out.row(r).begin() + offset);
    }
    offset += pv.cols();
  }
  n.value = std::move(out);
  return t.push(std::move(n));
}

Var stack_rows(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("stack_rows: no operands");
  Tape& t = tape_of(parts[0]);
  const std::size_t cols = parts[0].cols();
  std::size_t rows = 0;
  Node n;
  n.op = Op::StackRows;
  for (Var p : parts) {
    if (p.tape() != &t) throw ContractError("operands live on different tapes");
    if (p.cols() != cols) shape_fail("stack_rows", parts[0].value(), p.value());
    rows += p.rows();
    n.parents.push_back(p.id());
    n.needs_grad = n.needs_grad || needs(t, p);
  }
  std::vector<double> data;
  data.reserve(rows * cols);
  for (Var p : parts) {
    const auto vals = p.value().values();
    data.insert(data.end(), vals.begin(), vals.end());
  }
  n.value = Matrix(rows, cols, std::move(data));
  return t.push(std::move(n));
}

Var slice_cols(Var a, std::size_t start, std::size_t width) {
  Tape& t = tape_of(a);
  const Matrix& av = a.value();
  if (width == 0 || start + width > av.cols()) {
    throw ShapeError("slice_cols: columns [" + std::to_string(start) + ", " +
                     std::to_string(start + width) + ") out of range for " + av.shape_str());
  }
  Matrix out(av.rows(), width);
  for (std::size_t r = 0; r < av.rows(); ++r) {
    auto src = av.row(r).subspan(start, width);
    std::copy(src.begin(), src.end(), out.row(r).begin());
  }
  Node n = make_node(Op::SliceCols, std::move(out), {a}, t);
  n.index = {static_cast<std::int64_t>(start)};
  return t.push(std::move(n));
}

Var gather_rows(Var table, std::span<const std::int64_t> idx) {
  Tape& t = tape_of(table);
  const Matrix& tv = table.value();
  Matrix out(idx.size(), tv.cols());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    if (idx[r] < 0) continue;
    if (static_cast<std::size_t>(idx[r]) >= tv.rows()) {
      throw ShapeError("gather_rows: row " + std::to_string(idx[r]) + " out of range for " +
                       tv.shape_str());
    }
    auto src = tv.row(static_cast<std::size_t>(idx[r]));
    std::copy(src.begin(), src.end(), out.row(r).begin());
  }
  Node n = make_node(Op::GatherRows, std::move(out), {table}, t);
  n.index.assign(idx.begin(), idx.end());
  return t.push(std::move(n));
}

Var mul_col(Var a, Var c) {
  Tape& t = tape_of(a, c);
  const Matrix& av = a.value();
  const Matrix& cv = c.value();
  if (cv.cols() != 1 || cv.rows() != av.rows()) shape_fail("mul_col", av, cv);
  Matrix out = av;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    for (double& x : out.row(r)) x *= cv[r];
  }
  return t.push(make_node(Op::MulCol, std::move(out), {a, c}, t));
}

Var select_rows(std::span<const std::uint8_t> keep, Var a, Var b) {
  Tape& t = tape_of(a, b);
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  if (!av.same_shape(bv)) shape_fail("select_rows", av, bv);
  if (keep.size() != av.rows()) {
    throw ShapeError("select_rows: mask has " + std::to_string(keep.size()) + " entries for " +
                     av.shape_str());
  }
  Matrix out(av.rows(), av.cols());
  Node n;
  n.aux.resize(keep.size());
  for (std::size_t r = 0; r < av.rows(); ++r) {
    const Matrix& src = keep[r] != 0 ? av : bv;
    std::copy(src.row(r).begin(), src.row(r).end(), out.row(r).begin());
    n.aux[r] = keep[r] != 0 ? 1.0 : 0.0;
  }
  Node made = make_node(Op::SelectRows, std::move(out), {a, b}, t);
  made.aux = std::move(n.aux);
  return t.push(std::move(made));
}

Var sum_all(Var a) {
  Tape& t = tape_of(a);
  double s = 0.0;
  for (double x : a.value().values()) s += x;
  return t.push(make_node(Op::SumAll, Matrix(1, 1, s), {a}, t));
}

Var log_likelihood(Var probs, std::span<const std::int64_t> targets,
                   std::span<const double> weights) {
  Tape& t = tape_of(probs);
  const Matrix& pv = probs.value();
  if (targets.size() != pv.rows() || weights.size() != pv.rows()) {
    throw ShapeError("log_likelihood: " + std::to_string(targets.size()) + " targets and " +
                     std::to_string(weights.size()) + " weights for probabilities " +
                     pv.shape_str());
  }
  double s = 0.0;
  for (std::size_t r = 0; r < pv.rows(); ++r) {
    if (targets[r] < 0) continue;
    if (static_cast<std::size_t>(targets[r]) >= pv.cols()) {
      throw ShapeError("log_likelihood: target " + std::to_string(targets[r]) +
                       " out of range for " + pv.shape_str());
    }
    s += weights[r] * std::log(std::max(pv(r, static_cast<std::size_t>(targets[r])), kLogEpsilon));
  }
  Node n = make_node(Op::LogLikelihood, Matrix(1, 1, s), {probs}, t);
  n.index.assign(targets.begin(), targets.end());
  n.aux.assign(weights.begin(), weights.end());
  return t.push(std::move(n));
}

}  // namespace stman::num

#include "stman/numerics/matrix.hpp"

#include <cmath>

#include "stman/errors.hpp"

namespace stman::num {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw ShapeError("matrix data length " + std::to_string(data_.size()) +
                     " does not match shape " + num::shape_str(rows, cols));
  }
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  std::vector<double> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw ShapeError("ragged rows in Matrix::from_rows");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Matrix(r, c, std::move(data));
}

Matrix Matrix::row_vector(std::span<const double> values) {
  return Matrix(1, values.size(), std::vector<double>(values.begin(), values.end()));
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

std::string shape_str(std::size_t rows, std::size_t cols) {
  return "(" + std::to_string(rows) + "x" + std::to_string(cols) + ")";
}

std::string Matrix::shape_str() const { return num::shape_str(rows_, cols_); }

void Matrix::fill(double v) {
  for (auto& x : data_) x = v;
}

bool Matrix::all_finite() const {
  for (double x : data_) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

void matmul_into(const Matrix& a, const Matrix& b, Matrix& out) {
  const std::size_t m = a.rows(), n = a.cols(), p = b.cols();
  out.fill(0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a.values().data() + i * n;
    double* orow = out.values().data() + i * p;
    for (std::size_t k = 0; k < n; ++k) {
      const double aik = arow[k];
      if (aik == 0.0) continue;
      const double* brow = b.values().data() + k * p;
      for (std::size_t j = 0; j < p; ++j) orow[j] += aik * brow[j];
    }
  }
}

void matmul_bt_acc(const Matrix& a, const Matrix& b, Matrix& out) {
  // a: m×p, b: n×p, out: m×n. Row-axpy over a transposed copy of b keeps
  // the inner loop contiguous.
  const std::size_t m = a.rows(), p = a.cols(), n = b.rows();
  std::vector<double> bt(p * n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < p; ++k) bt[k * n + j] = b.values()[j * p + k];
  }
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a.values().data() + i * p;
    double* orow = out.values().data() + i * n;
    for (std::size_t k = 0; k < p; ++k) {
      const double aik = arow[k];
      if (aik == 0.0) continue;
      const double* btrow = bt.data() + k * n;
      for (std::size_t j = 0; j < n; ++j) orow[j] += aik * btrow[j];
    }
  }
}

void matmul_at_acc(const Matrix& a, const Matrix& b, Matrix& out) {
  // a: m×n, b: m×p, out: n×p
  const std::size_t m = a.rows(), n = a.cols(), p = b.cols();
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a.values().data() + i * n;
    const double* brow = b.values().data() + i * p;
    for (std::size_t k = 0; k < n; ++k) {
      const double aik = arow[k];
      if (aik == 0.0) continue;
      double* orow = out.values().data() + k * p;
      for (std::size_t j = 0; j < p; ++j) orow[j] += aik * brow[j];
    }
  }
}

}  // namespace stman::num

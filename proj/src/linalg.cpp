#include "raketree/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include "raketree/errors.hpp"

namespace raketree {

namespace {

void require(bool ok, const char* what, std::size_t a, std::size_t b) {
  if (!ok) {
    throw DimensionError(std::string(what) + ": " + std::to_string(a) + " vs " +
                         std::to_string(b));
  }
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  require(data_.size() == rows_ * cols_, "matrix data size", data_.size(), rows_ * cols_);
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

double Matrix::max_entry() const {
  double best = 0.0;
  for (double x : data_) best = std::max(best, x);
  return best;
}

bool Matrix::bitwise_equal(const Matrix& other) const {
  return rows_ == other.rows_ && cols_ == other.cols_ &&
         (data_.empty() ||
          std::memcmp(data_.data(), other.data_.data(), data_.size() * sizeof(double)) == 0);
}

Vector ones(std::size_t n) { return Vector(n, 1.0); }

Vector indicator(std::size_t n, std::size_t position) {
  if (position >= n) throw DimensionError("indicator position out of range");
  Vector v(n, 0.0);
  v[position] = 1.0;
  return v;
}

Vector hadamard(std::span<const double> u, std::span<const double> v) {
  require(u.size() == v.size(), "hadamard length mismatch", u.size(), v.size());
  Vector out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = u[i] * v[i];
  return out;
}

void hadamard_inplace(Vector& u, std::span<const double> v) {
  require(u.size() == v.size(), "hadamard length mismatch", u.size(), v.size());
  for (std::size_t i = 0; i < u.size(); ++i) u[i] *= v[i];
}

Vector apply(const Matrix& m, std::span<const double> v, OpCounts* counts) {
  require(m.cols() == v.size(), "apply dimension mismatch", m.cols(), v.size());
  Vector out(m.rows(), 0.0);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    double acc = 0.0;
    for (std::size_t c = 0; c < row.size(); ++c) acc += row[c] * v[c];
    out[r] = acc;
  }
  if (counts) {
    ++counts->mat_vec;
    counts->flops += m.rows() * m.cols();
  }
  return out;
}

Vector apply_transposed(const Matrix& m, std::span<const double> v, OpCounts* counts) {
  require(m.rows() == v.size(), "apply_transposed dimension mismatch", m.rows(), v.size());
  Vector out(m.cols(), 0.0);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    const double s = v[r];
    for (std::size_t c = 0; c < row.size(); ++c) out[c] += row[c] * s;
  }
  if (counts) {
    ++counts->mat_vec;
    counts->flops += m.rows() * m.cols();
  }
  return out;
}

Matrix matmul(const Matrix& a, const Matrix& b, OpCounts* counts) {
  require(a.cols() == b.rows(), "matmul inner dimension mismatch", a.cols(), b.rows());
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t l = 0; l < a.cols(); ++l) {
      const double s = a(i, l);
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += s * b(l, j);
    }
  }
  if (counts) {
    ++counts->mat_mat;
    counts->flops += a.rows() * a.cols() * b.cols();
  }
  return out;
}

Matrix transpose(const Matrix& m) {
  Matrix out(m.cols(), m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) out(c, r) = m(r, c);
  return out;
}

Matrix diag(std::span<const double> v) {
  Matrix out(v.size(), v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out(i, i) = v[i];
  return out;
}

Matrix scale_columns(const Matrix& m, std::span<const double> v, OpCounts* counts) {
  require(m.cols() == v.size(), "scale_columns dimension mismatch", m.cols(), v.size());
  Matrix out = m;
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) out(r, c) *= v[c];
  if (counts) counts->flops += m.rows() * m.cols();
  return out;
}

Vector normalize(std::span<const double> v) {
  double sum = 0.0;
  for (double x : v) sum += x;
  if (!(sum > 0.0) || !std::isfinite(sum)) {
    throw InconsistentEvidence("inconsistent evidence: normalizing sum is zero");
  }
  Vector out(v.begin(), v.end());
  for (double& x : out) x /= sum;
  return out;
}

void rescale_if_tiny(Vector& v) {
  double best = 0.0;
  for (double x : v) best = std::max(best, x);
  if (best > 0.0 && best < kUnderflowThreshold) {
    for (double& x : v) x /= best;
  }
}

void rescale_if_tiny(Matrix& m) {
  const double best = m.max_entry();
  if (best > 0.0 && best < kUnderflowThreshold) {
    for (double& x : m.data()) x /= best;
  }
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), "max_abs_diff length mismatch", a.size(), b.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

}  // namespace raketree

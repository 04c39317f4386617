#pragma once

// Small dense kernels shared by every inference engine. Vectors hold
// likelihoods (lambda, pi) or beliefs; matrices are row-major with entry
// (x, y) = Pr(child = y | parent = x) for level-0 edge matrices.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace raketree {

using Vector = std::vector<double>;

// Instrumented operation counts. Every engine reports these; the complexity
// claims are checked against them rather than against wall time.
struct OpCounts {
  std::uint64_t mat_vec = 0;
  std::uint64_t mat_mat = 0;
  std::uint64_t flops = 0;  // multiply-adds

  OpCounts& operator+=(const OpCounts& other) {
    mat_vec += other.mat_vec;
    mat_mat += other.mat_mat;
    flops += other.flops;
    return *this;
  }
  std::uint64_t matrix_ops() const { return mat_vec + mat_mat; }
};

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }
  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  double max_entry() const;

  // Exact equality of the stored doubles, including their bit patterns.
  bool bitwise_equal(const Matrix& other) const;

  friend bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Vector ones(std::size_t n);
Vector indicator(std::size_t n, std::size_t position);

// Component-wise product.
Vector hadamard(std::span<const double> u, std::span<const double> v);
void hadamard_inplace(Vector& u, std::span<const double> v);

// result[x] = sum_y m(x, y) * v[y]
Vector apply(const Matrix& m, std::span<const double> v, OpCounts* counts = nullptr);
// result[y] = sum_x m(x, y) * v[x], i.e. m^T v without forming the transpose.
Vector apply_transposed(const Matrix& m, std::span<const double> v,
                        OpCounts* counts = nullptr);

// Naive cubic product.
Matrix matmul(const Matrix& a, const Matrix& b, OpCounts* counts = nullptr);
Matrix transpose(const Matrix& m);
Matrix diag(std::span<const double> v);
// m * diag(v), computed by scaling columns.
Matrix scale_columns(const Matrix& m, std::span<const double> v,
                     OpCounts* counts = nullptr);

// v / sum(v). Throws InconsistentEvidence when the sum is zero (or not finite).
Vector normalize(std::span<const double> v);

// Underflow guard: when the largest entry is positive but below 1e-100 the
// values are rescaled so that the largest entry becomes 1. Beliefs are
// invariant under positive scaling of lambda and pi.
inline constexpr double kUnderflowThreshold = 1e-100;
void rescale_if_tiny(Vector& v);
void rescale_if_tiny(Matrix& m);

double max_abs_diff(std::span<const double> a, std::span<const double> b);

}  // namespace raketree

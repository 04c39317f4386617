#include "doctest.h"

#include "fixtures.hpp"
#include "raketree/errors.hpp"
#include "raketree/linalg.hpp"

using namespace raketree;
using raketree::testing::loop_apply;
using raketree::testing::loop_matmul;
using raketree::testing::rows_of;

TEST_SUITE("linalg") {
  TEST_CASE("hadamard identities") {
    CHECK(hadamard(Vector{1, 1}, Vector{0.3, 0.7}) == Vector{0.3, 0.7});
    CHECK(hadamard(Vector{0, 0}, Vector{0.3, 0.7}) == Vector{0, 0});
    CHECK(hadamard(Vector{0.9, 0.2}, Vector{1, 1}) == Vector{0.9, 0.2});
    CHECK_THROWS_AS(hadamard(Vector{1, 2}, Vector{1}), DimensionError);
  }

  TEST_CASE("apply against a scalar-loop oracle") {
    const Matrix m(2, 2, {0.9, 0.1, 0.2, 0.8});
    const Vector v{1, 0};
    const auto expected = loop_apply(rows_of(m), v);
    CHECK(expected == std::vector<double>{0.9, 0.2});
    CHECK(raketree::apply(m, v) == expected);

    CHECK(raketree::apply(Matrix::identity(3), Vector{0.1, 0.5, 0.2}) == Vector{0.1, 0.5, 0.2});
    Rng rng(1);
    const Matrix s = random_stochastic(4, 4, rng);
    for (double x : raketree::apply(s, ones(4))) CHECK(x == doctest::Approx(1.0).epsilon(1e-14));
    CHECK_THROWS_AS(raketree::apply(m, Vector{1, 2, 3}), DimensionError);
  }

  TEST_CASE("matmul against a scalar-loop oracle") {
    const Matrix a(2, 2, {1, 2, 3, 4});
    const Matrix b(2, 2, {0, 1, 1, 0});
    const auto expected = loop_matmul(rows_of(a), rows_of(b));
    CHECK(expected == testing::Rows{{2, 1}, {4, 3}});
    CHECK(rows_of(matmul(a, b)) == expected);
    CHECK(matmul(a, Matrix::identity(2)) == a);
    CHECK(matmul(Matrix::identity(2), a) == a);
    CHECK_THROWS_AS(matmul(a, Matrix(3, 2)), DimensionError);
  }

  TEST_CASE("diag lifts vectors") {
    CHECK(diag(Vector{1, 1}) == Matrix::identity(2));
    CHECK(diag(Vector{0, 0}) == Matrix(2, 2));
    Rng rng(7);
    for (int trial = 0; trial < 50; ++trial) {
      Vector v(3), w(3);
      for (auto& x : v) x = uniform01(rng);
      for (auto& x : w) x = uniform01(rng);
      CHECK(max_abs_diff(raketree::apply(diag(v), w), hadamard(v, w)) <= 1e-15);
    }
  }

  TEST_CASE("normalize") {
    const Vector b = normalize(Vector{0.45, 0.1});
    CHECK(b[0] == doctest::Approx(9.0 / 11).epsilon(1e-15));
    CHECK(b[1] == doctest::Approx(2.0 / 11).epsilon(1e-15));
    const Vector u = normalize(Vector{1, 1, 1});
    for (double x : u) CHECK(x == doctest::Approx(1.0 / 3).epsilon(1e-15));
    CHECK_THROWS_AS(normalize(Vector{0, 0}), InconsistentEvidence);
  }

  TEST_CASE("algebraic properties on random inputs") {
    Rng rng(11);
    for (int trial = 0; trial < 200; ++trial) {
      const std::size_t k = 2 + uniform_index(rng, 4);
      Vector u(k), v(k), w(k);
      for (std::size_t i = 0; i < k; ++i) {
        u[i] = uniform01(rng);
        v[i] = uniform01(rng);
        w[i] = uniform01(rng);
      }
      CHECK(max_abs_diff(hadamard(u, v), hadamard(v, u)) <= 1e-12);
      CHECK(max_abs_diff(hadamard(hadamard(u, v), w), hadamard(u, hadamard(v, w))) <= 1e-12);

      const Matrix m = random_stochastic(k, k, rng);
      CHECK(max_abs_diff(raketree::apply(matmul(diag(u), m), v), hadamard(u, raketree::apply(m, v))) <= 1e-12);

      const Matrix a = random_stochastic(k, k, rng), b = random_stochastic(k, k, rng),
                   c = random_stochastic(k, k, rng);
      const Matrix left = matmul(matmul(a, b), c), right = matmul(a, matmul(b, c));
      for (std::size_t i = 0; i < left.data().size(); ++i)
        CHECK(std::abs(left.data()[i] - right.data()[i]) <= 1e-9 * std::abs(left.data()[i]) + 1e-300);

      double sum = 0;
      for (double x : normalize(u)) sum += x;
      CHECK(std::abs(sum - 1.0) <= 1e-12);
    }
  }

  TEST_CASE("apply_transposed matches the materialized transpose") {
    Rng rng(3);
    const Matrix m = random_stochastic(3, 5, rng);
    const Vector v{0.2, 0.5, 0.9};
    CHECK(max_abs_diff(apply_transposed(m, v), raketree::apply(transpose(m), v)) <= 1e-15);
  }

  TEST_CASE("underflow guard rescales tiny values only") {
    Vector tiny{1e-120, 3e-120};
    rescale_if_tiny(tiny);
    CHECK(tiny[1] == 1.0);
    CHECK(tiny[0] == doctest::Approx(1.0 / 3));
    Vector zero{0, 0};
    rescale_if_tiny(zero);
    CHECK(zero == Vector{0, 0});
    Vector fine{1e-50, 1};
    rescale_if_tiny(fine);
    CHECK(fine == Vector{1e-50, 1});
  }

  TEST_CASE("operation counters") {
    OpCounts c;
    raketree::apply(Matrix::identity(3), ones(3), &c);
    matmul(Matrix(2, 3), Matrix(3, 4), &c);
    CHECK(c.mat_vec == 1);
    CHECK(c.mat_mat == 1);
    CHECK(c.flops == 9 + 24);
  }
}

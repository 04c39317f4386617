#pragma once

// Seeded random model generators used by the benchmark harness and the
// randomized test suites.

#include <cstddef>
#include <random>
#include <string>

#include "raketree/jointree.hpp"
#include "raketree/linalg.hpp"
#include "raketree/polytree.hpp"
#include "raketree/tree.hpp"

namespace raketree {

using Rng = std::mt19937_64;

double uniform01(Rng& rng);
std::size_t uniform_index(Rng& rng, std::size_t n);  // in [0, n)

// Row-stochastic k x k matrix. With zero_probability > 0 individual entries
// are forced to zero (each row keeps at least one positive entry).
Matrix random_stochastic(std::size_t rows, std::size_t cols, Rng& rng, double zero_probability = 0.0);
Vector random_distribution(std::size_t k, Rng& rng);
// Indicator, vacuous, or soft likelihood, chosen at random.
Vector random_likelihood(std::size_t k, Rng& rng);

enum class Shape { Chain, Balanced, Random };
Shape parse_shape(const std::string& name);
std::string shape_name(Shape shape);

// All generators return binary complete trees with `internal` internal nodes
// and internal + 1 leaves, random matrices and a random prior, no evidence.
// chain: x1(e1, x2(e2, ... x_L(e_L, e_{L+1}))).
CausalTree chain_tree(std::size_t internal, std::size_t k, Rng& rng);
CausalTree balanced_tree(std::size_t internal, std::size_t k, Rng& rng);
CausalTree random_binary_tree(std::size_t internal, std::size_t k, Rng& rng);
CausalTree make_tree(Shape shape, std::size_t internal, std::size_t k, Rng& rng);

// Arbitrary fan-out rooted tree with `nodes` nodes (not normalized).
CausalTree random_raw_tree(std::size_t nodes, std::size_t k, Rng& rng, std::size_t max_fanout = 4);

// Random join tree of `cliques` cliques of n variables each; every child
// shares exactly c variables with its parent and its table is consistent with
// the separator value. Every variable gets an evidence leaf at its home clique.
JoinTree random_join_tree(std::size_t cliques, std::size_t k, std::size_t n, std::size_t c, Rng& rng);

// Random polytree: a random skeleton tree with random edge directions,
// in-degree capped at max_parents.
Polytree random_polytree(std::size_t vars, std::size_t k, std::size_t max_parents, Rng& rng,
                         double zero_probability = 0.0);
// Chain of families: v_i has parents v_{i-1} plus (p - 1) parentless inputs.
Polytree family_chain(std::size_t families, std::size_t k, std::size_t p, Rng& rng);

}  // namespace raketree

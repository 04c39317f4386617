#pragma once

// Shared fixtures and independent oracles for the test suites. Nothing in
// here calls into the engine paths it is used to check.

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "raketree/contract.hpp"
#include "raketree/generate.hpp"
#include "raketree/linalg.hpp"
#include "raketree/polytree.hpp"
#include "raketree/tree.hpp"

namespace raketree::testing {

// Scalar-loop reference kernels over nested vectors.
using Rows = std::vector<std::vector<double>>;
std::vector<double> loop_apply(const Rows& m, const std::vector<double>& v);
Rows loop_matmul(const Rows& a, const Rows& b);
Rows rows_of(const Matrix& m);

// root (prior .5/.5) with children Y, Z.
// M_Y = [[.9,.1],[.2,.8]], M_Z = [[.7,.3],[.4,.6]], lambda(Y) = (1,0).
struct ThreeNode {
  CausalTree tree{2};
  NodeIndex root, y, z;
};
ThreeNode three_node_tree();

// The length-4 chain x1(e1, x2(e2, x3(e3, x4(e4, e5)))) with random matrices.
struct Chain4 {
  CausalTree tree{2};
  std::map<std::string, NodeIndex> at;
};
Chain4 chain4(std::uint64_t seed);

NodeIndex by_name(const CausalTree& tree, const std::string& name);

// The level-i tree of a dense hierarchy as a causal tree (level-i matrices,
// current leaf likelihoods), so the plain recursions can be run on it.
CausalTree level_tree(const CausalTree& t0, const DenseHierarchy& h, std::size_t level);

// Random evidence on every non-dummy leaf.
void randomize_evidence(CausalTree& tree, Rng& rng);
std::vector<NodeIndex> updatable_leaves(const CausalTree& tree);

// Conditional marginals of every polytree variable (indexed like
// variables()) by enumerating the product of CPTs times the likelihoods.
// Empty when the evidence has zero probability.
std::vector<Vector> polytree_brute_force(const Polytree& pt, const std::map<VarId, Vector>& evidence);

double max_diff(const std::vector<Vector>& a, const std::vector<Vector>& b);

}  // namespace raketree::testing

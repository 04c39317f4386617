#pragma once

// Linear-time and brute-force engines. They serve as baselines for the
// benchmark and as oracles for the hierarchy engine. All of them accept
// arbitrary fan-out; evidence on an internal node acts as a local likelihood.

#include <cstdint>
#include <vector>

#include "raketree/linalg.hpp"
#include "raketree/tree.hpp"

namespace raketree {

struct Propagation {
  std::vector<Vector> lambda;  // per node index
  std::vector<Vector> pi;
  std::vector<Vector> belief;
};

// Two passes: lambda leaves-up, pi root-down. Exactly one matrix-vector
// product per edge per direction.
Propagation full_propagation(const CausalTree& tree, OpCounts* counts = nullptr);
std::vector<Vector> propagate_all(const CausalTree& tree, OpCounts* counts = nullptr);

// Enumerates every joint assignment. Definitionally correct, exponential.
inline constexpr std::uint64_t kDefaultMaxStates = 10'000'000;
std::vector<Vector> joint_marginals(const CausalTree& tree, std::uint64_t max_states = kDefaultMaxStates);

struct PathQueryCost {
  OpCounts ops;
  std::size_t pi_recomputations = 0;
};

// Depth-bounded engine: keeps every lambda current, recomputes pi on demand
// along the root path of the queried node. Update and query cost O(k^2 D).
class PathEngine {
 public:
  explicit PathEngine(CausalTree tree);

  // Recomputes lambda on the root path of `leaf` only.
  void update(NodeIndex leaf, Vector likelihood);
  Vector query(NodeIndex x, PathQueryCost* cost = nullptr) const;

  const CausalTree& tree() const { return tree_; }
  const Vector& lambda(NodeIndex x) const { return lambda_.at(x); }
  std::uint64_t lambda_recomputations() const { return lambda_recomputations_; }
  const OpCounts& update_counts() const { return update_counts_; }

 private:
  void recompute_lambda(NodeIndex x, OpCounts* counts);

  CausalTree tree_;
  std::vector<Vector> lambda_;
  std::uint64_t lambda_recomputations_ = 0;
  OpCounts update_counts_;
};

}  // namespace raketree

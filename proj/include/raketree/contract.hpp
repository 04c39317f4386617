#pragma once

// Contraction hierarchy: the sequence of trees T_0 .. T_top obtained by
// repeatedly raking every other non-extreme leaf, together with the recipes
// that define each freshly materialized edge matrix in terms of matrices one
// level down and one leaf likelihood.
//
// The hierarchy is generic over the matrix representation (`Algebra`), so the
// same contraction drives dense k x k matrices and factored join-tree edges.
// An Algebra supplies:
//   using Matrix = ...;
//   static Vector apply(const Matrix&, std::span<const double>, OpCounts*);
//   static Vector apply_transposed(const Matrix&, std::span<const double>, OpCounts*);
//   static Matrix rake(const Matrix& target, const Matrix& leaf_edge,
//                      const Matrix& keep_edge, std::span<const double> leaf_lambda, OpCounts*);
//     -> target * diag(leaf_edge * leaf_lambda) * keep_edge
//   static bool bitwise_equal(const Matrix&, const Matrix&);

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "raketree/errors.hpp"
#include "raketree/linalg.hpp"
#include "raketree/tree.hpp"

namespace raketree {

enum class Side : std::uint8_t { Left = 0, Right = 1 };
constexpr Side opposite(Side s) { return s == Side::Left ? Side::Right : Side::Left; }
constexpr std::size_t slot_of(Side s) { return static_cast<std::size_t>(s); }

using SlotId = std::uint32_t;
using RecipeId = std::uint32_t;
inline constexpr SlotId kNoSlot = UINT32_MAX;
inline constexpr RecipeId kNoRecipe = UINT32_MAX;

// Binary complete tree shape, indexed by node.
struct BinaryTopology {
  NodeIndex root = kNoNode;
  std::vector<NodeIndex> parent;
  std::vector<NodeIndex> left;
  std::vector<NodeIndex> right;

  std::size_t size() const { return parent.size(); }
  bool is_leaf(NodeIndex x) const { return left[x] == kNoNode; }
};

// Throws StructureError unless the tree is binary complete.
BinaryTopology topology_of(const CausalTree& tree);

// One node as it appears in one level tree.
struct LevelNode {
  NodeIndex parent = kNoNode;
  std::array<NodeIndex, 2> child{kNoNode, kNoNode};
  std::array<SlotId, 2> slot{kNoSlot, kNoSlot};  // A (left edge), B (right edge)

  NodeIndex left() const { return child[0]; }
  NodeIndex right() const { return child[1]; }
  Side side_of(NodeIndex c) const { return child[0] == c ? Side::Left : Side::Right; }
};

// Raking leaf e (child of x, sibling z) under u = parent(x):
//   output = in_target * diag(in_leaf_edge * lambda(e)) * in_keep_edge
// and the output becomes u's edge toward z at `level`.
struct Recipe {
  std::uint32_t level = 0;  // level of the produced matrix
  NodeIndex target = kNoNode;
  Side target_side = Side::Left;
  NodeIndex removed = kNoNode;
  NodeIndex raked_leaf = kNoNode;
  Side leaf_side = Side::Left;  // left-leaf or right-leaf rule
  SlotId in_target = kNoSlot;
  SlotId in_leaf_edge = kNoSlot;
  SlotId in_keep_edge = kNoSlot;
  SlotId output = kNoSlot;
};

struct PassReport {
  std::size_t leaves_before = 0;
  std::size_t eligible = 0;
  std::size_t raked = 0;
  std::size_t skipped = 0;  // odd-position candidates dropped by the conflict guard

  double halving_ratio() const {
    return eligible == 0 ? 0.0 : static_cast<double>(raked) / static_cast<double>(eligible);
  }
};

template <class Algebra>
class ContractionHierarchy {
 public:
  using Mat = typename Algebra::Matrix;

  // `edges[c]` is the matrix on the edge into node c (ignored at the root);
  // `leaf_lambda[x]` is read for leaves only.
  ContractionHierarchy(BinaryTopology topology, std::vector<Mat> edges,
                       std::vector<Vector> leaf_lambda, OpCounts* counts = nullptr)
      : topology_(std::move(topology)), lambda_(std::move(leaf_lambda)) {
    const std::size_t n = topology_.size();
    if (topology_.root == kNoNode || topology_.root >= n) throw StructureError("hierarchy: missing root");
    if (edges.size() != n || lambda_.size() != n) throw DimensionError("hierarchy: per-node input size mismatch");
    history_.assign(n, {});
    recipe_of_leaf_.assign(n, kNoRecipe);

    std::vector<SlotId> edge_slot(n, kNoSlot);
    for (NodeIndex c = 0; c < n; ++c) {
      if (c == topology_.root) continue;
      edge_slot[c] = new_slot(std::move(edges[c]));
    }
    level0_slots_ = matrices_.size();
    for (NodeIndex x = 0; x < n; ++x) {
      LevelNode node;
      node.parent = topology_.parent[x];
      if (!topology_.is_leaf(x)) {
        node.child = {topology_.left[x], topology_.right[x]};
        node.slot = {edge_slot[topology_.left[x]], edge_slot[topology_.right[x]]};
      }
      history_[x].push_back(node);
    }
    level_count_ = 1;
    while (contract_pass(counts)) ++level_count_;
  }

  std::size_t level_count() const { return level_count_; }
  std::size_t top() const { return level_count_ - 1; }
  std::size_t node_count() const { return topology_.size(); }
  NodeIndex root() const { return topology_.root; }
  const BinaryTopology& topology() const { return topology_; }

  // Highest level at which x appears.
  std::size_t ind(NodeIndex x) const { return history_.at(x).size() - 1; }
  bool present(NodeIndex x, std::size_t level) const { return level < history_.at(x).size(); }
  const LevelNode& at(NodeIndex x, std::size_t level) const { return history_.at(x).at(level); }
  bool is_leaf(NodeIndex x) const { return topology_.is_leaf(x); }

  const Mat& matrix(SlotId s) const { return matrices_.at(s); }
  const Mat& edge(NodeIndex x, std::size_t level, Side side) const {
    return matrices_.at(at(x, level).slot[slot_of(side)]);
  }
  std::size_t slot_count() const { return matrices_.size(); }
  std::size_t level0_slot_count() const { return level0_slots_; }
  std::size_t fresh_matrix_count() const { return matrices_.size() - level0_slots_; }
  RecipeId producer(SlotId s) const { return producer_.at(s); }
  RecipeId consumer(SlotId s) const { return consumer_.at(s); }
  const std::vector<Recipe>& recipes() const { return recipes_; }
  RecipeId recipe_of_leaf(NodeIndex leaf) const { return recipe_of_leaf_.at(leaf); }
  const Vector& leaf_lambda(NodeIndex leaf) const { return lambda_.at(leaf); }
  const std::vector<PassReport>& passes() const { return passes_; }

  // Nodes of T_level in preorder.
  std::vector<NodeIndex> nodes_at(std::size_t level) const {
    std::vector<NodeIndex> out;
    std::vector<NodeIndex> stack{topology_.root};
    while (!stack.empty()) {
      const NodeIndex x = stack.back();
      stack.pop_back();
      out.push_back(x);
      const auto& node = at(x, level);
      if (node.child[1] != kNoNode) stack.push_back(node.child[1]);
      if (node.child[0] != kNoNode) stack.push_back(node.child[0]);
    }
    return out;
  }

  // Leaves of T_level in left-to-right order.
  std::vector<NodeIndex> leaves_at(std::size_t level) const {
    std::vector<NodeIndex> out;
    for (NodeIndex x : nodes_at(level)) {
      if (at(x, level).child[0] == kNoNode) out.push_back(x);
    }
    return out;
  }

  // Stores the leaf likelihood, then recomputes the recipe that consumes it
  // and every recipe downstream along the single-successor chain. Returns the
  // recomputed recipes in order.
  std::vector<RecipeId> set_leaf_lambda(NodeIndex leaf, Vector lambda, OpCounts* counts = nullptr) {
    if (!is_leaf(leaf)) throw UsageError("hierarchy: lambda slot on a non-leaf");
    lambda_.at(leaf) = std::move(lambda);
    std::vector<RecipeId> chain;
    for (RecipeId r = recipe_of_leaf_[leaf]; r != kNoRecipe; r = consumer_[recipes_[r].output]) {
      evaluate(recipes_[r], counts);
      chain.push_back(r);
    }
    return chain;
  }

  // Re-evaluates every recipe in build order into a scratch copy and reports
  // whether the stored matrices match bit for bit.
  bool matches_rebuild() const {
    ContractionHierarchy copy = *this;
    for (const auto& r : copy.recipes_) copy.evaluate(r, nullptr);
    for (std::size_t s = 0; s < matrices_.size(); ++s) {
      if (!Algebra::bitwise_equal(matrices_[s], copy.matrices_[s])) return false;
    }
    return true;
  }

 private:
  SlotId new_slot(Mat m) {
    matrices_.push_back(std::move(m));
    producer_.push_back(kNoRecipe);
    consumer_.push_back(kNoRecipe);
    return static_cast<SlotId>(matrices_.size() - 1);
  }

  void evaluate(const Recipe& r, OpCounts* counts) {
    matrices_[r.output] = Algebra::rake(matrices_[r.in_target], matrices_[r.in_leaf_edge],
                                        matrices_[r.in_keep_edge], lambda_[r.raked_leaf], counts);
  }

  void consume(SlotId s, RecipeId r) {
    if (consumer_[s] != kNoRecipe) throw std::logic_error("hierarchy: matrix consumed by two recipes");
    consumer_[s] = r;
  }

  // Builds T_{i+1} from T_i. Returns false once T_i has fewer than 3 leaves.
  bool contract_pass(OpCounts* counts) {
    const std::size_t level = level_count_ - 1;
    const NodeIndex root = topology_.root;
    const auto order = nodes_at(level);
    std::vector<NodeIndex> leaves;
    for (NodeIndex x : order) {
      if (at(x, level).child[0] == kNoNode) leaves.push_back(x);
    }
    if (leaves.size() < 3) return false;

    PassReport report;
    report.leaves_before = leaves.size();
    std::vector<NodeIndex> eligible;
    for (std::size_t j = 1; j + 1 < leaves.size(); ++j) {
      if (at(leaves[j], level).parent != root) eligible.push_back(leaves[j]);
    }
    report.eligible = eligible.size();

    // Parity is fixed on the eligible list; a candidate is skipped when its
    // rake would touch a node removed or re-pointed by an earlier rake.
    struct Rake {
      NodeIndex leaf, removed, target;
    };
    std::vector<Rake> rakes;
    std::vector<std::uint8_t> removed(topology_.size(), 0), modified(topology_.size(), 0),
        raked(topology_.size(), 0);
    for (std::size_t j = 0; j < eligible.size(); j += 2) {
      const NodeIndex e = eligible[j];
      const NodeIndex x = at(e, level).parent;
      const NodeIndex u = at(x, level).parent;
      if (removed[x] || modified[x] || removed[u]) {
        ++report.skipped;
        continue;
      }
      removed[x] = 1;
      modified[u] = 1;
      raked[e] = 1;
      rakes.push_back({e, x, u});
    }
    if (rakes.empty()) throw std::logic_error("hierarchy: contraction made no progress");
    report.raked = rakes.size();

    for (NodeIndex y : order) {
      if (!removed[y] && !raked[y]) history_[y].push_back(history_[y][level]);
    }
    const auto next = static_cast<std::uint32_t>(level + 1);
    for (const auto& rk : rakes) {
      const LevelNode& xn = at(rk.removed, level);
      const LevelNode& un = at(rk.target, level);
      const Side leaf_side = xn.side_of(rk.leaf);
      const Side keep_side = opposite(leaf_side);
      const Side target_side = un.side_of(rk.removed);
      const NodeIndex keep = xn.child[slot_of(keep_side)];

      Recipe r;
      r.level = next;
      r.target = rk.target;
      r.target_side = target_side;
      r.removed = rk.removed;
      r.raked_leaf = rk.leaf;
      r.leaf_side = leaf_side;
      r.in_target = un.slot[slot_of(target_side)];
      r.in_leaf_edge = xn.slot[slot_of(leaf_side)];
      r.in_keep_edge = xn.slot[slot_of(keep_side)];
      const auto id = static_cast<RecipeId>(recipes_.size());
      r.output = new_slot(Mat{});
      producer_[r.output] = id;
      consume(r.in_target, id);
      consume(r.in_leaf_edge, id);
      consume(r.in_keep_edge, id);
      recipe_of_leaf_[rk.leaf] = id;
      recipes_.push_back(r);
      evaluate(recipes_.back(), counts);

      LevelNode& u_next = history_[rk.target][next];
      u_next.child[slot_of(target_side)] = keep;
      u_next.slot[slot_of(target_side)] = r.output;
      history_[keep][next].parent = rk.target;
    }
    passes_.push_back(report);
    return true;
  }

  BinaryTopology topology_;
  std::vector<Vector> lambda_;
  std::vector<std::vector<LevelNode>> history_;  // history_[x][i] for i <= ind(x)
  std::vector<Mat> matrices_;
  std::vector<RecipeId> producer_;
  std::vector<RecipeId> consumer_;
  std::vector<Recipe> recipes_;
  std::vector<RecipeId> recipe_of_leaf_;
  std::vector<PassReport> passes_;
  std::size_t level0_slots_ = 0;
  std::size_t level_count_ = 0;
};

// Dense k x k matrices.
struct DenseAlgebra {
  using Matrix = raketree::Matrix;

  static Vector apply(const Matrix& m, std::span<const double> v, OpCounts* counts) {
    return raketree::apply(m, v, counts);
  }
  static Vector apply_transposed(const Matrix& m, std::span<const double> v, OpCounts* counts) {
    return raketree::apply_transposed(m, v, counts);
  }
  // Operand order is fixed: (target * diag(w)) * keep_edge.
  static Matrix rake(const Matrix& target, const Matrix& leaf_edge, const Matrix& keep_edge,
                     std::span<const double> leaf_lambda, OpCounts* counts) {
    const Vector w = raketree::apply(leaf_edge, leaf_lambda, counts);
    Matrix out = matmul(scale_columns(target, w, counts), keep_edge, counts);
    rescale_if_tiny(out);
    return out;
  }
  static bool bitwise_equal(const Matrix& a, const Matrix& b) { return a.bitwise_equal(b); }
};

using DenseHierarchy = ContractionHierarchy<DenseAlgebra>;

// Level-0 inputs of a dense hierarchy taken from a binary complete tree.
DenseHierarchy build_hierarchy(const CausalTree& tree, OpCounts* counts = nullptr);

}  // namespace raketree

#pragma once

// Logarithmic-time engine over a contraction hierarchy. The stored matrices
// are kept current by update(); lambda and pi values are never stored and
// are reconstructed per query by walking one level up at a time.

#include <atomic>
#include <vector>

#include "raketree/contract.hpp"
#include "raketree/errors.hpp"
#include "raketree/linalg.hpp"
#include "raketree/tree.hpp"

namespace raketree {

// pi of a node together with the lambda of its two children in some T_i.
struct PiLambda {
  Vector pi;
  Vector left;
  Vector right;

  const Vector& child(Side s) const { return s == Side::Left ? left : right; }
  Vector& child(Side s) { return s == Side::Left ? left : right; }
};

template <class Algebra>
class DynamicEngine {
 public:
  using Mat = typename Algebra::Matrix;
  using Hierarchy = ContractionHierarchy<Algebra>;

  DynamicEngine(BinaryTopology topology, std::vector<Mat> edges, std::vector<Vector> leaf_lambda,
                Vector prior, OpCounts* build_counts = nullptr)
      : hierarchy_(std::move(topology), std::move(edges), std::move(leaf_lambda), build_counts),
        prior_(std::move(prior)) {}

  const Hierarchy& hierarchy() const { return hierarchy_; }
  const Vector& prior() const { return prior_; }

  // Each call recomputes exactly one matrix per level along the recipe chain.
  std::vector<RecipeId> update(NodeIndex leaf, Vector lambda, OpCounts* counts = nullptr) {
    return hierarchy_.set_leaf_lambda(leaf, std::move(lambda), counts);
  }

  // lambda(x) from the level-ind(x) equation; the raked child is a leaf, the
  // other child is resolved at a strictly higher level.
  Vector lambda(NodeIndex x, OpCounts* counts = nullptr) const {
    if (hierarchy_.is_leaf(x)) return hierarchy_.leaf_lambda(x);
    const std::size_t i = hierarchy_.ind(x);
    const LevelNode& node = hierarchy_.at(x, i);
    Vector out = Algebra::apply(hierarchy_.matrix(node.slot[0]), lambda(node.child[0], counts), counts);
    hadamard_inplace(out, Algebra::apply(hierarchy_.matrix(node.slot[1]), lambda(node.child[1], counts), counts));
    rescale_if_tiny(out);
    return out;
  }

  PiLambda calc_pi_lambda(NodeIndex x, std::size_t level, OpCounts* counts = nullptr) const {
    const auto& h = hierarchy_;
    if (h.is_leaf(x)) throw UsageError("calc_pi_lambda on a leaf");
    if (!h.present(x, level)) throw UsageError("calc_pi_lambda: node absent from requested level");
    const LevelNode& xn = h.at(x, level);

    if (level == h.top()) {
      // Top tree: x is the root and both children are never-raked leaves.
      return {prior_, lambda(xn.child[0], counts), lambda(xn.child[1], counts)};
    }

    PiLambda out;
    if (h.ind(x) == level) {
      // x is removed by a rake at this level; resolve through its parent.
      const NodeIndex u = xn.parent;
      const LevelNode& un = h.at(u, level);
      const LevelNode& un_next = h.at(u, level + 1);
      const Side side = un.side_of(x);
      const Side sibling = opposite(side);
      PiLambda up = calc_pi_lambda(u, level + 1, counts);
      Vector v = Algebra::apply(h.matrix(un_next.slot[slot_of(sibling)]), up.child(sibling), counts);
      hadamard_inplace(v, up.pi);
      out.pi = Algebra::apply_transposed(h.matrix(un.slot[slot_of(side)]), v, counts);
      rescale_if_tiny(out.pi);
      const NodeIndex keep = un_next.child[slot_of(side)];
      for (Side s : {Side::Left, Side::Right}) {
        const NodeIndex c = xn.child[slot_of(s)];
        out.child(s) = c == keep ? std::move(up.child(side)) : h.leaf_lambda(c);
      }
      return out;
    }

    // x survives into the next level.
    PiLambda up = calc_pi_lambda(x, level + 1, counts);
    const LevelNode& xn_next = h.at(x, level + 1);
    out.pi = std::move(up.pi);
    for (Side s : {Side::Left, Side::Right}) {
      const NodeIndex c = xn.child[slot_of(s)];
      if (c == xn_next.child[slot_of(s)]) {
        out.child(s) = std::move(up.child(s));
        continue;
      }
      // c was raked away at this level: one child is the raked leaf, the
      // other is x's child at the next level.
      const LevelNode& cn = h.at(c, level);
      const NodeIndex keep = xn_next.child[slot_of(s)];
      auto child_lambda = [&](std::size_t j) -> Vector {
        return cn.child[j] == keep ? up.child(s) : h.leaf_lambda(cn.child[j]);
      };
      Vector l = Algebra::apply(h.matrix(cn.slot[0]), child_lambda(0), counts);
      hadamard_inplace(l, Algebra::apply(h.matrix(cn.slot[1]), child_lambda(1), counts));
      rescale_if_tiny(l);
      out.child(s) = std::move(l);
    }
    return out;
  }

  Vector pi(NodeIndex x, OpCounts* counts = nullptr) const {
    const auto& h = hierarchy_;
    if (x == h.root()) return prior_;
    if (!h.is_leaf(x)) return calc_pi_lambda(x, h.ind(x), counts).pi;
    const std::size_t i = h.ind(x);
    const NodeIndex p = h.at(x, i).parent;
    const LevelNode& pn = h.at(p, i);
    const Side side = pn.side_of(x);
    const PiLambda up = calc_pi_lambda(p, i, counts);
    Vector v = Algebra::apply(h.matrix(pn.slot[slot_of(opposite(side))]), up.child(opposite(side)), counts);
    hadamard_inplace(v, up.pi);
    Vector out = Algebra::apply_transposed(h.matrix(pn.slot[slot_of(side)]), v, counts);
    rescale_if_tiny(out);
    return out;
  }

  // Bel(x) = normalize(lambda(x) * pi(x)).
  Vector belief(NodeIndex x, OpCounts* counts = nullptr) const {
    const auto& h = hierarchy_;
    if (h.is_leaf(x)) return normalize(hadamard(h.leaf_lambda(x), pi(x, counts)));
    const std::size_t i = h.ind(x);
    const LevelNode& xn = h.at(x, i);
    const PiLambda tri = calc_pi_lambda(x, i, counts);
    Vector lam = Algebra::apply(h.matrix(xn.slot[0]), tri.left, counts);
    hadamard_inplace(lam, Algebra::apply(h.matrix(xn.slot[1]), tri.right, counts));
    hadamard_inplace(lam, tri.pi);
    return normalize(lam);
  }

 private:
  Hierarchy hierarchy_;
  Vector prior_;
};

using DenseEngine = DynamicEngine<DenseAlgebra>;

// Thread-safe accumulator for counts gathered by concurrent readers.
class SharedCounts {
 public:
  SharedCounts() = default;
  SharedCounts(const SharedCounts& other) { *this += other.load(); }
  SharedCounts& operator=(const SharedCounts& other) {
    reset();
    *this += other.load();
    return *this;
  }
  SharedCounts& operator+=(const OpCounts& c) {
    mat_vec_ += c.mat_vec;
    mat_mat_ += c.mat_mat;
    flops_ += c.flops;
    return *this;
  }
  OpCounts load() const { return {mat_vec_.load(), mat_mat_.load(), flops_.load()}; }
  void reset() {
    mat_vec_ = 0;
    mat_mat_ = 0;
    flops_ = 0;
  }

 private:
  std::atomic<std::uint64_t> mat_vec_{0};
  std::atomic<std::uint64_t> mat_mat_{0};
  std::atomic<std::uint64_t> flops_{0};
};

// Hierarchy engine over a causal tree, addressed by stable node ids.
// Queries on normalization copies are answered for the original node.
class HierarchyEngine {
 public:
  explicit HierarchyEngine(CausalTree tree);

  const CausalTree& tree() const { return tree_; }
  const DenseEngine& engine() const { return engine_; }
  const DenseHierarchy& hierarchy() const { return engine_.hierarchy(); }

  std::vector<RecipeId> update_evidence(NodeId leaf, Vector likelihood);
  Vector lambda_query(NodeId x) const;
  PiLambda calc_pi_lambda(NodeId x, std::size_t level) const;
  Vector bel_query(NodeId x) const;

  NodeIndex index_of(NodeId x) const { return tree_.index_of(tree_.resolve(x)); }
  OpCounts counts() const { return counts_.load(); }
  OpCounts build_counts() const { return build_counts_; }
  void reset_counts() { counts_.reset(); }

 private:
  static DenseEngine make_engine(const CausalTree& tree, OpCounts* counts);

  CausalTree tree_;
  OpCounts build_counts_;
  DenseEngine engine_;
  mutable SharedCounts counts_;
};

}  // namespace raketree

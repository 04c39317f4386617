#pragma once

// Causal-tree data model. A tree is built node by node (arbitrary fan-out is
// allowed while building), then normalized by binarize() into the binary
// complete form every engine expects: each node has 0 or 2 children and all
// evidence sits on leaves.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "raketree/linalg.hpp"

namespace raketree {

// Stable external identifier. Survives normalization; copies and dummies
// created by binarize() receive fresh ids above every existing one.
enum class NodeId : std::uint32_t {};

constexpr std::uint32_t value_of(NodeId id) { return static_cast<std::uint32_t>(id); }

// Dense position of a node inside one CausalTree.
using NodeIndex = std::uint32_t;
inline constexpr NodeIndex kNoNode = UINT32_MAX;

struct TreeNode {
  NodeId id{};
  std::string name;
  NodeIndex parent = kNoNode;
  std::vector<NodeIndex> children;
  Matrix edge;  // M_{this|parent}, row = parent value; empty at the root
  std::optional<Vector> evidence;
  bool dummy = false;  // padding leaf, lambda permanently all-ones
};

class CausalTree {
 public:
  explicit CausalTree(std::size_t k);

  std::size_t k() const { return k_; }
  std::size_t size() const { return nodes_.size(); }

  NodeIndex add_node(NodeId id, std::string name);
  NodeIndex add_node(std::string name);  // takes the next free id
  void add_edge(NodeIndex parent, NodeIndex child, Matrix m);
  void set_edge_matrix(NodeIndex child, Matrix m);
  void set_root(NodeIndex root);
  void set_prior(Vector prior);
  void mark_dummy(NodeIndex leaf);
  void set_alias(NodeId copy, NodeId original);

  NodeIndex root() const { return root_; }
  const Vector& prior() const { return prior_; }
  const TreeNode& node(NodeIndex i) const { return nodes_.at(i); }
  const std::vector<TreeNode>& nodes() const { return nodes_; }

  NodeIndex index_of(NodeId id) const;  // throws LookupError
  std::optional<NodeIndex> find(NodeId id) const;
  // Copies created by normalization resolve to the node they duplicate.
  NodeId resolve(NodeId id) const;
  const std::map<NodeId, NodeId>& aliases() const { return alias_; }
  NodeId next_free_id() const { return NodeId{next_id_}; }

  bool is_leaf(NodeIndex i) const { return nodes_.at(i).children.empty(); }
  NodeIndex left(NodeIndex i) const { return nodes_.at(i).children.at(0); }
  NodeIndex right(NodeIndex i) const { return nodes_.at(i).children.at(1); }

  // Stores a likelihood on a leaf; performs no propagation.
  void set_evidence(NodeIndex leaf, Vector likelihood);
  void observe(NodeIndex leaf, std::size_t value) { set_evidence(leaf, indicator(k_, value)); }
  void retract(NodeIndex leaf) { set_evidence(leaf, ones(k_)); }
  // Local likelihood of a node: its evidence, or all-ones when it has none.
  Vector likelihood(NodeIndex i) const;

  // Leaves in in-order (left subtree, node, right subtree).
  std::vector<NodeIndex> leaves_in_order() const;
  // Parents before children.
  std::vector<NodeIndex> preorder() const;
  std::size_t depth(NodeIndex i) const;

 private:
  std::size_t k_;
  std::vector<TreeNode> nodes_;
  std::unordered_map<std::uint32_t, NodeIndex> index_;
  std::map<NodeId, NodeId> alias_;
  NodeIndex root_ = kNoNode;
  Vector prior_;
  std::uint32_t next_id_ = 0;
};

struct Violation {
  std::string rule;  // root, link, reachability, arity, evidence, dimension, stochastic, prior
  std::string where;
  std::string message;
};

// Empty iff the tree is a well-formed binary complete causal tree.
std::vector<Violation> validate(const CausalTree& tree);

// Normalizes an arbitrary rooted tree. Over-full nodes keep their first child
// and hang the rest off a right spine of identity-linked copies; single-child
// nodes get a dummy right leaf. Throws StructureError on non-tree input.
CausalTree binarize(const CausalTree& raw);

struct AttachedLeaf {
  CausalTree tree;
  NodeId leaf;
};

// Gives `x` a fresh identity-linked evidence leaf and re-normalizes. When x
// was itself a leaf, its current evidence moves to the new leaf.
AttachedLeaf attach_evidence_leaf(const CausalTree& tree, NodeId x);

}  // namespace raketree

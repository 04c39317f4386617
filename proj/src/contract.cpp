#include "raketree/contract.hpp"

namespace raketree {

BinaryTopology topology_of(const CausalTree& tree) {
  if (tree.root() == kNoNode) throw StructureError("tree has no root");
  BinaryTopology t;
  t.root = tree.root();
  const std::size_t n = tree.size();
  t.parent.assign(n, kNoNode);
  t.left.assign(n, kNoNode);
  t.right.assign(n, kNoNode);
  for (NodeIndex x = 0; x < n; ++x) {
    const auto& node = tree.node(x);
    t.parent[x] = node.parent;
    if (node.children.empty()) continue;
    if (node.children.size() != 2) {
      throw StructureError("node " + node.name + " has " + std::to_string(node.children.size()) +
                           " children; binarize the tree first");
    }
    t.left[x] = node.children[0];
    t.right[x] = node.children[1];
  }
  if (tree.preorder().size() != n) throw StructureError("tree is not connected");
  return t;
}

DenseHierarchy build_hierarchy(const CausalTree& tree, OpCounts* counts) {
  std::vector<Matrix> edges(tree.size());
  std::vector<Vector> lambda(tree.size());
  for (NodeIndex x = 0; x < tree.size(); ++x) {
    edges[x] = tree.node(x).edge;
    if (tree.is_leaf(x)) lambda[x] = tree.likelihood(x);
  }
  return DenseHierarchy(topology_of(tree), std::move(edges), std::move(lambda), counts);
}

}  // namespace raketree

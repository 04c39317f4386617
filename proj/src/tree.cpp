#include "raketree/tree.hpp"

#include <algorithm>
#include <cmath>

#include "raketree/errors.hpp"

namespace raketree {

namespace {

constexpr double kStochasticTolerance = 1e-9;

std::string describe(const CausalTree& tree, NodeIndex i) {
  const auto& n = tree.node(i);
  return n.name + " (id " + std::to_string(value_of(n.id)) + ")";
}

}  // namespace

CausalTree::CausalTree(std::size_t k) : k_(k) {
  if (k == 0) throw DomainError("domain size must be positive");
}

NodeIndex CausalTree::add_node(NodeId id, std::string name) {
  const auto raw = value_of(id);
  if (index_.count(raw)) throw StructureError("duplicate node id " + std::to_string(raw));
  const auto index = static_cast<NodeIndex>(nodes_.size());
  TreeNode node;
  node.id = id;
  node.name = std::move(name);
  nodes_.push_back(std::move(node));
  index_.emplace(raw, index);
  next_id_ = std::max(next_id_, raw + 1);
  return index;
}

NodeIndex CausalTree::add_node(std::string name) { return add_node(NodeId{next_id_}, std::move(name)); }

void CausalTree::add_edge(NodeIndex parent, NodeIndex child, Matrix m) {
  if (parent >= nodes_.size() || child >= nodes_.size()) throw LookupError("edge endpoint out of range");
  if (parent == child) throw StructureError("self loop at " + describe(*this, parent));
  auto& c = nodes_[child];
  if (c.parent != kNoNode) {
    throw StructureError("node " + describe(*this, child) + " has more than one parent");
  }
  c.parent = parent;
  c.edge = std::move(m);
  nodes_[parent].children.push_back(child);
}

void CausalTree::set_edge_matrix(NodeIndex child, Matrix m) {
  auto& c = nodes_.at(child);
  if (c.parent == kNoNode) throw StructureError("node " + describe(*this, child) + " has no parent edge");
  c.edge = std::move(m);
}

void CausalTree::set_root(NodeIndex root) {
  if (root >= nodes_.size()) throw LookupError("root out of range");
  root_ = root;
}

void CausalTree::set_prior(Vector prior) { prior_ = std::move(prior); }

void CausalTree::mark_dummy(NodeIndex leaf) { nodes_.at(leaf).dummy = true; }

void CausalTree::set_alias(NodeId copy, NodeId original) { alias_[copy] = original; }

NodeIndex CausalTree::index_of(NodeId id) const {
  auto it = index_.find(value_of(id));
  if (it == index_.end()) throw LookupError("unknown node id " + std::to_string(value_of(id)));
  return it->second;
}

std::optional<NodeIndex> CausalTree::find(NodeId id) const {
  auto it = index_.find(value_of(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

NodeId CausalTree::resolve(NodeId id) const {
  auto it = alias_.find(id);
  while (it != alias_.end()) {
    id = it->second;
    it = alias_.find(id);
  }
  return id;
}

void CausalTree::set_evidence(NodeIndex leaf, Vector likelihood) {
  auto& n = nodes_.at(leaf);
  if (!n.children.empty()) throw UsageError("evidence target " + describe(*this, leaf) + " is not a leaf");
  if (n.dummy) throw UsageError("evidence target " + describe(*this, leaf) + " is a dummy leaf");
  if (likelihood.size() != k_) {
    throw DimensionError("likelihood has " + std::to_string(likelihood.size()) + " entries, expected " +
                         std::to_string(k_));
  }
  for (double x : likelihood) {
    if (!(x >= 0.0) || !std::isfinite(x)) throw DomainError("likelihood entries must be finite and >= 0");
  }
  n.evidence = std::move(likelihood);
}

Vector CausalTree::likelihood(NodeIndex i) const {
  const auto& n = nodes_.at(i);
  return n.evidence ? *n.evidence : ones(k_);
}

std::vector<NodeIndex> CausalTree::leaves_in_order() const {
  std::vector<NodeIndex> out;
  if (root_ == kNoNode) return out;
  // Iterative in-order; for nodes with more than two children the "middle"
  // position is irrelevant for leaves, so children are visited left to right.
  std::vector<NodeIndex> stack{root_};
  while (!stack.empty()) {
    const NodeIndex x = stack.back();
    stack.pop_back();
    const auto& ch = nodes_[x].children;
    if (ch.empty()) {
      out.push_back(x);
      continue;
    }
    for (auto it = ch.rbegin(); it != ch.rend(); ++it) stack.push_back(*it);
  }
  return out;
}

std::vector<NodeIndex> CausalTree::preorder() const {
  std::vector<NodeIndex> out;
  if (root_ == kNoNode) return out;
  std::vector<NodeIndex> stack{root_};
  std::vector<bool> seen(nodes_.size(), false);
  while (!stack.empty()) {
    const NodeIndex x = stack.back();
    stack.pop_back();
    if (seen[x]) throw StructureError("cycle through " + describe(*this, x));
    seen[x] = true;
    out.push_back(x);
    const auto& ch = nodes_[x].children;
    for (auto it = ch.rbegin(); it != ch.rend(); ++it) stack.push_back(*it);
  }
  return out;
}

std::size_t CausalTree::depth(NodeIndex i) const {
  std::size_t d = 0;
  for (NodeIndex x = nodes_.at(i).parent; x != kNoNode; x = nodes_[x].parent) {
    if (++d > nodes_.size()) throw StructureError("cycle above " + describe(*this, i));
  }
  return d;
}

std::vector<Violation> validate(const CausalTree& tree) {
  std::vector<Violation> out;
  auto report = [&](std::string rule, std::string where, std::string message) {
    out.push_back({std::move(rule), std::move(where), std::move(message)});
  };
  const std::size_t k = tree.k();

  if (tree.root() == kNoNode) {
    report("root", "tree", "no root declared");
    return out;
  }
  if (tree.node(tree.root()).parent != kNoNode) {
    report("root", describe(tree, tree.root()), "root has a parent");
  }

  for (NodeIndex i = 0; i < tree.size(); ++i) {
    const auto& n = tree.node(i);
    for (NodeIndex c : n.children) {
      if (tree.node(c).parent != i) {
        report("link", describe(tree, i) + " -> " + describe(tree, c), "child does not point back to parent");
      }
    }
    if (n.parent == kNoNode && i != tree.root()) {
      report("reachability", describe(tree, i), "node has no parent and is not the root");
    }
  }

  // Reachability and cycles.
  std::vector<bool> seen(tree.size(), false);
  std::vector<NodeIndex> stack{tree.root()};
  std::size_t visited = 0;
  while (!stack.empty()) {
    const NodeIndex x = stack.back();
    stack.pop_back();
    if (seen[x]) {
      report("reachability", describe(tree, x), "node reached twice (cycle)");
      continue;
    }
    seen[x] = true;
    ++visited;
    for (NodeIndex c : tree.node(x).children) stack.push_back(c);
  }
  if (visited != tree.size()) {
    for (NodeIndex i = 0; i < tree.size(); ++i) {
      if (!seen[i] && tree.node(i).parent != kNoNode) {
        report("reachability", describe(tree, i), "node not reachable from the root");
      }
    }
  }

  const auto& prior = tree.prior();
  if (prior.size() != k) {
    report("dimension", "prior", "prior has " + std::to_string(prior.size()) + " entries, expected " +
                                     std::to_string(k));
  } else {
    double sum = 0.0;
    bool negative = false;
    for (double x : prior) {
      sum += x;
      negative |= !(x >= 0.0);
    }
    if (negative || std::abs(sum - 1.0) > kStochasticTolerance) {
      report("prior", "prior", "prior must be nonnegative and sum to 1");
    }
  }

  for (NodeIndex i = 0; i < tree.size(); ++i) {
    const auto& n = tree.node(i);
    const auto where = describe(tree, i);
    if (n.children.size() != 0 && n.children.size() != 2) {
      report("arity", where, "node has " + std::to_string(n.children.size()) + " children, expected 0 or 2");
    }
    if (n.evidence) {
      if (!n.children.empty()) report("evidence", where, "evidence on a non-leaf");
      if (n.evidence->size() != k) report("evidence", where, "likelihood length differs from k");
      for (double x : *n.evidence) {
        if (!(x >= 0.0)) {
          report("evidence", where, "negative likelihood entry");
          break;
        }
      }
    }
    if (n.parent == kNoNode) continue;
    const auto edge_where = describe(tree, n.parent) + " -> " + where;
    if (n.edge.rows() != k || n.edge.cols() != k) {
      report("dimension", edge_where, "edge matrix is not k x k");
      continue;
    }
    for (std::size_t r = 0; r < k; ++r) {
      double sum = 0.0;
      bool range_ok = true;
      for (double x : n.edge.row(r)) {
        sum += x;
        range_ok &= x >= 0.0 && x <= 1.0;
      }
      if (!range_ok || std::abs(sum - 1.0) > kStochasticTolerance) {
        report("stochastic", edge_where, "row " + std::to_string(r) + " sums to " + std::to_string(sum));
      }
    }
  }
  return out;
}

CausalTree binarize(const CausalTree& raw) {
  if (raw.root() == kNoNode) throw StructureError("tree has no root");
  if (raw.node(raw.root()).parent != kNoNode) throw StructureError("root has a parent");
  const auto order = raw.preorder();  // throws on cycles
  if (order.size() != raw.size()) throw StructureError("tree is not connected or contains a cycle");

  CausalTree out(raw.k());
  for (const auto& n : raw.nodes()) {
    const NodeIndex i = out.add_node(n.id, n.name);
    if (n.dummy) out.mark_dummy(i);
  }
  for (const auto& [copy, original] : raw.aliases()) out.set_alias(copy, original);
  out.set_root(raw.root());
  out.set_prior(raw.prior());

  const std::size_t k = raw.k();
  for (NodeIndex p : order) {
    const auto& n = raw.node(p);
    const auto& ch = n.children;
    if (n.evidence && !ch.empty()) {
      throw StructureError("evidence on internal node " + describe(raw, p) + "; attach an evidence leaf instead");
    }
    if (ch.empty()) continue;
    if (ch.size() == 1) {
      out.add_edge(p, ch[0], raw.node(ch[0]).edge);
      const NodeIndex dummy = out.add_node(n.name + "~dummy");
      out.mark_dummy(dummy);
      out.add_edge(p, dummy, Matrix::identity(k));
      continue;
    }
    NodeIndex current = p;
    std::string copy_name = n.name;
    for (std::size_t j = 0; j + 2 < ch.size(); ++j) {
      out.add_edge(current, ch[j], raw.node(ch[j]).edge);
      copy_name += "'";
      const NodeIndex copy = out.add_node(copy_name);
      out.set_alias(out.node(copy).id, raw.resolve(n.id));
      out.add_edge(current, copy, Matrix::identity(k));
      current = copy;
    }
    out.add_edge(current, ch[ch.size() - 2], raw.node(ch[ch.size() - 2]).edge);
    out.add_edge(current, ch[ch.size() - 1], raw.node(ch[ch.size() - 1]).edge);
  }
  for (const auto& n : raw.nodes()) {
    if (n.evidence) out.set_evidence(out.index_of(n.id), *n.evidence);
  }
  return out;
}

AttachedLeaf attach_evidence_leaf(const CausalTree& tree, NodeId x) {
  const NodeIndex target = tree.index_of(x);
  if (tree.node(target).dummy) throw UsageError("cannot attach evidence below dummy leaf " + describe(tree, target));
  CausalTree raw(tree.k());
  for (const auto& n : tree.nodes()) {
    const NodeIndex i = raw.add_node(n.id, n.name);
    if (n.dummy) raw.mark_dummy(i);
  }
  for (const auto& [copy, original] : tree.aliases()) raw.set_alias(copy, original);
  raw.set_root(tree.root());
  raw.set_prior(tree.prior());
  for (NodeIndex p = 0; p < tree.size(); ++p) {
    for (NodeIndex c : tree.node(p).children) raw.add_edge(p, c, tree.node(c).edge);
  }
  const NodeIndex leaf = raw.add_node("e_" + tree.node(target).name);
  raw.add_edge(target, leaf, Matrix::identity(tree.k()));
  for (NodeIndex i = 0; i < tree.size(); ++i) {
    const auto& n = tree.node(i);
    if (!n.evidence) continue;
    raw.set_evidence(i == target ? leaf : i, *n.evidence);
  }
  const NodeId leaf_id = raw.node(leaf).id;
  return {binarize(raw), leaf_id};
}

}  // namespace raketree

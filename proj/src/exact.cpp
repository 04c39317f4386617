#include "raketree/exact.hpp"

#include <algorithm>
#include <string>

#include "raketree/errors.hpp"

namespace raketree {

namespace {

Vector belief_at(const CausalTree& tree, NodeIndex x, const Vector& lambda, const Vector& pi) {
  try {
    return normalize(hadamard(lambda, pi));
  } catch (const InconsistentEvidence&) {
    throw InconsistentEvidence("inconsistent evidence at node " + tree.node(x).name);
  }
}

void require_root(const CausalTree& tree) {
  if (tree.root() == kNoNode) throw StructureError("tree has no root");
  if (tree.prior().size() != tree.k()) throw DimensionError("prior length differs from k");
}

}  // namespace

Propagation full_propagation(const CausalTree& tree, OpCounts* counts) {
  require_root(tree);
  const auto order = tree.preorder();
  const std::size_t n = tree.size();
  Propagation out;
  out.lambda.assign(n, {});
  out.pi.assign(n, {});
  out.belief.assign(n, {});
  std::vector<Vector> message(n);  // M_{c|parent} * lambda(c), per child c

  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const NodeIndex x = *it;
    Vector lambda = tree.likelihood(x);
    for (NodeIndex c : tree.node(x).children) hadamard_inplace(lambda, message[c]);
    rescale_if_tiny(lambda);
    if (tree.node(x).parent != kNoNode) message[x] = apply(tree.node(x).edge, lambda, counts);
    out.lambda[x] = std::move(lambda);
  }

  out.pi[tree.root()] = tree.prior();
  for (NodeIndex x : order) {
    const auto& children = tree.node(x).children;
    if (children.empty()) continue;
    Vector base = hadamard(out.pi[x], tree.likelihood(x));
    for (NodeIndex c : children) {
      Vector v = base;
      for (NodeIndex s : children) {
        if (s != c) hadamard_inplace(v, message[s]);
      }
      Vector pi = apply_transposed(tree.node(c).edge, v, counts);
      rescale_if_tiny(pi);
      out.pi[c] = std::move(pi);
    }
  }

  for (NodeIndex x : order) out.belief[x] = belief_at(tree, x, out.lambda[x], out.pi[x]);
  return out;
}

std::vector<Vector> propagate_all(const CausalTree& tree, OpCounts* counts) {
  return full_propagation(tree, counts).belief;
}

std::vector<Vector> joint_marginals(const CausalTree& tree, std::uint64_t max_states) {
  require_root(tree);
  const auto order = tree.preorder();
  const std::size_t n = order.size();
  if (n != tree.size()) throw StructureError("tree is not connected");
  const std::size_t k = tree.k();

  std::uint64_t states = 1;
  for (std::size_t i = 0; i < n; ++i) {
    if (states > max_states / k) {
      throw ScaleError("joint state space exceeds " + std::to_string(max_states) + " assignments");
    }
    states *= k;
  }

  // position of each node in preorder, and its parent's position
  std::vector<std::size_t> position(tree.size());
  for (std::size_t p = 0; p < n; ++p) position[order[p]] = p;
  std::vector<std::size_t> parent_pos(n, 0);
  std::vector<Vector> local(n);
  for (std::size_t p = 0; p < n; ++p) {
    const NodeIndex x = order[p];
    local[p] = tree.likelihood(x);
    if (p > 0) parent_pos[p] = position[tree.node(x).parent];
  }

  auto factor = [&](std::size_t p, const std::vector<std::size_t>& value) {
    const NodeIndex x = order[p];
    const double base = p == 0 ? tree.prior()[value[0]] : tree.node(x).edge(value[parent_pos[p]], value[p]);
    return base * local[p][value[p]];
  };

  std::vector<std::size_t> value(n, 0);
  std::vector<double> weight(n, 0.0);  // product of factors 0..p
  auto refresh = [&](std::size_t from) {
    for (std::size_t p = from; p < n; ++p) weight[p] = (p == 0 ? 1.0 : weight[p - 1]) * factor(p, value);
  };
  refresh(0);

  std::vector<Vector> mass(tree.size(), Vector(k, 0.0));
  double total = 0.0;
  while (true) {
    const double w = weight[n - 1];
    if (w != 0.0) {
      total += w;
      for (std::size_t p = 0; p < n; ++p) mass[order[p]][value[p]] += w;
    }
    std::size_t p = n;
    while (p > 0) {
      --p;
      if (++value[p] < k) break;
      value[p] = 0;
      if (p == 0) {
        p = n;  // odometer wrapped
        break;
      }
    }
    if (p == n) break;
    refresh(p);
  }

  if (!(total > 0.0)) throw InconsistentEvidence("inconsistent evidence: zero joint probability");
  for (auto& m : mass)
    for (double& x : m) x /= total;
  return mass;
}

PathEngine::PathEngine(CausalTree tree) : tree_(std::move(tree)) {
  require_root(tree_);
  lambda_.assign(tree_.size(), {});
  const auto order = tree_.preorder();
  for (auto it = order.rbegin(); it != order.rend(); ++it) recompute_lambda(*it, nullptr);
}

void PathEngine::recompute_lambda(NodeIndex x, OpCounts* counts) {
  Vector lambda = tree_.likelihood(x);
  for (NodeIndex c : tree_.node(x).children) {
    hadamard_inplace(lambda, apply(tree_.node(c).edge, lambda_[c], counts));
  }
  rescale_if_tiny(lambda);
  lambda_[x] = std::move(lambda);
}

void PathEngine::update(NodeIndex leaf, Vector likelihood) {
  tree_.set_evidence(leaf, std::move(likelihood));  // validates leaf and entries
  lambda_[leaf] = tree_.likelihood(leaf);
  for (NodeIndex x = tree_.node(leaf).parent; x != kNoNode; x = tree_.node(x).parent) {
    recompute_lambda(x, &update_counts_);
    ++lambda_recomputations_;
  }
}

Vector PathEngine::query(NodeIndex x, PathQueryCost* cost) const {
  std::vector<NodeIndex> path;
  for (NodeIndex y = x; y != kNoNode; y = tree_.node(y).parent) path.push_back(y);
  std::reverse(path.begin(), path.end());

  OpCounts local;
  Vector pi = tree_.prior();
  for (std::size_t step = 1; step < path.size(); ++step) {
    const NodeIndex u = path[step - 1];
    const NodeIndex c = path[step];
    Vector v = hadamard(pi, tree_.likelihood(u));
    for (NodeIndex s : tree_.node(u).children) {
      if (s != c) hadamard_inplace(v, apply(tree_.node(s).edge, lambda_[s], &local));
    }
    pi = apply_transposed(tree_.node(c).edge, v, &local);
    rescale_if_tiny(pi);
  }
  if (cost) {
    cost->ops += local;
    cost->pi_recomputations += path.size() - 1;
  }
  return belief_at(tree_, x, lambda_[x], pi);
}

}  // namespace raketree

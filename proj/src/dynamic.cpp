#include "raketree/dynamic.hpp"

#include <sstream>

namespace raketree {

DenseEngine HierarchyEngine::make_engine(const CausalTree& tree, OpCounts* counts) {
  const auto violations = validate(tree);
  if (!violations.empty()) {
    std::ostringstream msg;
    msg << "invalid causal tree: " << violations.front().rule << " at " << violations.front().where << ": "
        << violations.front().message;
    if (violations.size() > 1) msg << " (+" << violations.size() - 1 << " more)";
    throw StructureError(msg.str());
  }
  std::vector<Matrix> edges(tree.size());
  std::vector<Vector> lambda(tree.size());
  for (NodeIndex x = 0; x < tree.size(); ++x) {
    edges[x] = tree.node(x).edge;
    if (tree.is_leaf(x)) lambda[x] = tree.likelihood(x);
  }
  return DenseEngine(topology_of(tree), std::move(edges), std::move(lambda), tree.prior(), counts);
}

HierarchyEngine::HierarchyEngine(CausalTree tree)
    : tree_(std::move(tree)), engine_(make_engine(tree_, &build_counts_)) {}

std::vector<RecipeId> HierarchyEngine::update_evidence(NodeId leaf, Vector likelihood) {
  const NodeIndex i = tree_.index_of(leaf);
  tree_.set_evidence(i, std::move(likelihood));  // rejects dummies, non-leaves, bad entries
  OpCounts local;
  auto chain = engine_.update(i, tree_.likelihood(i), &local);
  counts_ += local;
  return chain;
}

Vector HierarchyEngine::lambda_query(NodeId x) const {
  OpCounts local;
  Vector out = engine_.lambda(index_of(x), &local);
  counts_ += local;
  return out;
}

PiLambda HierarchyEngine::calc_pi_lambda(NodeId x, std::size_t level) const {
  OpCounts local;
  PiLambda out = engine_.calc_pi_lambda(index_of(x), level, &local);
  counts_ += local;
  return out;
}

Vector HierarchyEngine::bel_query(NodeId x) const {
  OpCounts local;
  Vector out;
  try {
    out = engine_.belief(index_of(x), &local);
  } catch (const InconsistentEvidence&) {
    counts_ += local;
    throw;
  }
  counts_ += local;
  return out;
}

}  // namespace raketree

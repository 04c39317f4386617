#include "fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace raketree::testing {

std::vector<double> loop_apply(const Rows& m, const std::vector<double>& v) {
  std::vector<double> out;
  for (const auto& row : m) {
    double s = 0;
    for (std::size_t j = 0; j < row.size(); ++j) s += row[j] * v[j];
    out.push_back(s);
  }
  return out;
}

Rows loop_matmul(const Rows& a, const Rows& b) {
  Rows out(a.size(), std::vector<double>(b.empty() ? 0 : b[0].size(), 0.0));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < out[i].size(); ++j)
      for (std::size_t l = 0; l < b.size(); ++l) out[i][j] += a[i][l] * b[l][j];
  return out;
}

Rows rows_of(const Matrix& m) {
  Rows out(m.rows(), std::vector<double>(m.cols()));
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) out[r][c] = m(r, c);
  return out;
}

ThreeNode three_node_tree() {
  ThreeNode t;
  t.root = t.tree.add_node("X");
  t.y = t.tree.add_node("Y");
  t.z = t.tree.add_node("Z");
  t.tree.add_edge(t.root, t.y, Matrix(2, 2, {0.9, 0.1, 0.2, 0.8}));
  t.tree.add_edge(t.root, t.z, Matrix(2, 2, {0.7, 0.3, 0.4, 0.6}));
  t.tree.set_root(t.root);
  t.tree.set_prior({0.5, 0.5});
  t.tree.set_evidence(t.y, {1.0, 0.0});
  t.tree.set_evidence(t.z, {1.0, 1.0});
  return t;
}

Chain4 chain4(std::uint64_t seed) {
  Rng rng(seed);
  Chain4 c;
  c.tree = chain_tree(4, 2, rng);
  for (NodeIndex i = 0; i < c.tree.size(); ++i) c.at[c.tree.node(i).name] = i;
  return c;
}

NodeIndex by_name(const CausalTree& tree, const std::string& name) {
  for (NodeIndex i = 0; i < tree.size(); ++i)
    if (tree.node(i).name == name) return i;
  throw std::out_of_range("no node named " + name);
}

CausalTree level_tree(const CausalTree& t0, const DenseHierarchy& h, std::size_t level) {
  CausalTree out(t0.k());
  std::map<NodeIndex, NodeIndex> map;
  for (NodeIndex x : h.nodes_at(level)) map[x] = out.add_node(t0.node(x).id, t0.node(x).name);
  for (NodeIndex x : h.nodes_at(level)) {
    const auto& node = h.at(x, level);
    if (node.child[0] == kNoNode) {
      out.set_evidence(map[x], h.leaf_lambda(x));
      continue;
    }
    out.add_edge(map[x], map[node.child[0]], h.matrix(node.slot[0]));
    out.add_edge(map[x], map[node.child[1]], h.matrix(node.slot[1]));
  }
  out.set_root(map[h.root()]);
  out.set_prior(t0.prior());
  return out;
}

std::vector<NodeIndex> updatable_leaves(const CausalTree& tree) {
  std::vector<NodeIndex> out;
  for (NodeIndex i = 0; i < tree.size(); ++i)
    if (tree.is_leaf(i) && !tree.node(i).dummy) out.push_back(i);
  return out;
}

void randomize_evidence(CausalTree& tree, Rng& rng) {
  for (NodeIndex leaf : updatable_leaves(tree)) tree.set_evidence(leaf, random_likelihood(tree.k(), rng));
}

std::vector<Vector> polytree_brute_force(const Polytree& pt, const std::map<VarId, Vector>& evidence) {
  const std::size_t n = pt.size(), k = pt.k();
  std::vector<std::size_t> value(n, 0);
  std::vector<Vector> mass(n, Vector(k, 0.0));
  double total = 0.0;
  while (true) {
    double w = 1.0;
    for (std::size_t i = 0; i < n && w != 0.0; ++i) {
      const auto& var = pt.variables()[i];
      std::size_t row = 0;
      for (VarId p : var.parents) row = row * k + value[pt.index_of(p)];
      w *= var.cpt(row, value[i]);
      auto it = evidence.find(var.id);
      if (it != evidence.end()) w *= it->second[value[i]];
    }
    if (w != 0.0) {
      total += w;
      for (std::size_t i = 0; i < n; ++i) mass[i][value[i]] += w;
    }
    std::size_t i = 0;
    while (i < n && ++value[i] == k) value[i++] = 0;
    if (i == n) break;
  }
  if (!(total > 0.0)) return {};
  for (auto& m : mass)
    for (double& x : m) x /= total;
  return mass;
}

double max_diff(const std::vector<Vector>& a, const std::vector<Vector>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a[i].size(); ++j) worst = std::max(worst, std::abs(a[i][j] - b[i][j]));
  return worst;
}

}  // namespace raketree::testing

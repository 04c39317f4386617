#include "raketree/generate.hpp"

#include <algorithm>
#include <vector>

#include "raketree/errors.hpp"

namespace raketree {

double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

std::size_t uniform_index(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

Matrix random_stochastic(std::size_t rows, std::size_t cols, Rng& rng, double zero_probability) {
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    double sum = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      const double x = uniform01(rng) < zero_probability ? 0.0 : 0.05 + uniform01(rng);
      m(r, c) = x;
      sum += x;
    }
    if (sum == 0.0) {
      m(r, uniform_index(rng, cols)) = 1.0;
      sum = 1.0;
    }
    for (std::size_t c = 0; c < cols; ++c) m(r, c) /= sum;
  }
  return m;
}

Vector random_distribution(std::size_t k, Rng& rng) {
  return random_stochastic(1, k, rng).data();
}

Vector random_likelihood(std::size_t k, Rng& rng) {
  const double pick = uniform01(rng);
  if (pick < 0.4) return indicator(k, uniform_index(rng, k));
  if (pick < 0.6) return ones(k);
  Vector v(k);
  for (double& x : v) x = 0.05 + uniform01(rng);
  return v;
}

Shape parse_shape(const std::string& name) {
  if (name == "chain") return Shape::Chain;
  if (name == "balanced") return Shape::Balanced;
  if (name == "random") return Shape::Random;
  throw UsageError("unknown shape '" + name + "' (expected chain, balanced or random)");
}

std::string shape_name(Shape shape) {
  switch (shape) {
    case Shape::Chain:
      return "chain";
    case Shape::Balanced:
      return "balanced";
    case Shape::Random:
      return "random";
  }
  return "?";
}

namespace {

CausalTree start_tree(std::size_t k, Rng&) {
  CausalTree t(k);
  return t;
}

void attach(CausalTree& t, NodeIndex parent, NodeIndex child, Rng& rng) {
  t.add_edge(parent, child, random_stochastic(t.k(), t.k(), rng));
}

}  // namespace

CausalTree chain_tree(std::size_t internal, std::size_t k, Rng& rng) {
  if (internal == 0) throw DomainError("chain needs at least one internal node");
  CausalTree t = start_tree(k, rng);
  std::vector<NodeIndex> x(internal), e(internal + 1);
  for (std::size_t j = 0; j < internal; ++j) x[j] = t.add_node("x" + std::to_string(j + 1));
  for (std::size_t j = 0; j <= internal; ++j) e[j] = t.add_node("e" + std::to_string(j + 1));
  for (std::size_t j = 0; j < internal; ++j) {
    attach(t, x[j], e[j], rng);
    attach(t, x[j], j + 1 < internal ? x[j + 1] : e[internal], rng);
  }
  t.set_root(x[0]);
  t.set_prior(random_distribution(k, rng));
  return t;
}

CausalTree balanced_tree(std::size_t internal, std::size_t k, Rng& rng) {
  CausalTree t = start_tree(k, rng);
  // Recursive split of the leaf count; explicit stack of (node, leaves).
  const NodeIndex root = t.add_node("n0");
  std::vector<std::pair<NodeIndex, std::size_t>> stack{{root, internal + 1}};
  while (!stack.empty()) {
    auto [node, leaves] = stack.back();
    stack.pop_back();
    if (leaves == 1) continue;
    const std::size_t left = (leaves + 1) / 2;
    const NodeIndex l = t.add_node("n" + std::to_string(t.size()));
    const NodeIndex r = t.add_node("n" + std::to_string(t.size()));
    attach(t, node, l, rng);
    attach(t, node, r, rng);
    stack.push_back({r, leaves - left});
    stack.push_back({l, left});
  }
  t.set_root(root);
  t.set_prior(random_distribution(k, rng));
  return t;
}

CausalTree random_binary_tree(std::size_t internal, std::size_t k, Rng& rng) {
  CausalTree t = start_tree(k, rng);
  const NodeIndex root = t.add_node("n0");
  std::vector<NodeIndex> leaves{root};
  for (std::size_t step = 0; step < internal; ++step) {
    const std::size_t pick = uniform_index(rng, leaves.size());
    const NodeIndex node = leaves[pick];
    leaves[pick] = leaves.back();
    leaves.pop_back();
    const NodeIndex l = t.add_node("n" + std::to_string(t.size()));
    const NodeIndex r = t.add_node("n" + std::to_string(t.size()));
    attach(t, node, l, rng);
    attach(t, node, r, rng);
    leaves.push_back(l);
    leaves.push_back(r);
  }
  t.set_root(root);
  t.set_prior(random_distribution(k, rng));
  return t;
}

CausalTree make_tree(Shape shape, std::size_t internal, std::size_t k, Rng& rng) {
  switch (shape) {
    case Shape::Chain:
      return chain_tree(internal, k, rng);
    case Shape::Balanced:
      return balanced_tree(internal, k, rng);
    case Shape::Random:
      return random_binary_tree(internal, k, rng);
  }
  throw UsageError("unknown shape");
}

CausalTree random_raw_tree(std::size_t nodes, std::size_t k, Rng& rng, std::size_t max_fanout) {
  if (nodes == 0) throw DomainError("tree needs at least one node");
  CausalTree t = start_tree(k, rng);
  t.add_node("n0");
  std::vector<std::size_t> fanout(1, 0);
  for (std::size_t i = 1; i < nodes; ++i) {
    NodeIndex parent;
    do {
      parent = static_cast<NodeIndex>(uniform_index(rng, i));
    } while (fanout[parent] >= max_fanout);
    const NodeIndex c = t.add_node("n" + std::to_string(i));
    fanout.push_back(0);
    ++fanout[parent];
    attach(t, parent, c, rng);
  }
  t.set_root(0);
  t.set_prior(random_distribution(k, rng));
  return t;
}

JoinTree random_join_tree(std::size_t cliques, std::size_t k, std::size_t n, std::size_t c, Rng& rng) {
  if (cliques == 0 || n == 0 || c > n) throw DomainError("join tree needs cliques >= 1 and c <= n");
  JoinTree t(k);
  VarId next_var = 0;
  std::vector<VarId> vars;
  for (std::size_t i = 0; i < n; ++i) vars.push_back(next_var++);
  const std::size_t root = t.add_clique("C0", vars);
  t.set_root(root, random_distribution(domain_size(k, n), rng));
  for (std::size_t i = 1; i < cliques; ++i) {
    const std::size_t parent = uniform_index(rng, i);
    std::vector<VarId> pool = t.node(parent).clique.vars;
    std::shuffle(pool.begin(), pool.end(), rng);
    std::vector<VarId> members(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(c));
    while (members.size() < n) members.push_back(next_var++);
    std::shuffle(members.begin(), members.end(), rng);
    const std::size_t child = t.add_clique("C" + std::to_string(i), members);

    // p(child | sep): random over the child values that agree with the row.
    std::vector<VarId> sep;
    for (VarId v : members)
      if (std::find(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(c), v) !=
          pool.begin() + static_cast<std::ptrdiff_t>(c))
        sep.push_back(v);
    const std::size_t K = domain_size(k, n), L = domain_size(k, c);
    Matrix table(L, K);
    for (std::size_t r = 0; r < L; ++r) {
      double sum = 0.0;
      for (std::size_t v = 0; v < K; ++v) {
        if (project(k, members, v, sep) != r) continue;
        table(r, v) = 0.05 + uniform01(rng);
        sum += table(r, v);
      }
      for (std::size_t v = 0; v < K; ++v) table(r, v) /= sum;
    }
    t.connect(parent, child, std::move(table));
  }
  for (VarId v = 0; v < next_var; ++v) t.attach_evidence(v, t.home(v));
  return t;
}

namespace {

void random_cpts(Polytree& pt, Rng& rng, double zero_probability) {
  for (const auto& v : pt.variables()) {
    pt.set_cpt(v.id, random_stochastic(domain_size(pt.k(), v.parents.size()), pt.k(), rng, zero_probability));
  }
}

}  // namespace

Polytree random_polytree(std::size_t vars, std::size_t k, std::size_t max_parents, Rng& rng,
                         double zero_probability) {
  if (vars == 0) throw DomainError("polytree needs at least one variable");
  Polytree pt(k);
  std::vector<std::vector<VarId>> parents(vars);
  for (std::size_t i = 0; i < vars; ++i) pt.add_variable("v" + std::to_string(i));
  for (std::size_t i = 1; i < vars; ++i) {
    const std::size_t j = uniform_index(rng, i);
    const bool down = uniform01(rng) < 0.5 || max_parents == 0 || parents[j].size() >= max_parents;
    if (down && max_parents > 0) {
      parents[i].push_back(static_cast<VarId>(j));
    } else {
      parents[j].push_back(static_cast<VarId>(i));
    }
  }
  for (std::size_t i = 0; i < vars; ++i) pt.set_parents(static_cast<VarId>(i), parents[i]);
  random_cpts(pt, rng, zero_probability);
  return pt;
}

Polytree family_chain(std::size_t families, std::size_t k, std::size_t p, Rng& rng) {
  if (families == 0 || p == 0) throw DomainError("family chain needs families >= 1 and p >= 1");
  Polytree pt(k);
  VarId previous = pt.add_variable("v0");
  for (std::size_t i = 1; i < families; ++i) {
    std::vector<VarId> parents{previous};
    for (std::size_t j = 1; j < p; ++j) parents.push_back(pt.add_variable("u" + std::to_string(i) + "_" + std::to_string(j)));
    const VarId v = pt.add_variable("v" + std::to_string(i));
    pt.set_parents(v, parents);
    previous = v;
  }
  random_cpts(pt, rng, 0.0);
  return pt;
}

}  // namespace raketree

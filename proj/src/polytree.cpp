#include "raketree/polytree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "raketree/errors.hpp"

namespace raketree {

Polytree::Polytree(std::size_t k) : k_(k) {
  if (k == 0) throw DomainError("domain size must be positive");
}

std::size_t Polytree::index_of(VarId id) const {
  for (std::size_t i = 0; i < vars_.size(); ++i)
    if (vars_[i].id == id) return i;
  throw LookupError("unknown variable " + std::to_string(id));
}

bool Polytree::contains(VarId id) const {
  return std::any_of(vars_.begin(), vars_.end(), [&](const auto& v) { return v.id == id; });
}

const PolytreeVariable& Polytree::variable(VarId id) const { return vars_[index_of(id)]; }

VarId Polytree::add_variable(VarId id, std::string name) {
  if (is_padding(id)) throw DomainError("variable ids must be nonnegative");
  if (contains(id)) throw StructureError("duplicate variable id " + std::to_string(id));
  PolytreeVariable v;
  v.id = id;
  v.name = std::move(name);
  vars_.push_back(std::move(v));
  next_id_ = std::max(next_id_, id + 1);
  return id;
}

VarId Polytree::add_variable(std::string name) { return add_variable(next_id_, std::move(name)); }

void Polytree::set_parents(VarId id, std::vector<VarId> parents) {
  for (VarId p : parents) {
    if (!contains(p)) throw LookupError("unknown parent " + std::to_string(p));
    if (p == id) throw StructureError("variable " + std::to_string(id) + " is its own parent");
  }
  auto sorted = parents;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw StructureError("variable " + std::to_string(id) + " lists a parent twice");
  }
  vars_[index_of(id)].parents = std::move(parents);
}

void Polytree::set_cpt(VarId id, Matrix cpt) { vars_[index_of(id)].cpt = std::move(cpt); }

std::size_t Polytree::max_in_degree() const {
  std::size_t p = 0;
  for (const auto& v : vars_) p = std::max(p, v.parents.size());
  return p;
}

std::vector<VarId> Polytree::topological_order() const {
  const std::size_t n = vars_.size();
  std::vector<std::size_t> pending(n);
  std::vector<std::vector<std::size_t>> children(n);
  for (std::size_t i = 0; i < n; ++i) {
    pending[i] = vars_[i].parents.size();
    for (VarId p : vars_[i].parents) children[index_of(p)].push_back(i);
  }
  std::vector<VarId> order;
  std::vector<std::size_t> ready;
  for (std::size_t i = n; i-- > 0;)
    if (pending[i] == 0) ready.push_back(i);
  while (!ready.empty()) {
    const std::size_t i = ready.back();
    ready.pop_back();
    order.push_back(vars_[i].id);
    for (auto it = children[i].rbegin(); it != children[i].rend(); ++it)
      if (--pending[*it] == 0) ready.push_back(*it);
  }
  if (order.size() != n) throw StructureError("polytree has a directed cycle");
  return order;
}

std::vector<Violation> validate(const Polytree& pt) {
  std::vector<Violation> out;
  const std::size_t k = pt.k();
  std::size_t edges = 0;
  for (const auto& v : pt.variables()) {
    edges += v.parents.size();
    const std::size_t rows = domain_size(k, v.parents.size());
    if (v.cpt.rows() != rows || v.cpt.cols() != k) {
      out.push_back({"dimension", v.name, "table must be " + std::to_string(rows) + " x " + std::to_string(k)});
      continue;
    }
    for (std::size_t r = 0; r < rows; ++r) {
      double sum = 0.0;
      bool in_range = true;
      for (double x : v.cpt.row(r)) {
        sum += x;
        in_range = in_range && x >= 0.0 && x <= 1.0;
      }
      if (!in_range || std::abs(sum - 1.0) > 1e-9) {
        out.push_back({"stochastic", v.name, "row " + std::to_string(r) + " is not a distribution"});
        break;
      }
    }
  }
  if (pt.size() == 0) {
    out.push_back({"connectivity", "", "polytree has no variables"});
    return out;
  }
  try {
    pt.topological_order();
  } catch (const StructureError& e) {
    out.push_back({"cycle", "", e.what()});
    return out;
  }
  // Singly connected: the undirected skeleton is a spanning tree.
  const std::size_t n = pt.size();
  std::vector<std::size_t> root(n);
  std::iota(root.begin(), root.end(), 0);
  auto find = [&](std::size_t x) {
    while (root[x] != x) x = root[x] = root[root[x]];
    return x;
  };
  for (std::size_t i = 0; i < n; ++i) {
    for (VarId p : pt.variables()[i].parents) {
      const std::size_t a = find(i), b = find(pt.index_of(p));
      if (a == b) {
        out.push_back({"connectivity", pt.variables()[i].name, "underlying graph has a cycle through this node"});
        return out;
      }
      root[a] = b;
    }
  }
  if (edges != n - 1) out.push_back({"connectivity", "", "underlying graph is not connected"});
  return out;
}

namespace {

// p(v, parents) over the family clique [v, parents...], v most significant.
Vector family_joint(const Polytree& pt, std::size_t i, const std::vector<Vector>& marginal) {
  const std::size_t k = pt.k();
  const auto& var = pt.variables()[i];
  const std::size_t p = var.parents.size();
  const std::size_t rows = domain_size(k, p);
  Vector out(k * rows, 0.0);
  for (std::size_t row = 0; row < rows; ++row) {
    double weight = 1.0;
    std::size_t rest = row;
    for (std::size_t j = p; j-- > 0;) {
      weight *= marginal[pt.index_of(var.parents[j])][rest % k];
      rest /= k;
    }
    for (std::size_t x = 0; x < k; ++x) out[x * rows + row] = weight * var.cpt(row, x);
  }
  return out;
}

}  // namespace

std::vector<Vector> prior_marginals(const Polytree& pt) {
  const std::size_t k = pt.k();
  std::vector<Vector> marginal(pt.size());
  for (VarId id : pt.topological_order()) {
    const std::size_t i = pt.index_of(id);
    const Vector joint = family_joint(pt, i, marginal);
    const std::size_t rows = joint.size() / k;
    Vector m(k, 0.0);
    for (std::size_t x = 0; x < k; ++x)
      for (std::size_t r = 0; r < rows; ++r) m[x] += joint[x * rows + r];
    marginal[i] = std::move(m);
  }
  return marginal;
}

PolytreePlan to_join_tree(const Polytree& pt, const PolytreeOptions& options) {
  if (pt.max_in_degree() > options.max_parents) {
    throw ScaleError("in-degree " + std::to_string(pt.max_in_degree()) + " exceeds the configured maximum of " +
                     std::to_string(options.max_parents));
  }
  const auto violations = validate(pt);
  if (!violations.empty()) {
    const auto& v = violations.front();
    throw StructureError("invalid polytree (" + v.rule + (v.where.empty() ? "" : " at " + v.where) + "): " + v.message);
  }
  const std::size_t k = pt.k();
  const std::size_t n = pt.size();
  const auto marginal = prior_marginals(pt);

  PolytreePlan plan{JoinTree(k), std::vector<std::size_t>(n)};
  std::vector<std::vector<VarId>> members(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& var = pt.variables()[i];
    members[i] = {var.id};
    members[i].insert(members[i].end(), var.parents.begin(), var.parents.end());
    plan.family[i] = plan.tree.add_clique("F" + var.name, members[i]);
  }

  // Skeleton adjacency between families: v -- parent a.
  std::vector<std::vector<std::size_t>> adjacent(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (VarId p : pt.variables()[i].parents) {
      adjacent[i].push_back(pt.index_of(p));
      adjacent[pt.index_of(p)].push_back(i);
    }
  }
  std::size_t root = n;
  for (std::size_t i = 0; i < n && root == n; ++i)
    if (pt.variables()[i].parents.empty()) root = i;

  plan.tree.set_root(plan.family[root], family_joint(pt, root, marginal));
  std::vector<std::uint8_t> seen(n, 0);
  std::vector<std::size_t> queue{root};
  seen[root] = 1;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const std::size_t u = queue[head];
    for (std::size_t c : adjacent[u]) {
      if (seen[c]) continue;
      seen[c] = 1;
      queue.push_back(c);
      // The separator is the single variable shared by the two families.
      VarId shared = -1;
      for (VarId v : members[c])
        if (std::find(members[u].begin(), members[u].end(), v) != members[u].end()) shared = v;
      const Vector joint = family_joint(pt, c, marginal);
      const Vector& sep_marginal = marginal[pt.index_of(shared)];
      const std::size_t K = joint.size();
      const std::size_t pos = static_cast<std::size_t>(
          std::find(members[c].begin(), members[c].end(), shared) - members[c].begin());
      CliqueNode node{k, members[c], {shared}};
      Matrix table(k, K);
      for (std::size_t s = 0; s < k; ++s) {
        std::size_t consistent = 0;
        for (std::size_t v = 0; v < K; ++v) consistent += node.digit(v, pos) == s;
        for (std::size_t v = 0; v < K; ++v) {
          if (node.digit(v, pos) != s) continue;
          // A separator value of prior probability zero never carries mass;
          // its row only needs to be a distribution.
          table(s, v) = sep_marginal[s] > 0.0 ? joint[v] / sep_marginal[s] : 1.0 / static_cast<double>(consistent);
        }
        double sum = 0.0;
        for (double x : table.row(s)) sum += x;
        for (std::size_t v = 0; v < K; ++v) table(s, v) /= sum;
      }
      plan.tree.connect(plan.family[u], plan.family[c], std::move(table));
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    const VarId id = pt.variables()[i].id;
    plan.tree.set_home(id, plan.family[i]);
    plan.tree.attach_evidence(id, plan.family[i]);
  }
  return plan;
}

PolytreeEngine::PolytreeEngine(const Polytree& pt, JoinRepresentation representation, const PolytreeOptions& options)
    : pt_(pt), plan_(to_join_tree(pt, options)), engine_(plan_.tree, representation) {}

std::size_t PolytreeEngine::family_of(VarId var) const { return plan_.family[pt_.index_of(var)]; }

std::vector<std::size_t> PolytreeEngine::cliques_containing(VarId var) const {
  pt_.index_of(var);
  std::vector<std::size_t> out;
  for (std::size_t f : plan_.family)
    if (plan_.tree.node(f).clique.contains(var)) out.push_back(f);
  return out;
}

std::size_t PolytreeEngine::pt_update(VarId var, const Vector& likelihood) {
  pt_.index_of(var);
  return engine_.update_variable(var, likelihood);
}

Vector PolytreeEngine::pt_query(VarId var) const { return engine_.variable_belief(var, family_of(var)); }

Vector PolytreeEngine::pt_query(VarId var, std::size_t clique) const {
  pt_.index_of(var);
  return engine_.variable_belief(var, clique);
}

}  // namespace raketree

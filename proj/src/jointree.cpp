#include "raketree/jointree.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "raketree/errors.hpp"

namespace raketree {

namespace {

constexpr std::size_t kNone = SIZE_MAX;

std::vector<VarId> sorted(std::vector<VarId> v) {
  std::sort(v.begin(), v.end());
  return v;
}

std::string var_list(const std::vector<VarId>& vars) {
  std::string out = "{";
  for (std::size_t i = 0; i < vars.size(); ++i) out += (i ? "," : "") + std::to_string(vars[i]);
  return out + "}";
}

Violation violation(const std::string& rule, const JoinNode& node, const std::string& message) {
  return {rule, node.name, message};
}

}  // namespace

std::size_t domain_size(std::size_t k, std::size_t n) {
  std::size_t out = 1;
  for (std::size_t i = 0; i < n; ++i) {
    if (out > SIZE_MAX / k) throw ScaleError("clique domain overflows");
    out *= k;
  }
  return out;
}

std::size_t CliqueNode::K() const { return domain_size(k, vars.size()); }
std::size_t CliqueNode::L() const { return domain_size(k, sep.size()); }

bool CliqueNode::contains(VarId v) const { return std::find(vars.begin(), vars.end(), v) != vars.end(); }

std::size_t CliqueNode::position(VarId v) const {
  auto it = std::find(vars.begin(), vars.end(), v);
  if (it == vars.end()) throw LookupError("variable " + std::to_string(v) + " is not in clique " + var_list(vars));
  return static_cast<std::size_t>(it - vars.begin());
}

std::size_t CliqueNode::digit(std::size_t value, std::size_t pos) const {
  for (std::size_t i = pos + 1; i < vars.size(); ++i) value /= k;
  return value % k;
}

std::size_t project(std::size_t k, std::span<const VarId> from, std::size_t value, std::span<const VarId> to) {
  std::vector<std::size_t> digits(from.size());
  for (std::size_t i = from.size(); i-- > 0;) {
    digits[i] = value % k;
    value /= k;
  }
  std::size_t out = 0;
  for (VarId v : to) {
    auto it = std::find(from.begin(), from.end(), v);
    if (it == from.end()) throw StructureError("projection target variable " + std::to_string(v) + " missing");
    out = out * k + digits[static_cast<std::size_t>(it - from.begin())];
  }
  return out;
}

Matrix FactoredMatrix::product(OpCounts* counts) const { return matmul(*left, right, counts); }

Vector select_rows(const std::vector<std::uint32_t>& columns, std::span<const double> v, OpCounts* counts) {
  Vector out(columns.size());
  for (std::size_t r = 0; r < columns.size(); ++r) out[r] = v[columns[r]];
  if (counts) ++counts->mat_vec;
  return out;
}

Vector select_transposed(const std::vector<std::uint32_t>& columns, std::size_t width, std::span<const double> v,
                         OpCounts* counts) {
  if (v.size() != columns.size()) throw DimensionError("selection transpose: vector length mismatch");
  Vector out(width, 0.0);
  for (std::size_t r = 0; r < columns.size(); ++r) out[columns[r]] += v[r];
  if (counts) {
    ++counts->mat_vec;
    counts->flops += columns.size();
  }
  return out;
}

Matrix merge_columns(const Matrix& m, const std::vector<std::uint32_t>& columns, std::size_t width,
                     OpCounts* counts) {
  if (m.cols() != columns.size()) throw DimensionError("selection product: inner dimension mismatch");
  Matrix out(m.rows(), width);
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t r = 0; r < columns.size(); ++r) out(i, columns[r]) += m(i, r);
  if (counts) {
    ++counts->mat_mat;
    counts->flops += m.rows() * m.cols();
  }
  return out;
}

Matrix selection_matrix(std::size_t k, std::span<const VarId> parent_vars, std::span<const VarId> sep) {
  const std::size_t rows = domain_size(k, parent_vars.size());
  Matrix j(rows, domain_size(k, sep.size()));
  for (std::size_t r = 0; r < rows; ++r) j(r, project(k, parent_vars, r, sep)) = 1.0;
  return j;
}

FactoredMatrix build_projection(const CliqueNode& clique, const CliqueNode& parent, Matrix table) {
  for (VarId v : clique.sep) {
    if (!clique.contains(v) || !parent.contains(v)) {
      throw StructureError("separator variable " + std::to_string(v) + " is not shared with the parent clique");
    }
  }
  if (table.rows() != clique.L() || table.cols() != clique.K()) {
    throw DimensionError("conditional table must be " + std::to_string(clique.L()) + " x " +
                         std::to_string(clique.K()));
  }
  Matrix j = selection_matrix(clique.k, parent.vars, clique.sep);
  std::vector<std::uint32_t> columns(j.rows());
  for (std::size_t r = 0; r < j.rows(); ++r)
    for (std::size_t c = 0; c < j.cols(); ++c)
      if (j(r, c) != 0.0) columns[r] = static_cast<std::uint32_t>(c);
  return {std::make_shared<const Matrix>(std::move(j)),
          std::make_shared<const std::vector<std::uint32_t>>(std::move(columns)), std::move(table)};
}

FactoredMatrix factored_rake(const FactoredMatrix& target, const FactoredMatrix& leaf_edge,
                             const FactoredMatrix& keep_edge, std::span<const double> leaf_lambda,
                             OpCounts* counts) {
  const Vector w = FactoredAlgebra::apply(leaf_edge, leaf_lambda, counts);
  Matrix right = matmul(merge_columns(scale_columns(target.right, w, counts), *keep_edge.columns, keep_edge.inner(), counts),
                        keep_edge.right, counts);
  rescale_if_tiny(right);
  return {target.left, target.columns, std::move(right)};
}

bool FactoredAlgebra::bitwise_equal(const Matrix& a, const Matrix& b) {
  const bool same_left = a.left == b.left || (a.left && b.left && a.left->bitwise_equal(*b.left));
  return same_left && a.right.bitwise_equal(b.right);
}

Vector clique_evidence(const CliqueNode& clique, VarId var, const Vector& likelihood) {
  const std::size_t pos = clique.position(var);
  if (likelihood.size() != clique.k) throw DimensionError("variable likelihood must have length k");
  const std::size_t K = clique.K();
  Vector out(K);
  for (std::size_t v = 0; v < K; ++v) out[v] = likelihood[clique.digit(v, pos)];
  return out;
}

Vector marginalize(const Vector& belief, const CliqueNode& clique, VarId var) {
  const std::size_t pos = clique.position(var);
  if (belief.size() != clique.K()) throw DimensionError("clique belief has the wrong length");
  Vector out(clique.k, 0.0);
  for (std::size_t v = 0; v < belief.size(); ++v) out[clique.digit(v, pos)] += belief[v];
  return normalize(out);
}

JoinTree::JoinTree(std::size_t k) : k_(k) {
  if (k == 0) throw DomainError("domain size must be positive");
}

std::size_t JoinTree::add_node(JoinNode node) {
  node.clique.k = k_;
  nodes_.push_back(std::move(node));
  return nodes_.size() - 1;
}

std::size_t JoinTree::add_clique(std::string name, std::vector<VarId> vars) {
  for (VarId v : vars)
    if (is_padding(v)) throw DomainError("variable ids must be nonnegative");
  if (sorted(vars) != [&] {
        auto u = sorted(vars);
        u.erase(std::unique(u.begin(), u.end()), u.end());
        return u;
      }()) {
    throw StructureError("clique " + name + " lists a variable twice");
  }
  JoinNode node;
  node.name = std::move(name);
  node.clique.vars = std::move(vars);
  return add_node(std::move(node));
}

void JoinTree::connect(std::size_t parent, std::size_t child, Matrix table) {
  if (parent >= nodes_.size() || child >= nodes_.size()) throw LookupError("join tree edge endpoint out of range");
  if (parent == child) throw StructureError("self loop at " + nodes_[parent].name);
  JoinNode& c = nodes_[child];
  if (c.parent != kNone) throw StructureError("clique " + c.name + " has more than one parent");
  c.clique.sep.clear();
  for (VarId v : c.clique.vars)
    if (nodes_[parent].clique.contains(v)) c.clique.sep.push_back(v);
  if (table.rows() != c.clique.L() || table.cols() != c.clique.K()) {
    throw DimensionError("table for " + c.name + " must be " + std::to_string(c.clique.L()) + " x " +
                         std::to_string(c.clique.K()));
  }
  c.parent = parent;
  c.table = std::move(table);
  nodes_[parent].children.push_back(child);
}

void JoinTree::set_root(std::size_t root, Vector prior) {
  if (root >= nodes_.size()) throw LookupError("root out of range");
  if (prior.size() != nodes_[root].clique.K()) throw DimensionError("root prior must have one entry per clique value");
  root_ = root;
  prior_ = std::move(prior);
}

std::size_t JoinTree::attach_evidence(VarId var, std::size_t clique) {
  if (!nodes_.at(clique).clique.contains(var)) {
    throw StructureError("variable " + std::to_string(var) + " is not in clique " + nodes_[clique].name);
  }
  JoinNode leaf;
  leaf.name = "e_" + std::to_string(var);
  leaf.kind = JoinNodeKind::Evidence;
  leaf.clique.vars = {var};
  leaf.evidence_var = var;
  const std::size_t i = add_node(std::move(leaf));
  connect(clique, i, Matrix::identity(k_));
  return i;
}

void JoinTree::set_evidence(std::size_t leaf, Vector likelihood) {
  JoinNode& n = nodes_.at(leaf);
  if (!n.children.empty()) throw UsageError("evidence target " + n.name + " is not a leaf");
  if (n.kind == JoinNodeKind::Dummy) throw UsageError("evidence target " + n.name + " is a dummy leaf");
  if (likelihood.size() != n.clique.K()) throw DimensionError("likelihood for " + n.name + " has the wrong length");
  for (double x : likelihood)
    if (!(x >= 0.0) || !std::isfinite(x)) throw DomainError("likelihood entries must be finite and nonnegative");
  n.evidence = std::move(likelihood);
}

Vector JoinTree::likelihood(std::size_t i) const {
  const JoinNode& n = nodes_.at(i);
  return n.evidence ? *n.evidence : ones(n.clique.K());
}

FactoredMatrix JoinTree::edge_factored(std::size_t child) const {
  const JoinNode& c = nodes_.at(child);
  if (c.parent == kNone) throw StructureError(c.name + " has no parent edge");
  return build_projection(c.clique, nodes_[c.parent].clique, c.table);
}

Matrix JoinTree::edge_product(std::size_t child) const { return edge_factored(child).product(); }

bool JoinTree::is_binary() const {
  for (const auto& n : nodes_)
    if (!n.children.empty() && n.children.size() != 2) return false;
  return true;
}

std::vector<std::size_t> JoinTree::preorder() const {
  std::vector<std::size_t> out;
  if (root_ == kNone) return out;
  std::vector<std::uint8_t> seen(nodes_.size(), 0);
  std::vector<std::size_t> stack{root_};
  while (!stack.empty()) {
    const std::size_t x = stack.back();
    stack.pop_back();
    if (seen[x]) throw StructureError("join tree contains a cycle");
    seen[x] = 1;
    out.push_back(x);
    const auto& ch = nodes_[x].children;
    for (auto it = ch.rbegin(); it != ch.rend(); ++it) stack.push_back(*it);
  }
  return out;
}

std::size_t JoinTree::home(VarId var) const {
  for (const auto& [v, c] : home_)
    if (v == var) return c;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].kind == JoinNodeKind::Clique && nodes_[i].clique.contains(var)) return i;
  }
  throw LookupError("unknown variable " + std::to_string(var));
}

void JoinTree::set_home(VarId var, std::size_t clique) {
  if (!nodes_.at(clique).clique.contains(var)) throw StructureError("home clique must contain the variable");
  for (auto& [v, c] : home_) {
    if (v == var) {
      c = clique;
      return;
    }
  }
  home_.emplace_back(var, clique);
}

std::vector<VarId> JoinTree::variables() const {
  std::vector<VarId> out;
  for (const auto& n : nodes_)
    if (n.kind == JoinNodeKind::Clique)
      for (VarId v : n.clique.vars)
        if (!is_padding(v)) out.push_back(v);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::optional<std::size_t> JoinTree::evidence_leaf(VarId var) const {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].kind == JoinNodeKind::Evidence && nodes_[i].evidence_var == var) return i;
  }
  return std::nullopt;
}

std::vector<Violation> validate(const JoinTree& tree) {
  std::vector<Violation> out;
  const auto& nodes = tree.nodes();
  if (tree.root() == kNone || tree.root() >= nodes.size()) {
    out.push_back({"root", "", "join tree has no root"});
    return out;
  }
  const JoinNode& root = nodes[tree.root()];
  if (root.parent != kNone) out.push_back(violation("root", root, "root has a parent"));
  if (tree.prior().size() != root.clique.K()) {
    out.push_back(violation("dimension", root, "prior length differs from the root clique domain"));
  } else {
    double sum = 0.0;
    for (double p : tree.prior()) sum += p;
    if (std::abs(sum - 1.0) > 1e-9) out.push_back(violation("prior", root, "prior does not sum to 1"));
  }

  std::vector<std::size_t> order;
  try {
    order = tree.preorder();
  } catch (const StructureError& e) {
    out.push_back({"link", "", e.what()});
    return out;
  }
  if (order.size() != nodes.size()) out.push_back({"reachability", "", "some cliques are unreachable from the root"});

  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const JoinNode& n = nodes[i];
    for (std::size_t c : n.children) {
      if (nodes[c].parent != i) out.push_back(violation("link", nodes[c], "child does not point back to " + n.name));
    }
    if (n.evidence && !n.children.empty()) out.push_back(violation("evidence", n, "evidence on a non-leaf"));
    if (n.evidence && n.evidence->size() != n.clique.K()) out.push_back(violation("dimension", n, "evidence length"));
    if (n.parent == kNone) continue;
    const JoinNode& p = nodes[n.parent];
    std::vector<VarId> shared;
    for (VarId v : n.clique.vars)
      if (p.clique.contains(v)) shared.push_back(v);
    if (shared != n.clique.sep) out.push_back(violation("intersection", n, "separator differs from the shared variables"));
    if (n.table.rows() != n.clique.L() || n.table.cols() != n.clique.K()) {
      out.push_back(violation("dimension", n, "table must be L x K"));
      continue;
    }
    for (std::size_t r = 0; r < n.table.rows(); ++r) {
      double sum = 0.0;
      bool in_range = true;
      for (double x : n.table.row(r)) {
        sum += x;
        in_range = in_range && x >= 0.0 && x <= 1.0;
      }
      if (!in_range || std::abs(sum - 1.0) > 1e-9) {
        out.push_back(violation("stochastic", n, "row " + std::to_string(r) + " of the table is not a distribution"));
        break;
      }
    }
  }

  // Running intersection: the cliques holding a variable form a subtree.
  std::map<VarId, std::pair<std::size_t, std::size_t>> holders;  // var -> (nodes, edges)
  for (const JoinNode& n : nodes) {
    for (VarId v : n.clique.vars) {
      auto& h = holders[v];
      ++h.first;
      if (n.parent != kNone && nodes[n.parent].clique.contains(v)) ++h.second;
    }
  }
  for (const auto& [v, h] : holders) {
    if (h.first != h.second + 1) {
      out.push_back({"intersection", "variable " + std::to_string(v), "cliques holding the variable are not connected"});
    }
  }
  return out;
}

namespace {

JoinNode projection_node(const JoinNode& parent, std::vector<VarId> vars, std::size_t k) {
  JoinNode p;
  p.name = parent.name + "'";
  p.kind = JoinNodeKind::Projection;
  p.clique.k = k;
  p.clique.vars = std::move(vars);
  return p;
}

}  // namespace

JoinTree binarize(const JoinTree& raw) {
  const auto violations = validate(raw);
  if (!violations.empty()) {
    const auto& v = violations.front();
    throw StructureError("invalid join tree (" + v.rule + " at " + v.where + "): " + v.message);
  }
  JoinTree out = raw;
  const std::size_t k = raw.k();

  auto relink = [&](std::size_t parent, std::size_t child) {
    JoinNode& c = out.nodes_[child];
    c.parent = parent;
    c.clique.sep.clear();
    for (VarId v : c.clique.vars)
      if (out.nodes_[parent].clique.contains(v)) c.clique.sep.push_back(v);
    out.nodes_[parent].children.push_back(child);
  };
  auto new_projection = [&](std::size_t parent_of_vars, std::vector<VarId> vars) {
    JoinNode p = projection_node(out.nodes_[parent_of_vars], std::move(vars), k);
    p.table = Matrix::identity(p.clique.K());
    return out.add_node(std::move(p));
  };
  // Hangs `items` under `parent` as a right spine of projections.
  auto spine = [&](std::size_t parent, const std::vector<std::size_t>& items) {
    std::size_t at = parent;
    for (std::size_t i = 0; i < items.size(); ++i) {
      const std::size_t remaining = items.size() - i;
      if (remaining <= 2) {
        for (std::size_t j = i; j < items.size(); ++j) relink(at, items[j]);
        break;
      }
      relink(at, items[i]);
      std::vector<VarId> vars;
      for (VarId v : out.nodes_[parent].clique.vars) {
        for (std::size_t j = i + 1; j < items.size(); ++j) {
          const auto& n = out.nodes_[items[j]].clique;
          const bool shared = n.contains(v);
          if (shared) {
            vars.push_back(v);
            break;
          }
        }
      }
      const std::size_t next = new_projection(parent, std::move(vars));
      relink(at, next);
      at = next;
    }
  };

  const std::size_t original = raw.size();
  for (std::size_t i = 0; i < original; ++i) {
    const std::vector<std::size_t> children = raw.node(i).children;
    if (children.empty() || children.size() == 2) continue;
    out.nodes_[i].children.clear();
    if (children.size() == 1) {
      relink(i, children[0]);
      JoinNode d;
      d.name = raw.node(i).name + "~dummy";
      d.kind = JoinNodeKind::Dummy;
      d.table = Matrix(1, 1, {1.0});
      relink(i, out.add_node(std::move(d)));
      continue;
    }

    // Group by separator, in order of first appearance.
    std::vector<std::vector<VarId>> keys;
    std::vector<std::vector<std::size_t>> groups;
    for (std::size_t c : children) {
      const auto key = sorted(raw.node(c).clique.sep);
      auto it = std::find(keys.begin(), keys.end(), key);
      if (it == keys.end()) {
        keys.push_back(key);
        groups.push_back({c});
      } else {
        groups[static_cast<std::size_t>(it - keys.begin())].push_back(c);
      }
    }
    if (groups.size() == 1) {
      spine(i, children);
      continue;
    }
    std::vector<std::size_t> items;
    for (const auto& g : groups) {
      if (g.size() == 1) {
        items.push_back(g[0]);
        continue;
      }
      std::vector<VarId> vars;
      for (VarId v : raw.node(i).clique.vars)
        if (std::find(raw.node(g[0]).clique.sep.begin(), raw.node(g[0]).clique.sep.end(), v) !=
            raw.node(g[0]).clique.sep.end())
          vars.push_back(v);
      const std::size_t hub = new_projection(i, std::move(vars));
      spine(hub, g);
      items.push_back(hub);
    }
    spine(i, items);
  }
  return out;
}

JoinTree pad_cliques(const JoinTree& tree) {
  std::size_t n = 0;
  VarId lowest = 0;
  for (const auto& node : tree.nodes()) {
    n = std::max(n, node.clique.vars.size());
    for (VarId v : node.clique.vars) lowest = std::min(lowest, v);
  }
  JoinTree out = tree;
  const std::size_t k = tree.k();
  VarId next = lowest - 1;
  for (std::size_t i = 0; i < out.nodes_.size(); ++i) {
    JoinNode& node = out.nodes_[i];
    const std::size_t d = n - node.clique.vars.size();
    if (d == 0) continue;
    const std::size_t factor = domain_size(k, d);
    const std::size_t K = node.clique.K();
    for (std::size_t j = 0; j < d; ++j) node.clique.vars.push_back(next--);
    if (!node.table.empty()) {
      Matrix table(node.table.rows(), K * factor);
      for (std::size_t r = 0; r < table.rows(); ++r)
        for (std::size_t v = 0; v < K; ++v) table(r, v * factor) = node.table(r, v);
      node.table = std::move(table);
    }
    if (node.evidence) {
      Vector lifted(K * factor);
      for (std::size_t v = 0; v < lifted.size(); ++v) lifted[v] = (*node.evidence)[v / factor];
      node.evidence = std::move(lifted);
    }
    if (i == out.root_) {
      Vector prior(K * factor, 0.0);
      for (std::size_t v = 0; v < K; ++v) prior[v * factor] = out.prior_[v];
      out.prior_ = std::move(prior);
    }
  }
  return out;
}

BinaryTopology topology_of(const JoinTree& tree) {
  if (!tree.is_binary()) throw StructureError("join tree is not binary complete");
  BinaryTopology t;
  const std::size_t n = tree.size();
  t.root = static_cast<NodeIndex>(tree.root());
  t.parent.assign(n, kNoNode);
  t.left.assign(n, kNoNode);
  t.right.assign(n, kNoNode);
  for (std::size_t i = 0; i < n; ++i) {
    const JoinNode& x = tree.node(i);
    if (x.parent != kNone) t.parent[i] = static_cast<NodeIndex>(x.parent);
    if (!x.children.empty()) {
      t.left[i] = static_cast<NodeIndex>(x.children[0]);
      t.right[i] = static_cast<NodeIndex>(x.children[1]);
    }
  }
  return t;
}

Propagation full_propagation(const JoinTree& tree, OpCounts* counts) {
  const auto order = tree.preorder();
  if (order.empty()) throw StructureError("join tree has no root");
  const std::size_t n = tree.size();
  std::vector<Matrix> edge(n);
  for (std::size_t i = 0; i < n; ++i)
    if (tree.node(i).parent != kNone) edge[i] = tree.edge_product(i);

  Propagation out;
  out.lambda.assign(n, {});
  out.pi.assign(n, {});
  out.belief.assign(n, {});
  std::vector<Vector> message(n);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const std::size_t x = *it;
    Vector lambda = tree.likelihood(x);
    for (std::size_t c : tree.node(x).children) hadamard_inplace(lambda, message[c]);
    rescale_if_tiny(lambda);
    if (tree.node(x).parent != kNone) message[x] = apply(edge[x], lambda, counts);
    out.lambda[x] = std::move(lambda);
  }
  out.pi[tree.root()] = tree.prior();
  for (std::size_t x : order) {
    const auto& children = tree.node(x).children;
    Vector base = hadamard(out.pi[x], tree.likelihood(x));
    for (std::size_t c : children) {
      Vector v = base;
      for (std::size_t s : children)
        if (s != c) hadamard_inplace(v, message[s]);
      Vector pi = apply_transposed(edge[c], v, counts);
      rescale_if_tiny(pi);
      out.pi[c] = std::move(pi);
    }
  }
  for (std::size_t x : order) {
    try {
      out.belief[x] = normalize(hadamard(out.lambda[x], out.pi[x]));
    } catch (const InconsistentEvidence&) {
      throw InconsistentEvidence("inconsistent evidence at clique " + tree.node(x).name);
    }
  }
  return out;
}

namespace {

std::variant<FactoredEngine, DenseEngine> make_engine(const JoinTree& tree, JoinRepresentation rep,
                                                      OpCounts* counts) {
  const std::size_t n = tree.size();
  std::vector<Vector> lambda(n);
  for (std::size_t i = 0; i < n; ++i) lambda[i] = tree.likelihood(i);
  if (rep == JoinRepresentation::Factored) {
    std::vector<FactoredMatrix> edges(n);
    for (std::size_t i = 0; i < n; ++i)
      if (i != tree.root()) edges[i] = tree.edge_factored(i);
    return FactoredEngine(topology_of(tree), std::move(edges), std::move(lambda), tree.prior(), counts);
  }
  std::vector<Matrix> edges(n);
  for (std::size_t i = 0; i < n; ++i)
    if (i != tree.root()) edges[i] = tree.edge_product(i);
  return DenseEngine(topology_of(tree), std::move(edges), std::move(lambda), tree.prior(), counts);
}

}  // namespace

JoinTreeEngine::JoinTreeEngine(JoinTree tree, JoinRepresentation representation)
    : tree_(pad_cliques(binarize(tree))),
      representation_(representation),
      engine_(make_engine(tree_, representation, &build_counts_)) {}

std::size_t JoinTreeEngine::level_count() const {
  return std::visit([](const auto& e) { return e.hierarchy().level_count(); }, engine_);
}

bool JoinTreeEngine::matches_rebuild() const {
  return std::visit([](const auto& e) { return e.hierarchy().matches_rebuild(); }, engine_);
}

std::size_t JoinTreeEngine::update_leaf(std::size_t leaf, Vector likelihood) {
  tree_.set_evidence(leaf, std::move(likelihood));
  OpCounts local;
  const auto chain = std::visit(
      [&](auto& e) { return e.update(static_cast<NodeIndex>(leaf), tree_.likelihood(leaf), &local); }, engine_);
  counts_ += local;
  return chain.size();
}

std::size_t JoinTreeEngine::update_variable(VarId var, const Vector& likelihood) {
  const auto leaf = tree_.evidence_leaf(var);
  if (!leaf) throw LookupError("variable " + std::to_string(var) + " has no evidence leaf");
  return update_leaf(*leaf, clique_evidence(tree_.node(*leaf).clique, var, likelihood));
}

Vector JoinTreeEngine::clique_belief(std::size_t node) const {
  if (node >= tree_.size()) throw LookupError("unknown clique index " + std::to_string(node));
  OpCounts local;
  Vector out = std::visit([&](const auto& e) { return e.belief(static_cast<NodeIndex>(node), &local); }, engine_);
  counts_ += local;
  return out;
}

Vector JoinTreeEngine::variable_belief(VarId var) const { return variable_belief(var, tree_.home(var)); }

Vector JoinTreeEngine::variable_belief(VarId var, std::size_t clique) const {
  return marginalize(clique_belief(clique), tree_.node(clique).clique, var);
}

}  // namespace raketree

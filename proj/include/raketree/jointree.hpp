#pragma once

// Join trees directed away from a root clique. Each edge is stored as the
// product of a 0/1 selection matrix (parent clique value -> separator value)
// and the separator-conditioned table, and the contraction hierarchy rakes in
// that factored form.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "raketree/contract.hpp"
#include "raketree/dynamic.hpp"
#include "raketree/exact.hpp"
#include "raketree/linalg.hpp"
#include "raketree/tree.hpp"

namespace raketree {

// Model variables have ids >= 0; padding variables get negative ids and are
// fixed at value 0.
using VarId = int;
constexpr bool is_padding(VarId v) { return v < 0; }

// Mixed-radix value encoding over `vars`, first variable most significant.
struct CliqueNode {
  std::size_t k = 2;
  std::vector<VarId> vars;
  std::vector<VarId> sep;  // shared with the parent clique, in `vars` order

  std::size_t K() const;
  std::size_t L() const;
  bool contains(VarId v) const;
  std::size_t position(VarId v) const;  // throws LookupError
  std::size_t digit(std::size_t value, std::size_t pos) const;
};

std::size_t domain_size(std::size_t k, std::size_t n);
// Value over `to` of the assignment `value` over `from`; to must be a subset.
std::size_t project(std::size_t k, std::span<const VarId> from, std::size_t value, std::span<const VarId> to);

// Every left factor is a 0/1 selection (one 1 per row), so it is applied by
// indexing: `columns[r]` is the column holding row r's 1.
struct FactoredMatrix {
  std::shared_ptr<const Matrix> left;  // K x L
  std::shared_ptr<const std::vector<std::uint32_t>> columns;
  Matrix right;                        // L x K'

  std::size_t rows() const { return left ? left->rows() : 0; }
  std::size_t inner() const { return right.rows(); }
  std::size_t cols() const { return right.cols(); }
  Matrix product(OpCounts* counts = nullptr) const;
};

// Selection-matrix kernels: gather (no arithmetic), scatter-add and
// column merging (one addition per entry).
Vector select_rows(const std::vector<std::uint32_t>& columns, std::span<const double> v, OpCounts* counts);
Vector select_transposed(const std::vector<std::uint32_t>& columns, std::size_t width, std::span<const double> v,
                         OpCounts* counts);
Matrix merge_columns(const Matrix& m, const std::vector<std::uint32_t>& columns, std::size_t width,
                     OpCounts* counts);

// Selection matrix: row r has its single 1 at the separator value of r.
Matrix selection_matrix(std::size_t k, std::span<const VarId> parent_vars, std::span<const VarId> sep);

// `table` is p(clique | sep), L x K. Throws StructureError when the separator
// is not shared by both cliques.
FactoredMatrix build_projection(const CliqueNode& clique, const CliqueNode& parent, Matrix table);

// target * diag(leaf_edge * lambda) * keep_edge, keeping target's left factor.
FactoredMatrix factored_rake(const FactoredMatrix& target, const FactoredMatrix& leaf_edge,
                             const FactoredMatrix& keep_edge, std::span<const double> leaf_lambda,
                             OpCounts* counts = nullptr);

Vector clique_evidence(const CliqueNode& clique, VarId var, const Vector& likelihood);
Vector marginalize(const Vector& belief, const CliqueNode& clique, VarId var);

struct FactoredAlgebra {
  using Matrix = FactoredMatrix;

  static Vector apply(const Matrix& m, std::span<const double> v, OpCounts* counts) {
    return select_rows(*m.columns, raketree::apply(m.right, v, counts), counts);
  }
  static Vector apply_transposed(const Matrix& m, std::span<const double> v, OpCounts* counts) {
    return raketree::apply_transposed(m.right, select_transposed(*m.columns, m.inner(), v, counts), counts);
  }
  static Matrix rake(const Matrix& target, const Matrix& leaf_edge, const Matrix& keep_edge,
                     std::span<const double> leaf_lambda, OpCounts* counts) {
    return factored_rake(target, leaf_edge, keep_edge, leaf_lambda, counts);
  }
  static bool bitwise_equal(const Matrix& a, const Matrix& b);
};

using FactoredHierarchy = ContractionHierarchy<FactoredAlgebra>;
using FactoredEngine = DynamicEngine<FactoredAlgebra>;

enum class JoinNodeKind { Clique, Evidence, Projection, Dummy };

struct JoinNode {
  std::string name;
  JoinNodeKind kind = JoinNodeKind::Clique;
  CliqueNode clique;
  std::size_t parent = SIZE_MAX;
  std::vector<std::size_t> children;
  Matrix table;  // p(this | sep), L x K; empty at the root
  VarId evidence_var = -1;
  std::optional<Vector> evidence;  // leaves only, length K
};

class JoinTree {
 public:
  explicit JoinTree(std::size_t k);

  std::size_t k() const { return k_; }
  std::size_t size() const { return nodes_.size(); }
  const JoinNode& node(std::size_t i) const { return nodes_.at(i); }
  const std::vector<JoinNode>& nodes() const { return nodes_; }
  std::size_t root() const { return root_; }
  const Vector& prior() const { return prior_; }

  std::size_t add_clique(std::string name, std::vector<VarId> vars);
  // The separator is the shared variable set, listed in the child's order.
  void connect(std::size_t parent, std::size_t child, Matrix table);
  void set_root(std::size_t root, Vector prior);
  // New {var} leaf under `clique`, linked by the identity table.
  std::size_t attach_evidence(VarId var, std::size_t clique);
  std::size_t add_node(JoinNode node);

  void set_evidence(std::size_t leaf, Vector likelihood);
  Vector likelihood(std::size_t i) const;
  Matrix edge_product(std::size_t child) const;
  FactoredMatrix edge_factored(std::size_t child) const;

  bool is_binary() const;
  std::vector<std::size_t> preorder() const;
  // The home clique of each variable is the first clique listing it, unless
  // set explicitly.
  std::size_t home(VarId var) const;
  void set_home(VarId var, std::size_t clique);
  std::vector<VarId> variables() const;
  std::optional<std::size_t> evidence_leaf(VarId var) const;

 private:
  friend JoinTree binarize(const JoinTree& raw);
  friend JoinTree pad_cliques(const JoinTree& tree);

  std::size_t k_;
  std::vector<JoinNode> nodes_;
  std::size_t root_ = SIZE_MAX;
  Vector prior_;
  std::vector<std::pair<VarId, std::size_t>> home_;
};

// root, link, dimension, stochastic, intersection (running intersection),
// evidence.
std::vector<Violation> validate(const JoinTree& tree);

// Binary complete form. Children of an over-full clique are grouped by
// separator; each group hangs under a projection node carrying only the
// separator, and the groups hang off a spine of projection nodes carrying the
// union of the separators still below them. A single child gets a one-value
// dummy leaf. Existing node indices are preserved.
JoinTree binarize(const JoinTree& raw);

// Pads every node to the largest clique size with fresh padding variables
// (least significant) so all nodes share one domain size K. Tables, prior and
// evidence are embedded at padding value 0.
JoinTree pad_cliques(const JoinTree& tree);

BinaryTopology topology_of(const JoinTree& tree);

// Dense lambda/pi propagation on any join tree; the reference engine.
Propagation full_propagation(const JoinTree& tree, OpCounts* counts = nullptr);

enum class JoinRepresentation { Factored, Expanded };

class JoinTreeEngine {
 public:
  // Binarizes and pads the input; node indices of the input stay valid.
  JoinTreeEngine(JoinTree tree, JoinRepresentation representation);

  const JoinTree& tree() const { return tree_; }
  JoinRepresentation representation() const { return representation_; }
  std::size_t level_count() const;
  bool matches_rebuild() const;

  // Replaces the likelihood of a leaf; returns the number of recomputed recipes.
  std::size_t update_leaf(std::size_t leaf, Vector likelihood);
  std::size_t update_variable(VarId var, const Vector& likelihood);
  Vector clique_belief(std::size_t node) const;
  Vector variable_belief(VarId var) const;
  Vector variable_belief(VarId var, std::size_t clique) const;

  OpCounts counts() const { return counts_.load(); }
  OpCounts build_counts() const { return build_counts_; }
  void reset_counts() { counts_.reset(); }

 private:
  JoinTree tree_;
  JoinRepresentation representation_;
  OpCounts build_counts_;
  std::variant<FactoredEngine, DenseEngine> engine_;
  mutable SharedCounts counts_;
};

}  // namespace raketree

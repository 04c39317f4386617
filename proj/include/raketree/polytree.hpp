#pragma once

// Polytrees (singly connected networks, several parents allowed) answered
// through a join tree of family cliques {v} + parents(v).

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "raketree/jointree.hpp"
#include "raketree/linalg.hpp"
#include "raketree/tree.hpp"

namespace raketree {

struct PolytreeVariable {
  VarId id = 0;
  std::string name;
  std::vector<VarId> parents;
  // Row = parent tuple (first parent most significant), column = own value.
  // A parentless variable has a single row, its prior.
  Matrix cpt;
};

class Polytree {
 public:
  explicit Polytree(std::size_t k);

  std::size_t k() const { return k_; }
  std::size_t size() const { return vars_.size(); }
  const std::vector<PolytreeVariable>& variables() const { return vars_; }
  const PolytreeVariable& variable(VarId id) const;
  std::size_t index_of(VarId id) const;  // throws LookupError
  bool contains(VarId id) const;

  VarId add_variable(VarId id, std::string name);
  VarId add_variable(std::string name);
  void set_parents(VarId id, std::vector<VarId> parents);
  void set_cpt(VarId id, Matrix cpt);
  std::size_t max_in_degree() const;

  // Parents before children; throws StructureError on a directed cycle.
  std::vector<VarId> topological_order() const;

 private:
  std::size_t k_;
  std::vector<PolytreeVariable> vars_;
  VarId next_id_ = 0;
};

// rules: dimension, stochastic, link, cycle, connectivity (singly connected)
std::vector<Violation> validate(const Polytree& pt);

// Prior marginal of every variable (parents of a node are independent a
// priori in a polytree), indexed like variables().
std::vector<Vector> prior_marginals(const Polytree& pt);

struct PolytreeOptions {
  std::size_t max_parents = 4;
};

struct PolytreePlan {
  JoinTree tree;
  std::vector<std::size_t> family;  // clique index per variable, indexed like variables()
};

// One clique per family, connected along the polytree's edges and rooted at
// the family of the first parentless variable. Separator tables are
// p(clique) / p(separator) from the prior marginals; every variable gets an
// evidence leaf on its own family clique.
PolytreePlan to_join_tree(const Polytree& pt, const PolytreeOptions& options = {});

class PolytreeEngine {
 public:
  explicit PolytreeEngine(const Polytree& pt, JoinRepresentation representation = JoinRepresentation::Factored,
                          const PolytreeOptions& options = {});

  const Polytree& polytree() const { return pt_; }
  const JoinTreeEngine& engine() const { return engine_; }
  std::size_t family_of(VarId var) const;
  std::vector<std::size_t> cliques_containing(VarId var) const;

  std::size_t pt_update(VarId var, const Vector& likelihood);
  Vector pt_query(VarId var) const;
  Vector pt_query(VarId var, std::size_t clique) const;

  OpCounts counts() const { return engine_.counts(); }
  void reset_counts() { engine_.reset_counts(); }

 private:
  Polytree pt_;
  PolytreePlan plan_;
  JoinTreeEngine engine_;
};

}  // namespace raketree

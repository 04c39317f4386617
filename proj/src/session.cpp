#include "raketree/session.hpp"

#include <charconv>
#include <cmath>
#include <iomanip>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>

#include "raketree/dynamic.hpp"
#include "raketree/errors.hpp"
#include "raketree/exact.hpp"

namespace raketree {

namespace {

NodeIndex node_index(const CausalTree& tree, std::uint32_t id) { return tree.index_of(tree.resolve(NodeId{id})); }

std::vector<std::uint32_t> leaf_ids(const CausalTree& tree) {
  std::vector<std::uint32_t> out;
  for (const auto& n : tree.nodes())
    if (n.children.empty() && !n.dummy) out.push_back(value_of(n.id));
  return out;
}

std::vector<std::uint32_t> node_ids(const CausalTree& tree) {
  std::vector<std::uint32_t> out;
  for (const auto& n : tree.nodes()) out.push_back(value_of(n.id));
  return out;
}

class HierarchyBackend final : public SessionBackend {
 public:
  explicit HierarchyBackend(CausalTree tree) : engine_(std::move(tree)) {}
  std::size_t k() const override { return engine_.tree().k(); }
  void update(std::uint32_t id, Vector likelihood) override {
    const auto& t = engine_.tree();
    engine_.update_evidence(t.node(node_index(t, id)).id, std::move(likelihood));
  }
  Vector query(std::uint32_t id) override {
    const auto& t = engine_.tree();
    return engine_.bel_query(t.node(node_index(t, id)).id);
  }
  OpCounts counts() const override { return engine_.counts(); }
  std::vector<std::uint32_t> update_targets() const override { return leaf_ids(engine_.tree()); }
  std::vector<std::uint32_t> query_targets() const override { return node_ids(engine_.tree()); }

 private:
  HierarchyEngine engine_;
};

class PathBackend final : public SessionBackend {
 public:
  explicit PathBackend(CausalTree tree) : engine_(std::move(tree)) {}
  std::size_t k() const override { return engine_.tree().k(); }
  void update(std::uint32_t id, Vector likelihood) override {
    engine_.update(node_index(engine_.tree(), id), std::move(likelihood));
  }
  Vector query(std::uint32_t id) override {
    const NodeIndex x = node_index(engine_.tree(), id);
    PathQueryCost cost;
    try {
      Vector out = engine_.query(x, &cost);
      queries_ += cost.ops;
      return out;
    } catch (const InconsistentEvidence&) {
      queries_ += cost.ops;
      throw;
    }
  }
  OpCounts counts() const override {
    OpCounts c = engine_.update_counts();
    c += queries_;
    return c;
  }
  std::vector<std::uint32_t> update_targets() const override { return leaf_ids(engine_.tree()); }
  std::vector<std::uint32_t> query_targets() const override { return node_ids(engine_.tree()); }

 private:
  PathEngine engine_;
  OpCounts queries_;
};

// Recomputes every belief by two full passes on the first query after a change.
class FullBackend final : public SessionBackend {
 public:
  explicit FullBackend(CausalTree tree) : tree_(std::move(tree)) {
    const auto violations = validate(tree_);
    if (!violations.empty()) throw StructureError("invalid causal tree: " + violations.front().message);
  }
  std::size_t k() const override { return tree_.k(); }
  void update(std::uint32_t id, Vector likelihood) override {
    tree_.set_evidence(node_index(tree_, id), std::move(likelihood));
    beliefs_.reset();
  }
  Vector query(std::uint32_t id) override {
    const NodeIndex x = node_index(tree_, id);
    if (!beliefs_) beliefs_ = propagate_all(tree_, &counts_);
    return beliefs_->at(x);
  }
  OpCounts counts() const override { return counts_; }
  std::vector<std::uint32_t> update_targets() const override { return leaf_ids(tree_); }
  std::vector<std::uint32_t> query_targets() const override { return node_ids(tree_); }

 private:
  CausalTree tree_;
  std::optional<std::vector<Vector>> beliefs_;
  OpCounts counts_;
};

std::vector<std::uint32_t> evidence_vars(const JoinTree& tree) {
  std::vector<std::uint32_t> out;
  for (VarId v : tree.variables())
    if (tree.evidence_leaf(v)) out.push_back(static_cast<std::uint32_t>(v));
  return out;
}

std::vector<std::uint32_t> all_vars(const JoinTree& tree) {
  std::vector<std::uint32_t> out;
  for (VarId v : tree.variables()) out.push_back(static_cast<std::uint32_t>(v));
  return out;
}

VarId var_of(std::uint32_t id) {
  if (id > static_cast<std::uint32_t>(INT32_MAX)) throw LookupError("unknown variable " + std::to_string(id));
  return static_cast<VarId>(id);
}

class JoinEngineBackend final : public SessionBackend {
 public:
  JoinEngineBackend(JoinTree tree, JoinRepresentation rep)
      : k_(tree.k()), updates_(evidence_vars(tree)), queries_(all_vars(tree)), engine_(std::move(tree), rep) {}
  std::size_t k() const override { return k_; }
  void update(std::uint32_t id, Vector likelihood) override { engine_.update_variable(var_of(id), likelihood); }
  Vector query(std::uint32_t id) override { return engine_.variable_belief(var_of(id)); }
  OpCounts counts() const override { return engine_.counts(); }
  std::vector<std::uint32_t> update_targets() const override { return updates_; }
  std::vector<std::uint32_t> query_targets() const override { return queries_; }

 private:
  std::size_t k_;
  std::vector<std::uint32_t> updates_, queries_;
  JoinTreeEngine engine_;
};

class JoinFullBackend final : public SessionBackend {
 public:
  explicit JoinFullBackend(JoinTree tree) : tree_(std::move(tree)) {
    const auto violations = validate(tree_);
    if (!violations.empty()) throw StructureError("invalid join tree: " + violations.front().message);
  }
  std::size_t k() const override { return tree_.k(); }
  void update(std::uint32_t id, Vector likelihood) override {
    const VarId v = var_of(id);
    const auto leaf = tree_.evidence_leaf(v);
    if (!leaf) throw LookupError("variable " + std::to_string(v) + " has no evidence leaf");
    tree_.set_evidence(*leaf, std::move(likelihood));
    beliefs_.reset();
  }
  Vector query(std::uint32_t id) override {
    const VarId v = var_of(id);
    const std::size_t home = tree_.home(v);
    if (!beliefs_) beliefs_ = full_propagation(tree_, &counts_).belief;
    return marginalize(beliefs_->at(home), tree_.node(home).clique, v);
  }
  OpCounts counts() const override { return counts_; }
  std::vector<std::uint32_t> update_targets() const override { return evidence_vars(tree_); }
  std::vector<std::uint32_t> query_targets() const override { return all_vars(tree_); }

 private:
  JoinTree tree_;
  std::optional<std::vector<Vector>> beliefs_;
  OpCounts counts_;
};

std::optional<std::uint32_t> parse_id(const std::string& t) {
  std::uint32_t v = 0;
  auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || end != t.data() + t.size()) return std::nullopt;
  return v;
}

std::optional<double> parse_double(const std::string& t) {
  double v = 0.0;
  auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || end != t.data() + t.size()) return std::nullopt;
  return v;
}

}  // namespace

TreeEngineKind parse_tree_engine(const std::string& name) {
  if (name == "hierarchy") return TreeEngineKind::Hierarchy;
  if (name == "path") return TreeEngineKind::Path;
  if (name == "full") return TreeEngineKind::Full;
  throw UsageError("unknown engine '" + name + "' (hierarchy, path, full)");
}

JoinEngineKind parse_join_engine(const std::string& name) {
  if (name == "factored") return JoinEngineKind::Factored;
  if (name == "expanded") return JoinEngineKind::Expanded;
  if (name == "full") return JoinEngineKind::Full;
  throw UsageError("unknown engine '" + name + "' (factored, expanded, full)");
}

std::string engine_name(TreeEngineKind kind) {
  switch (kind) {
    case TreeEngineKind::Hierarchy: return "hierarchy";
    case TreeEngineKind::Path: return "path";
    case TreeEngineKind::Full: return "full";
  }
  return "?";
}

std::string engine_name(JoinEngineKind kind) {
  switch (kind) {
    case JoinEngineKind::Factored: return "factored";
    case JoinEngineKind::Expanded: return "expanded";
    case JoinEngineKind::Full: return "full";
  }
  return "?";
}

std::unique_ptr<SessionBackend> make_tree_backend(CausalTree tree, TreeEngineKind kind) {
  switch (kind) {
    case TreeEngineKind::Hierarchy: return std::make_unique<HierarchyBackend>(std::move(tree));
    case TreeEngineKind::Path: return std::make_unique<PathBackend>(std::move(tree));
    case TreeEngineKind::Full: return std::make_unique<FullBackend>(std::move(tree));
  }
  throw UsageError("unknown engine");
}

std::unique_ptr<SessionBackend> make_join_backend(JoinTree tree, JoinEngineKind kind) {
  switch (kind) {
    case JoinEngineKind::Factored: return std::make_unique<JoinEngineBackend>(std::move(tree), JoinRepresentation::Factored);
    case JoinEngineKind::Expanded: return std::make_unique<JoinEngineBackend>(std::move(tree), JoinRepresentation::Expanded);
    case JoinEngineKind::Full: return std::make_unique<JoinFullBackend>(std::move(tree));
  }
  throw UsageError("unknown engine");
}

std::unique_ptr<SessionBackend> make_polytree_backend(const Polytree& pt, JoinEngineKind kind) {
  return make_join_backend(to_join_tree(pt).tree, kind);
}

std::string format_belief(const Vector& belief) {
  std::ostringstream out;
  out << std::setprecision(17) << "bel";
  for (double x : belief) out << ' ' << x;
  return out.str();
}

int run_session(std::istream& in, std::ostream& out, SessionBackend& backend) {
  bool inconsistent = false;
  std::string text;
  auto reply = [&](const std::string& line) { out << line << '\n' << std::flush; };
  while (std::getline(in, text)) {
    if (auto hash = text.find('#'); hash != std::string::npos) text.resize(hash);
    std::istringstream fields(text);
    std::vector<std::string> tokens;
    for (std::string t; fields >> t;) tokens.push_back(std::move(t));
    if (tokens.empty()) continue;
    const std::string& cmd = tokens[0];
    try {
      if (cmd == "quit") {
        return kExitOk;
      } else if (cmd == "stats") {
        const OpCounts c = backend.counts();
        reply("stats mv=" + std::to_string(c.mat_vec) + " mm=" + std::to_string(c.mat_mat) +
              " flops=" + std::to_string(c.flops));
      } else if (cmd == "query") {
        if (tokens.size() != 2) throw UsageError("usage: query <id>");
        const auto id = parse_id(tokens[1]);
        if (!id) throw UsageError("bad id '" + tokens[1] + "'");
        reply(format_belief(backend.query(*id)));
      } else if (cmd == "update") {
        if (tokens.size() != backend.k() + 2) {
          throw UsageError("usage: update <id> <" + std::to_string(backend.k()) + " floats>");
        }
        const auto id = parse_id(tokens[1]);
        if (!id) throw UsageError("bad id '" + tokens[1] + "'");
        Vector lik;
        for (std::size_t i = 2; i < tokens.size(); ++i) {
          const auto v = parse_double(tokens[i]);
          if (!v || !std::isfinite(*v) || *v < 0.0) throw DomainError("bad likelihood entry '" + tokens[i] + "'");
          lik.push_back(*v);
        }
        backend.update(*id, std::move(lik));
        reply("ok");
      } else {
        throw UsageError("unknown command '" + cmd + "'");
      }
    } catch (const InconsistentEvidence&) {
      inconsistent = true;
      reply("err inconsistent");
    } catch (const Error& e) {
      reply(std::string("err ") + e.what());
    } catch (const std::out_of_range& e) {
      reply(std::string("err ") + e.what());
    }
  }
  return inconsistent ? kExitInconsistent : kExitOk;
}

}  // namespace raketree

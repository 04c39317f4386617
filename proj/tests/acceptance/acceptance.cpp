// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>

#include "fixtures.hpp"
#include "raketree/dynamic.hpp"
#include "raketree/errors.hpp"
#include "raketree/exact.hpp"
#include "raketree/generate.hpp"
#include "raketree/jointree.hpp"
#include "raketree/polytree.hpp"

using namespace raketree;
using raketree::testing::by_name;
using raketree::testing::max_diff;
using raketree::testing::updatable_leaves;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::size_t ceil_log2(std::size_t n) {
  std::size_t m = 0;
  while ((std::size_t{1} << m) < n) ++m;
  return m;
}

std::vector<Vector> hierarchy_beliefs(const HierarchyEngine& eng) {
  std::vector<Vector> out;
  for (const auto& n : eng.tree().nodes()) out.push_back(eng.bel_query(n.id));
  return out;
}

std::string fmt(double x, int digits = 3) {
  std::ostringstream s;
  s.precision(digits);
  s << x;
  return s.str();
}

// 1. Small trees: hierarchy = two-pass propagation = enumeration.
Outcome oracle_small() {
  Rng rng(101);
  std::size_t trees = 0, checks = 0;
  double worst = 0.0;
  const Shape shapes[] = {Shape::Chain, Shape::Balanced, Shape::Random};
  while (trees < 1000) {
    const std::size_t k = 2 + uniform_index(rng, 2);
    const std::size_t internal = 1 + uniform_index(rng, k == 2 ? 6 : 5);
    CausalTree t = make_tree(shapes[uniform_index(rng, 3)], internal, k, rng);
    HierarchyEngine eng(t);
    const auto leaves = updatable_leaves(t);
    for (int step = 0; step < 4; ++step) {
      const NodeIndex leaf = leaves[uniform_index(rng, leaves.size())];
      Vector lik = random_likelihood(k, rng);
      eng.update_evidence(t.node(leaf).id, lik);
      t.set_evidence(leaf, lik);
      const auto a = hierarchy_beliefs(eng), b = propagate_all(t), c = joint_marginals(t);
      worst = std::max({worst, max_diff(a, b), max_diff(a, c), max_diff(b, c)});
      ++checks;
    }
    ++trees;
  }
  return {worst <= 1e-9, std::to_string(trees) + " trees, " + std::to_string(checks) + " checks, max |d| = " + fmt(worst)};
}

// 2. Medium trees with interleaved updates and queries.
Outcome oracle_medium() {
  Rng rng(202);
  double worst = 0.0;
  std::size_t largest = 0;
  const Shape shapes[] = {Shape::Chain, Shape::Balanced, Shape::Random};
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t k = 2 + uniform_index(rng, 3);
    // Log-uniform sizes up to 10^4 nodes.
    const std::size_t internal = std::max<std::size_t>(1, static_cast<std::size_t>(std::exp(uniform01(rng) * std::log(4999.0))));
    CausalTree t = make_tree(shapes[trial % 3], internal, k, rng);
    largest = std::max(largest, t.size());
    HierarchyEngine eng(t);
    const auto leaves = updatable_leaves(t);
    for (int op = 0; op < 100; ++op) {
      if (op % 2 == 0) {
        const NodeIndex leaf = leaves[uniform_index(rng, leaves.size())];
        Vector lik = random_likelihood(k, rng);
        eng.update_evidence(t.node(leaf).id, lik);
        t.set_evidence(leaf, lik);
      } else {
        const NodeIndex x = static_cast<NodeIndex>(uniform_index(rng, t.size()));
        const auto ref = propagate_all(t);
        worst = std::max(worst, max_abs_diff(eng.bel_query(t.node(x).id), ref[x]));
      }
    }
  }
  return {worst <= 1e-9, "100 trees up to " + std::to_string(largest) + " nodes, 100 ops each, max |d| = " + fmt(worst)};
}

// 3. Level structure, halving and space.
Outcome contraction_structure() {
  Rng rng(303);
  bool ok = true;
  double min_ratio = 1.0;
  double max_fresh = 0.0;
  std::size_t built = 0, max_levels_seen = 0, bound_at = 0;
  const Shape shapes[] = {Shape::Chain, Shape::Balanced, Shape::Random};
  for (std::size_t internal : {1u, 2u, 3u, 7u, 100u, 1000u, 10000u, 99999u}) {
    for (Shape s : shapes) {
      const HierarchyEngine eng(make_tree(s, internal, 2, rng));
      const auto& h = eng.hierarchy();
      ++built;
      const std::size_t leaves = internal + 1;
      const std::size_t bound = 4 * ceil_log2(leaves) + 2;
      if (h.nodes_at(h.top()).size() != 3) ok = false;
      if (h.level_count() > bound) ok = false;
      if (h.fresh_matrix_count() > 2 * h.level0_slot_count()) ok = false;
      max_fresh = std::max(max_fresh, double(h.fresh_matrix_count()) / double(h.level0_slot_count()));
      if (h.level_count() > max_levels_seen) {
        max_levels_seen = h.level_count();
        bound_at = bound;
      }
      for (const auto& p : h.passes())
        if (p.eligible >= 2) min_ratio = std::min(min_ratio, p.halving_ratio());
    }
  }
  return {ok, std::to_string(built) + " hierarchies up to 10^5 leaves, all end at 3 nodes; max levels " +
                  std::to_string(max_levels_seen) + " (bound " + std::to_string(bound_at) + "); min raked/eligible per pass " +
                  fmt(min_ratio) + "; fresh/level-0 matrices <= " + fmt(max_fresh)};
}

// 4. Work per update and per query on chains of length 2^m.
Outcome logarithmic_work() {
  Rng rng(404);
  bool ok = true;
  std::ostringstream detail;
  std::uint64_t prev_mm = 0, prev_mv = 0;
  for (std::size_t m = 6; m <= 14; ++m) {
    const CausalTree t = chain_tree(std::size_t{1} << m, 2, rng);
    HierarchyEngine eng(t);
    std::uint64_t worst_mm = 0, worst_mv = 0;
    for (NodeIndex leaf : updatable_leaves(t)) {
      const OpCounts before = eng.counts();
      eng.update_evidence(t.node(leaf).id, random_likelihood(2, rng));
      worst_mm = std::max(worst_mm, eng.counts().mat_mat - before.mat_mat);
    }
    for (NodeIndex x = 0; x < t.size(); ++x) {
      const OpCounts before = eng.counts();
      try {
        eng.bel_query(t.node(x).id);
      } catch (const InconsistentEvidence&) {
      }
      worst_mv = std::max(worst_mv, eng.counts().mat_vec - before.mat_vec);
    }
    if (worst_mm > m + 1 || worst_mv > 6 * (m + 1)) ok = false;
    if (m > 6 && (worst_mm > prev_mm + 8 || worst_mv > prev_mv + 8)) ok = false;
    detail << (m == 6 ? "" : " ") << "m=" << m << ":" << worst_mm << "mm/" << worst_mv << "mv";
    prev_mm = worst_mm;
    prev_mv = worst_mv;
  }
  return {ok, detail.str()};
}

// 5. Stored matrices after updates equal a rebuild bit for bit.
Outcome rebuild_equivalence() {
  Rng rng(505);
  int matched = 0;
  const int cases = 200;
  for (int trial = 0; trial < cases; ++trial) {
    const std::size_t k = 2 + uniform_index(rng, 3);
    const CausalTree t = random_binary_tree(1 + uniform_index(rng, 300), k, rng);
    HierarchyEngine eng(t);
    const auto leaves = updatable_leaves(t);
    const int updates = 1 + static_cast<int>(uniform_index(rng, 50));
    for (int u = 0; u < updates; ++u)
      eng.update_evidence(t.node(leaves[uniform_index(rng, leaves.size())]).id, random_likelihood(k, rng));
    if (eng.hierarchy().matches_rebuild()) ++matched;
  }
  return {matched == cases, std::to_string(matched) + "/" + std::to_string(cases) + " cases bitwise equal"};
}

// 6. The length-4 chain.
Outcome golden_chain() {
  const auto c = raketree::testing::chain4(606);
  HierarchyEngine eng(c.tree);
  const auto& h = eng.hierarchy();
  std::set<std::string> t1;
  for (NodeIndex x : h.nodes_at(1)) t1.insert(c.tree.node(x).name);
  const bool levels = t1 == std::set<std::string>{"x1", "e1", "x3", "e3", "e5"} && h.level_count() == 3;
  const auto chain = eng.update_evidence(c.tree.node(c.at.at("e4")).id, {0.2, 0.9});
  bool recipes = chain.size() == 2;
  if (recipes) {
    const Recipe& first = h.recipes()[chain[0]];
    const Recipe& second = h.recipes()[chain[1]];
    recipes = first.level == 1 && first.target == c.at.at("x3") && first.target_side == Side::Right &&
              second.level == 2 && second.target == c.at.at("x1") && second.target_side == Side::Right;
  }
  return {levels && recipes, std::string("T1 = {x1,e1,x3,e3,e5} ") + (levels ? "yes" : "no") +
                                 "; e4 update recomputes B_1(x3) then B_2(x1) " + (recipes ? "yes" : "no")};
}

// 7. Factored join-tree edges.
Outcome join_factorization() {
  Rng rng(707);
  double worst = 0.0;
  int trees = 0, dominated = 0, compared = 0;
  for (int trial = 0; trial < 150; ++trial) {
    const std::size_t n = 1 + uniform_index(rng, 3);
    const std::size_t c = std::min<std::size_t>(n, uniform_index(rng, 3));
    const JoinTree raw = random_join_tree(2 + uniform_index(rng, 20), 2, n, c, rng);
    JoinTreeEngine factored(raw, JoinRepresentation::Factored);
    JoinTreeEngine expanded(raw, JoinRepresentation::Expanded);
    const auto vars = raw.variables();
    for (int step = 0; step < 20; ++step) {
      const VarId v = vars[uniform_index(rng, vars.size())];
      Vector lik = random_likelihood(2, rng);
      factored.update_variable(v, lik);
      expanded.update_variable(v, lik);
      for (VarId q : vars) {
        try {
          worst = std::max(worst, max_abs_diff(factored.variable_belief(q), expanded.variable_belief(q)));
        } catch (const InconsistentEvidence&) {
          factored.update_variable(v, ones(2));
          expanded.update_variable(v, ones(2));
          break;
        }
      }
    }
    ++trees;
    if (c < n) {
      ++compared;
      const auto f = factored.build_counts().flops + factored.counts().flops;
      const auto e = expanded.build_counts().flops + expanded.counts().flops;
      if (f < e) ++dominated;
    }
  }
  const bool ok = worst <= 1e-9 && dominated == compared;
  return {ok, std::to_string(trees) + " join trees, max |d| = " + fmt(worst) + "; factored flops below expanded in " +
                  std::to_string(dominated) + "/" + std::to_string(compared) + " trees with c < n"};
}

// 8. Polytrees against enumeration of the product of CPTs.
Outcome polytree_end_to_end() {
  Rng rng(808);
  double worst = 0.0;
  int trees = 0, checks = 0, inconsistent_ok = 0;
  bool ok = true;
  for (; trees < 300; ++trees) {
    const std::size_t k = 2 + uniform_index(rng, 2);
    const std::size_t nvars = 1 + uniform_index(rng, k == 2 ? 12 : 9);
    const Polytree pt = random_polytree(nvars, k, 3, rng);
    PolytreeEngine eng(pt);
    std::map<VarId, Vector> evidence;
    for (int step = 0; step < 8; ++step) {
      const VarId v = pt.variables()[uniform_index(rng, nvars)].id;
      const Vector lik = random_likelihood(k, rng);
      eng.pt_update(v, lik);
      evidence[v] = lik;
      const auto ref = raketree::testing::polytree_brute_force(pt, evidence);
      if (ref.empty()) {
        try {
          eng.pt_query(v);
          ok = false;
        } catch (const InconsistentEvidence&) {
          ++inconsistent_ok;
        }
        eng.pt_update(v, ones(k));
        evidence.erase(v);
        continue;
      }
      for (std::size_t i = 0; i < pt.size(); ++i)
        worst = std::max(worst, max_abs_diff(eng.pt_query(pt.variables()[i].id), ref[i]));
      ++checks;
    }
  }
  return {ok && worst <= 1e-9, std::to_string(trees) + " polytrees (<= 12 vars, p <= 3, k <= 3), " +
                                   std::to_string(checks) + " checks, max |d| = " + fmt(worst)};
}

// 9. Update-and-query cycle on a 600-node chain, full propagation vs hierarchy.
Outcome speedup() {
  Rng rng(909);
  const CausalTree t0 = chain_tree(300, 2, rng);
  CausalTree t = t0;
  HierarchyEngine eng(t0);
  const auto leaves = updatable_leaves(t0);
  const int cycles = 2000;
  OpCounts full;
  const OpCounts start = eng.counts();
  for (int i = 0; i < cycles; ++i) {
    const NodeIndex leaf = leaves[uniform_index(rng, leaves.size())];
    const NodeIndex x = static_cast<NodeIndex>(uniform_index(rng, t0.size()));
    Vector lik = random_likelihood(2, rng);
    eng.update_evidence(t0.node(leaf).id, lik);
    t.set_evidence(leaf, lik);
    eng.bel_query(t0.node(x).id);
    propagate_all(t, &full);
  }
  const OpCounts used = eng.counts();
  const double hier = double(used.matrix_ops() - start.matrix_ops()) / cycles;
  const double ratio = double(full.matrix_ops()) / cycles / hier;
  return {ratio >= 5.0, std::to_string(t0.size()) + "-node chain, k=2: full " + fmt(double(full.matrix_ops()) / cycles, 5) +
                            " vs hierarchy " + fmt(hier, 4) + " matrix ops per cycle, ratio " + fmt(ratio) +
                            " (required >= 5, reference ~10)"};
}

// 10. Zero-mass evidence raises the error in every engine, never NaN.
Outcome inconsistent_evidence() {
  Rng rng(1010);
  int raised = 0, cases = 0;
  bool ok = true;
  auto finite = [](const Vector& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
  };
  // Throws InconsistentEvidence or returns finite beliefs; anything else fails.
  auto outcome = [&](const std::function<std::vector<Vector>()>& run) -> int {
    try {
      for (const auto& v : run())
        if (!finite(v)) return -1;
      return 0;
    } catch (const InconsistentEvidence&) {
      return 1;
    } catch (...) {
      return -1;
    }
  };
  for (int trial = 0; trial < 400; ++trial) {
    const std::size_t k = 2 + uniform_index(rng, 2);
    CausalTree t = random_binary_tree(1 + uniform_index(rng, 5), k, rng);
    for (NodeIndex i = 0; i < t.size(); ++i)
      if (i != t.root()) t.set_edge_matrix(i, random_stochastic(k, k, rng, 0.5));
    for (NodeIndex leaf : updatable_leaves(t)) t.observe(leaf, uniform_index(rng, k));
    const int truth = outcome([&] { return joint_marginals(t); });
    const int hier = outcome([&] { return hierarchy_beliefs(HierarchyEngine(t)); });
    const int full = outcome([&] { return propagate_all(t); });
    const int path = outcome([&] {
      PathEngine p(t);
      std::vector<Vector> out;
      for (NodeIndex x = 0; x < t.size(); ++x) out.push_back(p.query(x));
      return out;
    });
    if (truth < 0 || hier != truth || full != truth || path != truth) ok = false;
    raised += truth == 1;
    ++cases;
  }
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t k = 2 + uniform_index(rng, 2);
    const std::size_t nvars = 2 + uniform_index(rng, 7);
    const Polytree pt = random_polytree(nvars, k, 3, rng, 0.4);
    std::map<VarId, Vector> evidence;
    for (const auto& v : pt.variables())
      if (uniform01(rng) < 0.6) evidence[v.id] = indicator(k, uniform_index(rng, k));
    const int truth = raketree::testing::polytree_brute_force(pt, evidence).empty() ? 1 : 0;
    for (auto rep : {JoinRepresentation::Factored, JoinRepresentation::Expanded}) {
      const int got = outcome([&] {
        PolytreeEngine eng(pt, rep);
        for (const auto& [v, lik] : evidence) eng.pt_update(v, lik);
        std::vector<Vector> out;
        for (const auto& v : pt.variables()) out.push_back(eng.pt_query(v.id));
        return out;
      });
      if (got != truth) ok = false;
    }
    raised += truth;
    ++cases;
  }
  return {ok && raised > 0, std::to_string(cases) + " fuzzed cases with structural zeros, " + std::to_string(raised) +
                                " inconsistent; every engine raised exactly there, no NaN"};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    Outcome (*run)();
  };
  const Criterion criteria[] = {
      {1, "oracle equivalence, small trees", oracle_small},
      {2, "oracle equivalence, medium trees", oracle_medium},
      {3, "contraction structure", contraction_structure},
      {4, "logarithmic work on chains", logarithmic_work},
      {5, "update-rebuild bitwise equivalence", rebuild_equivalence},
      {6, "golden length-4 chain", golden_chain},
      {7, "join-tree factorization", join_factorization},
      {8, "polytree end to end", polytree_end_to_end},
      {9, "chain speedup reporting target", speedup},
      {10, "inconsistent evidence handling", inconsistent_evidence},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("criterion %d: %s  %s: %s (%.1fs)\n", c.id, o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str(), secs);
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}

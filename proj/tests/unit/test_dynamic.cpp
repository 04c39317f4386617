#include "doctest.h"

#include <cmath>
#include <thread>

#include "fixtures.hpp"
#include "raketree/dynamic.hpp"
#include "raketree/errors.hpp"
#include "raketree/exact.hpp"

using namespace raketree;
using raketree::testing::Chain4;
using raketree::testing::max_diff;

namespace {

DenseEngine engine_of(const CausalTree& t, OpCounts* counts = nullptr) {
  std::vector<Matrix> edges;
  std::vector<Vector> lik;
  for (NodeIndex i = 0; i < t.size(); ++i) {
    edges.push_back(t.node(i).edge);
    lik.push_back(t.likelihood(i));
  }
  return DenseEngine(topology_of(t), edges, lik, t.prior(), counts);
}

std::vector<Matrix> stored(const DenseHierarchy& h) {
  std::vector<Matrix> out;
  for (SlotId s = 0; s < h.slot_count(); ++s) out.push_back(h.matrix(s));
  return out;
}

bool bitwise_same(const std::vector<Matrix>& a, const std::vector<Matrix>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!a[i].bitwise_equal(b[i])) return false;
  return true;
}

}  // namespace

TEST_SUITE("dynamic") {
  TEST_CASE("three-node tree") {
    auto t = testing::three_node_tree();
    HierarchyEngine eng(t.tree);
    const Vector bel = eng.bel_query(t.tree.node(t.root).id);
    CHECK(bel[0] == doctest::Approx(9.0 / 11).epsilon(1e-14));
    CHECK(bel[1] == doctest::Approx(2.0 / 11).epsilon(1e-14));
    const PiLambda top = eng.calc_pi_lambda(t.tree.node(t.root).id, 0);
    CHECK(top.pi == t.tree.prior());
    CHECK(top.left == Vector{1, 0});
    CHECK(top.right == Vector{1, 1});
  }

  TEST_CASE("vacuous evidence returns the prior at the root") {
    Rng rng(3);
    const CausalTree t = random_binary_tree(30, 3, rng);
    const DenseEngine eng = engine_of(t);
    CHECK(max_diff({eng.belief(t.root())}, {t.prior()}) <= 1e-12);
  }

  TEST_CASE("golden chain update of e4") {
    Chain4 c = testing::chain4(42);
    DenseEngine eng = engine_of(c.tree);
    const auto& h = eng.hierarchy();
    OpCounts counts;
    const auto chain = eng.update(c.at["e4"], {0.2, 0.6}, &counts);
    REQUIRE(chain.size() == 2);
    CHECK(h.recipes()[chain[0]].target == c.at["x3"]);
    CHECK(h.recipes()[chain[0]].level == 1);
    CHECK(h.recipes()[chain[1]].target == c.at["x1"]);
    CHECK(h.recipes()[chain[1]].level == 2);
    CHECK(counts.mat_mat == 2);

    CHECK(eng.update(c.at["e1"], {0.5, 0.1}).empty());
    CHECK(eng.update(c.at["e5"], {0.5, 0.1}).empty());
  }

  TEST_CASE("lambda query on the golden chain stops after one level") {
    Chain4 c = testing::chain4(42);
    DenseEngine eng = engine_of(c.tree);
    OpCounts counts;
    eng.lambda(c.at["x2"], &counts);
    // Level 0 for x2 (two products), level 1 for x3 (two products).
    CHECK(counts.mat_vec == 4);
    OpCounts leaf;
    CHECK(eng.lambda(c.at["e3"], &leaf) == c.tree.likelihood(c.at["e3"]));
    CHECK(leaf.mat_vec == 0);
  }

  TEST_CASE("re-posting a likelihood leaves matrices bitwise unchanged") {
    Rng rng(8);
    CausalTree t = random_binary_tree(40, 3, rng);
    DenseEngine eng = engine_of(t);
    const auto leaves = testing::updatable_leaves(t);
    const Vector lik = random_likelihood(3, rng);
    eng.update(leaves[5], lik);
    const auto before = stored(eng.hierarchy());
    eng.update(leaves[5], lik);
    CHECK(bitwise_same(before, stored(eng.hierarchy())));
  }

  TEST_CASE("lambda, pi and belief agree with full propagation") {
    Rng rng(31);
    for (int trial = 0; trial < 1000; ++trial) {
      CausalTree t = make_tree(static_cast<Shape>(trial % 3), 1 + uniform_index(rng, 30),
                               2 + uniform_index(rng, 3), rng);
      DenseEngine eng = engine_of(t);
      const auto leaves = testing::updatable_leaves(t);
      for (int step = 0; step < 4; ++step) {
        const NodeIndex leaf = leaves[uniform_index(rng, leaves.size())];
        const Vector lik = random_likelihood(t.k(), rng);
        eng.update(leaf, lik);
        t.set_evidence(leaf, lik);
      }
      Propagation ref;
      try {
        ref = full_propagation(t);
      } catch (const InconsistentEvidence&) {
        CHECK_THROWS_AS(eng.belief(t.root()), InconsistentEvidence);
        continue;
      }
      const std::size_t levels = eng.hierarchy().level_count();
      for (NodeIndex x = 0; x < t.size(); ++x) {
        CHECK(max_abs_diff(eng.lambda(x), ref.lambda[x]) <= 1e-9);
        CHECK(max_abs_diff(eng.pi(x), ref.pi[x]) <= 1e-9);
        OpCounts q;
        CHECK(max_abs_diff(eng.belief(x, &q), ref.belief[x]) <= 1e-9);
        CHECK(q.mat_vec <= 6 * levels);
      }
    }
  }

  TEST_CASE("interleaved updates and queries") {
    Rng rng(77);
    for (int trial = 0; trial < 10; ++trial) {
      CausalTree t = make_tree(static_cast<Shape>(trial % 3), 200, 3, rng);
      DenseEngine eng = engine_of(t);
      const auto leaves = testing::updatable_leaves(t);
      for (int step = 0; step < 100; ++step) {
        const NodeIndex leaf = leaves[uniform_index(rng, leaves.size())];
        Vector lik = random_likelihood(t.k(), rng);
        if (lik == Vector(t.k(), 0.0)) lik = ones(t.k());
        eng.update(leaf, lik);
        t.set_evidence(leaf, lik);
        const NodeIndex x = static_cast<NodeIndex>(uniform_index(rng, t.size()));
        bool consistent = true;
        std::vector<Vector> ref;
        try {
          ref = propagate_all(t);
        } catch (const InconsistentEvidence&) {
          consistent = false;
        }
        if (consistent) {
          CHECK(max_abs_diff(eng.belief(x), ref[x]) <= 1e-9);
        } else {
          t.retract(leaf);
          eng.update(leaf, ones(t.k()));
        }
      }
      CHECK(eng.hierarchy().matches_rebuild());
    }
  }

  TEST_CASE("update sequences match a rebuild bitwise") {
    Rng rng(55);
    for (int trial = 0; trial < 200; ++trial) {
      CausalTree t = make_tree(static_cast<Shape>(trial % 3), 1 + uniform_index(rng, 80), 2, rng);
      DenseEngine eng = engine_of(t);
      const auto leaves = testing::updatable_leaves(t);
      for (int step = 0; step < 20; ++step) {
        const NodeIndex leaf = leaves[uniform_index(rng, leaves.size())];
        const Vector lik = random_likelihood(t.k(), rng);
        eng.update(leaf, lik);
        t.set_evidence(leaf, lik);
      }
      CHECK(bitwise_same(stored(eng.hierarchy()), stored(engine_of(t).hierarchy())));
    }
  }

  TEST_CASE("work per operation on chains") {
    Rng rng(2);
    for (std::size_t m = 6; m <= 10; ++m) {
      const CausalTree t = chain_tree(std::size_t{1} << m, 2, rng);
      DenseEngine eng = engine_of(t);
      std::uint64_t worst_mm = 0, worst_mv = 0;
      for (NodeIndex leaf : testing::updatable_leaves(t)) {
        OpCounts u;
        eng.update(leaf, {0.3, 0.6}, &u);
        worst_mm = std::max(worst_mm, u.mat_mat);
      }
      for (NodeIndex x = 0; x < t.size(); ++x) {
        OpCounts q;
        eng.belief(x, &q);
        worst_mv = std::max(worst_mv, q.mat_vec);
      }
      CHECK(worst_mm <= m + 1);
      CHECK(worst_mv <= 6 * (m + 1));
    }
  }

  TEST_CASE("updates to distinct leaves commute") {
    Rng rng(13);
    for (int trial = 0; trial < 50; ++trial) {
      const CausalTree t = random_binary_tree(25, 2, rng);
      const auto leaves = testing::updatable_leaves(t);
      const NodeIndex a = leaves[0], b = leaves[leaves.size() / 2];
      const Vector la{0.2, 0.9}, lb{0.7, 0.4};
      DenseEngine e1 = engine_of(t), e2 = engine_of(t);
      e1.update(a, la);
      e1.update(b, lb);
      e2.update(b, lb);
      e2.update(a, la);
      for (NodeIndex x = 0; x < t.size(); ++x) CHECK(max_abs_diff(e1.belief(x), e2.belief(x)) <= 1e-12);
    }
  }

  TEST_CASE("concurrent readers") {
    Rng rng(4);
    CausalTree t = random_binary_tree(300, 3, rng);
    testing::randomize_evidence(t, rng);
    HierarchyEngine eng(t);
    const auto ref = propagate_all(t);
    std::vector<std::thread> pool;
    std::vector<double> worst(4, 0.0);
    for (int w = 0; w < 4; ++w) {
      pool.emplace_back([&, w] {
        for (NodeIndex x = static_cast<NodeIndex>(w); x < t.size(); x += 4)
          worst[w] = std::max(worst[w], max_abs_diff(eng.bel_query(t.node(x).id), ref[x]));
      });
    }
    for (auto& th : pool) th.join();
    for (double d : worst) CHECK(d <= 1e-9);
    CHECK(eng.counts().mat_vec > 0);
  }

  TEST_CASE("hierarchy engine addressing") {
    CausalTree raw(2);
    const NodeIndex p = raw.add_node("p");
    const NodeIndex a = raw.add_node("a"), b = raw.add_node("b"), c = raw.add_node("c"), s = raw.add_node("s");
    raw.add_edge(p, a, Matrix(2, 2, {0.9, 0.1, 0.3, 0.7}));
    raw.add_edge(p, b, Matrix(2, 2, {0.6, 0.4, 0.2, 0.8}));
    raw.add_edge(p, c, Matrix(2, 2, {0.5, 0.5, 0.1, 0.9}));
    raw.add_edge(a, s, Matrix(2, 2, {0.8, 0.2, 0.4, 0.6}));
    raw.set_root(p);
    raw.set_prior({0.3, 0.7});
    const CausalTree t = binarize(raw);
    HierarchyEngine eng(t);

    const NodeId copy = t.node(testing::by_name(t, "p'")).id;
    CHECK(max_diff({eng.bel_query(copy)}, {eng.bel_query(raw.node(p).id)}) <= 1e-15);

    const NodeId dummy = t.node(testing::by_name(t, "a~dummy")).id;
    const Vector before = eng.bel_query(raw.node(p).id);
    CHECK_THROWS_AS(eng.update_evidence(dummy, {1, 0}), UsageError);
    CHECK(eng.bel_query(raw.node(p).id) == before);
    CHECK_THROWS_AS(eng.update_evidence(raw.node(s).id, {1, 0, 0}), DimensionError);
    CHECK_THROWS_AS(eng.update_evidence(raw.node(a).id, {1, 0}), UsageError);
    CHECK_THROWS_AS(eng.bel_query(NodeId{999}), LookupError);
    CHECK_THROWS_AS(eng.calc_pi_lambda(raw.node(s).id, 0), UsageError);
  }

  TEST_CASE("inconsistent evidence surfaces as an error, never NaN") {
    Rng rng(91);
    int raised = 0;
    for (int trial = 0; trial < 200; ++trial) {
      CausalTree t = random_binary_tree(1 + uniform_index(rng, 10), 2, rng);
      for (NodeIndex i = 0; i < t.size(); ++i)
        if (i != t.root()) t.set_edge_matrix(i, random_stochastic(2, 2, rng, 0.5));
      for (NodeIndex leaf : testing::updatable_leaves(t)) t.observe(leaf, uniform_index(rng, 2));
      HierarchyEngine eng(t);
      for (NodeIndex x = 0; x < t.size(); ++x) {
        try {
          const Vector b = eng.bel_query(t.node(x).id);
          for (double v : b) CHECK(std::isfinite(v));
        } catch (const InconsistentEvidence&) {
          ++raised;
          CHECK_THROWS_AS(propagate_all(t), InconsistentEvidence);
        }
      }
    }
    CHECK(raised > 0);
  }
}

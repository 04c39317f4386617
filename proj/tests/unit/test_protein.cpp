#include "doctest.h"

#include <cmath>
#include <sstream>

#include "fixtures.hpp"
#include "raketree/errors.hpp"
#include "raketree/exact.hpp"
#include "raketree/protein.hpp"

using namespace raketree;
using raketree::testing::by_name;

namespace {

ProteinTables gsat_tables() { return train({{"GSAT", "cchh"}}, 2); }

std::vector<Vector> exact_residue_beliefs(const ProteinModel& m) {
  const auto bel = propagate_all(m.tree());
  const std::size_t w = m.tables().w;
  std::vector<Vector> out;
  for (std::size_t site = 0; site < m.residues().size(); ++site) {
    const std::size_t t = std::min(site, m.windows() - 1);
    const Vector& b = bel[by_name(m.tree(), "s" + std::to_string(t))];
    Vector r(3, 0.0);
    for (std::size_t v = 0; v < b.size(); ++v) r[kStructureSymbols.find(decode_structure(v, w)[site - t])] += b[v];
    out.push_back(r);
  }
  return out;
}

double row_sum(const Matrix& m, std::size_t r) {
  double s = 0.0;
  for (double x : m.row(r)) s += x;
  return s;
}

}  // namespace

TEST_SUITE("protein") {
  TEST_CASE("encoding is mixed radix with c first") {
    CHECK(encode_structure("cc") == 0);
    CHECK(encode_structure("ch") == 1);
    CHECK(encode_structure("hh") == 4);
    CHECK(decode_structure(encode_structure("ehc"), 3) == "ehc");
    CHECK(encode_residues("GS") == 5 * 20 + 15);
    CHECK(windows_overlap(encode_structure("ch"), encode_structure("hh"), 2));
    CHECK_FALSE(windows_overlap(encode_structure("ch"), encode_structure("ch"), 2));
    CHECK_THROWS_AS(encode_residues("GB"), DomainError);
  }

  TEST_CASE("training on GSAT sees the pair windows") {
    const ProteinTables t = gsat_tables();
    CHECK(t.k() == 9);
    const std::size_t cc = encode_structure("cc"), ch = encode_structure("ch"), hh = encode_structure("hh");
    // Observed counts are one above the smoothing floor.
    CHECK(t.emission(cc, encode_residues("GS")) == doctest::Approx(2.0 / 401));
    CHECK(t.emission(ch, encode_residues("SA")) == doctest::Approx(2.0 / 401));
    CHECK(t.emission(hh, encode_residues("AT")) == doctest::Approx(2.0 / 401));
    CHECK(t.emission(cc, encode_residues("AT")) == doctest::Approx(1.0 / 401));
    CHECK(t.initial[cc] == doctest::Approx(2.0 / 10));
    CHECK(t.transition(cc, ch) == doctest::Approx(2.0 / 4));
    CHECK(t.transition(ch, hh) == doctest::Approx(2.0 / 4));
    CHECK(t.transition(cc, hh) == 0.0);
  }

  TEST_CASE("tables are row stochastic") {
    Rng rng(3);
    for (std::size_t w : {2u, 3u}) {
      const ProteinTables t = train(synthetic_corpus(20, 60, rng), w);
      double total = 0.0;
      for (double x : t.initial) total += x;
      CHECK(std::abs(total - 1.0) <= 1e-9);
      for (std::size_t r = 0; r < t.k(); ++r) {
        CHECK(std::abs(row_sum(t.transition, r) - 1.0) <= 1e-9);
        CHECK(std::abs(row_sum(t.emission, r) - 1.0) <= 1e-9);
      }
    }
  }

  TEST_CASE("identical labels concentrate the transition") {
    const ProteinTables t = train({{std::string(200, 'A'), std::string(200, 'h')}}, 2);
    const std::size_t hh = encode_structure("hh");
    CHECK(argmax_with_ties(Vector(t.transition.row(hh).begin(), t.transition.row(hh).end())) == hh);
    CHECK(t.transition(hh, hh) > 0.99);
  }

  TEST_CASE("training errors") {
    CHECK_THROWS_AS(train({}, 2), DomainError);
    CHECK_THROWS_AS(train({{"GSAT", "cchh"}}, 4), DomainError);
    CHECK_THROWS_AS(train({{"GSAT", "cchh"}}, 1), DomainError);
  }

  TEST_CASE("corpus parsing") {
    std::istringstream in("# comment\nGSAT cchh\n\nAC hh # trailing\n");
    const auto corpus = parse_corpus(in);
    REQUIRE(corpus.size() == 2);
    CHECK(corpus[1].structure == "hh");
    std::ostringstream out;
    write_corpus(out, corpus);
    std::istringstream again(out.str());
    CHECK(parse_corpus(again).size() == 2);
    std::istringstream bad("GSAT cchh\nGSAT cch\n");
    try {
      parse_corpus(bad);
      FAIL("expected a syntax error");
    } catch (const SyntaxError& e) {
      CHECK(e.line() == 2);
    }
    std::istringstream letter("GSXT cchh\n");
    CHECK_THROWS_AS(parse_corpus(letter), SyntaxError);
  }

  TEST_CASE("tables round trip through text") {
    Rng rng(5);
    const ProteinTables t = train(synthetic_corpus(5, 40, rng), 2);
    std::stringstream s;
    write_tables(s, t);
    const ProteinTables back = read_tables(s);
    CHECK(back.w == t.w);
    CHECK(back.initial == t.initial);
    CHECK(back.transition == t.transition);
    CHECK(back.emission == t.emission);
    std::istringstream bad("PROTEIN 1\nw 2\ninitial 1 2\n");
    CHECK_THROWS_AS(read_tables(bad), SyntaxError);
  }

  TEST_CASE("GSAT chain shape") {
    const CausalTree t = build_chain("GSAT", gsat_tables());
    CHECK(validate(t).empty());
    for (const char* name : {"s0", "s1", "s2", "e0", "e1", "e2"}) CHECK_NOTHROW(by_name(t, name));
    CHECK(t.node(by_name(t, "s1")).parent == by_name(t, "s0"));
    CHECK(t.node(by_name(t, "e2")).parent == by_name(t, "s2"));
    // Evidence at e1 is the emission column for SA.
    const ProteinTables tab = gsat_tables();
    const Vector lik = t.likelihood(by_name(t, "e1"));
    for (std::size_t a = 0; a < 9; ++a) CHECK(lik[a] == tab.emission(a, encode_residues("SA")));
  }

  TEST_CASE("minimal chain") {
    const CausalTree t = build_chain("GS", gsat_tables());
    CHECK(validate(t).empty());
    ProteinModel m(gsat_tables(), "GS");
    CHECK(m.windows() == 1);
    CHECK(m.predict().size() == 2);
    CHECK_THROWS_AS(build_chain("G", gsat_tables()), DomainError);
    CHECK_THROWS_AS(build_chain("GSBT", gsat_tables()), DomainError);
  }

  TEST_CASE("node count is about twice the window count") {
    Rng rng(7);
    const ProteinTables tab = train(synthetic_corpus(10, 50, rng), 2);
    for (std::size_t len : {5u, 40u, 301u}) {
      const std::string seq = synthetic_corpus(1, len, rng)[0].residues;
      const CausalTree t = build_chain(seq, tab);
      const std::size_t windows = len - 1;
      CHECK(validate(t).empty());
      // One dummy fills the last window's missing child.
      CHECK(t.size() == 2 * windows + 1);
    }
  }

  TEST_CASE("GSAT training example is recovered") {
    ProteinModel m(gsat_tables(), "GSAT");
    CHECK(m.predict() == "cchh");
    CHECK(decode_structure(argmax_with_ties(m.window_belief(0)), 2) == "cc");
    CHECK(decode_structure(argmax_with_ties(m.window_belief(1)), 2) == "ch");
    CHECK(decode_structure(argmax_with_ties(m.window_belief(2)), 2) == "hh");
  }

  TEST_CASE("uniform tables predict the tie symbol") {
    ProteinTables t;
    t.w = 2;
    t.initial.assign(9, 1.0 / 9);
    t.transition = Matrix(9, 9);
    for (std::size_t a = 0; a < 9; ++a)
      for (std::size_t b = 0; b < 9; ++b)
        if (windows_overlap(a, b, 2)) t.transition(a, b) = 1.0 / 3;
    t.emission = Matrix(9, 400, 1.0 / 400);
    ProteinModel m(t, "ACDEFGHIK");
    CHECK(m.predict() == std::string(9, 'c'));
  }

  TEST_CASE("decode ties") {
    CHECK(argmax_with_ties({0.2, 0.4, 0.4}) == 1);
    CHECK(argmax_with_ties({0.4 * (1 + 1e-14), 0.4, 0.2}) == 0);
    // Residue 1 gets one c vote and one e vote.
    std::vector<Vector> bel(2, Vector(9, 0.0));
    bel[0][encode_structure("hc")] = 1.0;
    bel[1][encode_structure("ec")] = 1.0;
    CHECK(decode_prediction(bel, 2) == "hcc");
  }

  TEST_CASE("argmax agrees with full propagation") {
    Rng rng(11);
    const ProteinTables tab = train(synthetic_corpus(30, 80, rng), 3);
    const std::string seq = synthetic_corpus(1, 120, rng)[0].residues;
    ProteinModel m(tab, seq);
    const auto exact = propagate_all(m.tree());
    for (std::size_t t = 0; t < m.windows(); ++t) {
      const Vector& e = exact[by_name(m.tree(), "s" + std::to_string(t))];
      CHECK(argmax_with_ties(m.window_belief(t)) == argmax_with_ties(e));
    }
  }

  TEST_CASE("mutating back restores beliefs") {
    Rng rng(13);
    const ProteinTables tab = train(synthetic_corpus(20, 80, rng), 2);
    const std::string seq = synthetic_corpus(1, 150, rng)[0].residues;
    ProteinModel m(tab, seq);
    std::vector<std::size_t> watch{0, 20, 75, 149};
    std::vector<Vector> before;
    for (auto s : watch) before.push_back(m.residue_belief(s));
    for (int i = 0; i < 20; ++i) {
      const std::size_t site = uniform_index(rng, seq.size());
      m.mutate(site, kAminoAcids[uniform_index(rng, 20)]);
      m.mutate(site, seq[site]);
    }
    for (std::size_t i = 0; i < watch.size(); ++i)
      for (std::size_t j = 0; j < 3; ++j) CHECK(std::abs(m.residue_belief(watch[i])[j] - before[i][j]) <= 1e-12);
  }

  TEST_CASE("same-residue mutation changes nothing") {
    Rng rng(17);
    const ProteinTables tab = train(synthetic_corpus(20, 80, rng), 3);
    const std::string seq = synthetic_corpus(1, 90, rng)[0].residues;
    ProteinModel m(tab, seq);
    const auto rows = m.mutagenesis(40, seq[40], {0, 39, 40, 89});
    for (const auto& r : rows) {
      for (std::size_t j = 0; j < 3; ++j) CHECK(std::abs(r.after[j] - r.before[j]) <= 1e-12);
      CHECK_FALSE(r.argmax_changed);
    }
  }

  TEST_CASE("mutagenesis report matches propagation from scratch") {
    Rng rng(19);
    const ProteinTables tab = train(synthetic_corpus(30, 80, rng), 2);
    const std::string seq = synthetic_corpus(1, 200, rng)[0].residues;
    ProteinModel m(tab, seq);
    std::vector<std::size_t> watch(200);
    for (std::size_t i = 0; i < watch.size(); ++i) watch[i] = i;
    for (int round = 0; round < 10; ++round) {
      const std::size_t site = uniform_index(rng, seq.size());
      const auto rows = m.mutagenesis(site, kAminoAcids[uniform_index(rng, 20)], watch);
      const auto exact = exact_residue_beliefs(m);
      for (const auto& r : rows)
        for (std::size_t j = 0; j < 3; ++j) CHECK(std::abs(r.after[j] - exact[r.watch][j]) <= 1e-9);
    }
  }

  TEST_CASE("mutate touches the covering windows") {
    Rng rng(23);
    const ProteinTables tab = train(synthetic_corpus(10, 50, rng), 3);
    ProteinModel m(tab, "ACDEFGHIKL");
    CHECK(m.mutate(0, 'W') == 1);
    CHECK(m.mutate(1, 'W') == 2);
    CHECK(m.mutate(5, 'W') == 3);
    CHECK(m.mutate(9, 'W') == 1);
    CHECK_THROWS_AS(m.mutate(10, 'W'), DomainError);
    CHECK_THROWS_AS(m.mutate(3, 'Z'), DomainError);
    CHECK_THROWS_AS(m.mutagenesis(3, 'A', {10}), DomainError);
  }

  TEST_CASE("report format") {
    std::ostringstream out;
    write_report(out, {{3, 4, {0.5, 0.25, 0.25}, {0.2, 0.7, 0.1}, true}});
    const std::string s = out.str();
    CHECK(s.rfind("site,watch_site,bel_before_c,bel_before_h,bel_before_e,bel_after_c,bel_after_h,bel_after_e,argmax_changed\n", 0) == 0);
    CHECK(s.find("\n3,4,0.5,0.25,0.25,") != std::string::npos);
    CHECK(s.substr(s.size() - 3) == ",1\n");
  }

  TEST_CASE("prediction is deterministic") {
    Rng rng(29);
    const ProteinTables tab = train(synthetic_corpus(20, 60, rng), 3);
    const std::string seq = synthetic_corpus(1, 100, rng)[0].residues;
    CHECK(ProteinModel(tab, seq).predict() == ProteinModel(tab, seq).predict());
  }

  TEST_CASE("mutation cycle is far cheaper than full propagation") {
    Rng rng(31);
    const ProteinTables tab = train(synthetic_corpus(20, 80, rng), 2);
    const std::string seq = synthetic_corpus(1, 301, rng)[0].residues;
    ProteinModel m(tab, seq);
    CHECK(m.tree().size() >= 600);
    OpCounts full;
    propagate_all(m.tree(), &full);
    const std::size_t cycles = 50;
    const OpCounts start = m.engine().counts();
    for (std::size_t i = 0; i < cycles; ++i) {
      m.mutagenesis(uniform_index(rng, seq.size()), kAminoAcids[uniform_index(rng, 20)], {150});
    }
    const OpCounts used = m.engine().counts();
    const double per_cycle = double((used.mat_vec + used.mat_mat) - (start.mat_vec + start.mat_mat)) / cycles;
    const double ratio = double(full.mat_vec + full.mat_mat) / per_cycle;
    MESSAGE("full/hierarchy op ratio " << ratio);
    CHECK(ratio >= 5.0);
  }
}

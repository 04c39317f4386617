#include "raketree/formats.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "raketree/dynamic.hpp"
#include "raketree/errors.hpp"

namespace raketree {

namespace {

struct Line {
  std::size_t number = 0;
  std::vector<std::string> tokens;

  const std::string& key() const { return tokens.front(); }
};

std::vector<Line> read_lines(std::istream& in) {
  std::vector<Line> out;
  std::string text;
  std::size_t number = 0;
  while (std::getline(in, text)) {
    ++number;
    if (auto hash = text.find('#'); hash != std::string::npos) text.resize(hash);
    std::istringstream fields(text);
    Line line{number, {}};
    for (std::string t; fields >> t;) line.tokens.push_back(std::move(t));
    if (!line.tokens.empty()) out.push_back(std::move(line));
  }
  return out;
}

std::size_t last_line(const std::vector<Line>& lines) { return lines.empty() ? 1 : lines.back().number; }

std::uint64_t parse_uint(const Line& line, std::size_t field) {
  if (field >= line.tokens.size()) throw SyntaxError(line.number, "missing field " + std::to_string(field));
  const std::string& t = line.tokens[field];
  std::uint64_t v = 0;
  auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || end != t.data() + t.size()) {
    throw SyntaxError(line.number, "expected a nonnegative integer, got '" + t + "'");
  }
  return v;
}

int parse_int(const Line& line, std::size_t field) {
  if (field >= line.tokens.size()) throw SyntaxError(line.number, "missing field " + std::to_string(field));
  const std::string& t = line.tokens[field];
  int v = 0;
  auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || end != t.data() + t.size()) throw SyntaxError(line.number, "expected an integer, got '" + t + "'");
  return v;
}

std::vector<double> parse_floats(const Line& line, std::size_t first) {
  std::vector<double> out;
  for (std::size_t i = first; i < line.tokens.size(); ++i) {
    const std::string& t = line.tokens[i];
    double v = 0.0;
    auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || end != t.data() + t.size()) throw SyntaxError(line.number, "expected a number, got '" + t + "'");
    out.push_back(v);
  }
  return out;
}

std::vector<double> parse_floats(const Line& line, std::size_t first, std::size_t count) {
  auto out = parse_floats(line, first);
  if (out.size() != count) {
    throw SyntaxError(line.number, "expected " + std::to_string(count) + " numbers, got " + std::to_string(out.size()));
  }
  return out;
}

void expect_fields(const Line& line, std::size_t n) {
  if (line.tokens.size() != n) throw SyntaxError(line.number, "'" + line.key() + "' takes " + std::to_string(n - 1) + " fields");
}

void expect_header(const std::vector<Line>& lines, const std::string& tag) {
  if (lines.empty()) throw SyntaxError(1, "empty file");
  const Line& h = lines.front();
  if (h.tokens.size() != 2 || h.tokens[0] != tag || h.tokens[1] != "1") {
    throw SyntaxError(h.number, "expected '" + tag + " 1' header");
  }
}

std::size_t read_k(const Line& line) {
  expect_fields(line, 2);
  const auto k = parse_uint(line, 1);
  if (k == 0) throw SyntaxError(line.number, "k must be positive");
  return k;
}

void require_k(const Line& line, std::size_t k) {
  if (k == 0) throw SyntaxError(line.number, "'k' must come before '" + line.key() + "'");
}

// Library errors raised while applying a line are reported at that line.
template <class F>
void at_line(const Line& line, F&& f) {
  try {
    f();
  } catch (const SyntaxError&) {
    throw;
  } catch (const Error& e) {
    throw SyntaxError(line.number, e.what());
  }
}

void throw_violations(const std::string& what, const std::vector<Violation>& violations) {
  if (violations.empty()) return;
  std::ostringstream msg;
  msg << "invalid " << what << ": " << violations.front().rule << " at " << violations.front().where << ": "
      << violations.front().message;
  if (violations.size() > 1) msg << " (+" << violations.size() - 1 << " more)";
  throw StructureError(msg.str());
}

std::ostream& floats(std::ostream& out, std::span<const double> values) {
  for (double v : values) out << ' ' << v;
  return out;
}

std::string display_name(const CausalTree& tree, NodeIndex i) {
  const auto& n = tree.node(i);
  return n.name.empty() ? "#" + std::to_string(value_of(n.id)) : n.name;
}

}  // namespace

ModelFormat sniff_format(std::istream& in) {
  const auto start = in.tellg();
  std::string text;
  std::size_t number = 0;
  std::string tag;
  while (std::getline(in, text)) {
    ++number;
    if (auto hash = text.find('#'); hash != std::string::npos) text.resize(hash);
    std::istringstream fields(text);
    if (fields >> tag) break;
  }
  in.clear();
  in.seekg(start);
  if (tag == "BTN") return ModelFormat::Btn;
  if (tag == "PTN") return ModelFormat::Ptn;
  if (tag == "JTN") return ModelFormat::Jtn;
  throw SyntaxError(number == 0 ? 1 : number, "unknown model format '" + tag + "'");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DomainError("cannot read '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

CausalTree read_btn(std::istream& in) {
  const auto lines = read_lines(in);
  expect_header(lines, "BTN");
  std::size_t k = 0;
  std::optional<CausalTree> tree;
  std::optional<std::uint64_t> root, prior_owner;
  std::vector<std::pair<const Line*, Vector>> evidence;
  auto index = [&](const Line& line, std::size_t field) {
    const auto id = parse_uint(line, field);
    const auto i = tree->find(NodeId{static_cast<std::uint32_t>(id)});
    if (!i) throw SyntaxError(line.number, "unknown node " + std::to_string(id));
    return *i;
  };
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const Line& line = lines[li];
    const std::string& key = line.key();
    if (key == "k") {
      if (k != 0) throw SyntaxError(line.number, "duplicate 'k'");
      k = read_k(line);
      tree.emplace(k);
      continue;
    }
    require_k(line, k);
    if (key == "node") {
      expect_fields(line, 3);
      const auto id = parse_uint(line, 1);
      if (id > UINT32_MAX - 1) throw SyntaxError(line.number, "node id out of range");
      if (tree->find(NodeId{static_cast<std::uint32_t>(id)})) throw SyntaxError(line.number, "duplicate node " + std::to_string(id));
      at_line(line, [&] { tree->add_node(NodeId{static_cast<std::uint32_t>(id)}, line.tokens[2]); });
    } else if (key == "root") {
      expect_fields(line, 2);
      if (root) throw SyntaxError(line.number, "duplicate 'root'");
      const auto i = index(line, 1);
      root = parse_uint(line, 1);
      at_line(line, [&] { tree->set_root(i); });
    } else if (key == "prior") {
      if (prior_owner) throw SyntaxError(line.number, "duplicate 'prior'");
      prior_owner = parse_uint(line, 1);
      index(line, 1);
      auto p = parse_floats(line, 2, k);
      at_line(line, [&] { tree->set_prior(std::move(p)); });
    } else if (key == "edge") {
      const auto parent = index(line, 1), child = index(line, 2);
      auto m = parse_floats(line, 3, k * k);
      at_line(line, [&] { tree->add_edge(parent, child, Matrix(k, k, std::move(m))); });
    } else if (key == "evidence") {
      index(line, 1);
      evidence.emplace_back(&line, parse_floats(line, 2, k));
    } else if (key == "dummy") {
      expect_fields(line, 2);
      const auto i = index(line, 1);
      at_line(line, [&] { tree->mark_dummy(i); });
    } else if (key == "alias") {
      expect_fields(line, 3);
      const auto copy = index(line, 1), original = index(line, 2);
      at_line(line, [&] { tree->set_alias(tree->node(copy).id, tree->node(original).id); });
    } else {
      throw SyntaxError(line.number, "unknown keyword '" + key + "'");
    }
  }
  if (k == 0) throw SyntaxError(last_line(lines), "missing 'k' line");
  if (!root) throw SyntaxError(last_line(lines), "missing 'root' line");
  if (prior_owner && *prior_owner != *root) throw SyntaxError(last_line(lines), "'prior' must name the root");
  for (auto& [line, lik] : evidence) {
    const auto i = index(*line, 1);
    at_line(*line, [&, i = i] { tree->set_evidence(i, std::move(lik)); });
  }
  CausalTree out = binarize(*tree);
  throw_violations("causal tree", validate(out));
  return out;
}

void write_btn(std::ostream& out, const CausalTree& tree) {
  out << std::setprecision(17) << "BTN 1\nk " << tree.k() << '\n';
  for (const auto& n : tree.nodes()) out << "node " << value_of(n.id) << ' ' << (n.name.empty() ? "_" : n.name) << '\n';
  for (const auto& n : tree.nodes())
    if (n.dummy) out << "dummy " << value_of(n.id) << '\n';
  for (const auto& [copy, original] : tree.aliases()) out << "alias " << value_of(copy) << ' ' << value_of(original) << '\n';
  if (tree.root() != kNoNode) {
    const auto root = value_of(tree.node(tree.root()).id);
    out << "root " << root << '\n';
    if (!tree.prior().empty()) floats(out << "prior " << root, tree.prior()) << '\n';
  }
  for (const auto& n : tree.nodes()) {
    if (n.parent == kNoNode) continue;
    floats(out << "edge " << value_of(tree.node(n.parent).id) << ' ' << value_of(n.id), n.edge.data()) << '\n';
  }
  for (const auto& n : tree.nodes())
    if (n.evidence && !n.dummy) floats(out << "evidence " << value_of(n.id), *n.evidence) << '\n';
}

Polytree read_ptn(std::istream& in) {
  const auto lines = read_lines(in);
  expect_header(lines, "PTN");
  std::size_t k = 0;
  std::optional<Polytree> pt;
  auto var = [&](const Line& line, std::size_t field) {
    const int id = parse_int(line, field);
    if (!pt->contains(id)) throw SyntaxError(line.number, "unknown node " + std::to_string(id));
    return id;
  };
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const Line& line = lines[li];
    const std::string& key = line.key();
    if (key == "k") {
      if (k != 0) throw SyntaxError(line.number, "duplicate 'k'");
      k = read_k(line);
      pt.emplace(k);
      continue;
    }
    require_k(line, k);
    if (key == "node") {
      expect_fields(line, 3);
      const int id = parse_int(line, 1);
      if (id < 0) throw SyntaxError(line.number, "node ids are nonnegative");
      if (pt->contains(id)) throw SyntaxError(line.number, "duplicate node " + std::to_string(id));
      at_line(line, [&] { pt->add_variable(id, line.tokens[2]); });
    } else if (key == "parents") {
      const int id = var(line, 1);
      std::vector<VarId> parents;
      for (std::size_t f = 2; f < line.tokens.size(); ++f) parents.push_back(var(line, f));
      at_line(line, [&] { pt->set_parents(id, std::move(parents)); });
    } else if (key == "cpt" || key == "prior") {
      const int id = var(line, 1);
      const std::size_t p = pt->variable(id).parents.size();
      if (key == "prior" && p != 0) throw SyntaxError(line.number, "'prior' is only for parentless nodes");
      std::size_t rows = 1;
      for (std::size_t i = 0; i < p; ++i) rows *= k;
      auto values = parse_floats(line, 2, rows * k);
      at_line(line, [&] { pt->set_cpt(id, Matrix(rows, k, std::move(values))); });
    } else {
      throw SyntaxError(line.number, "unknown keyword '" + key + "'");
    }
  }
  if (k == 0) throw SyntaxError(last_line(lines), "missing 'k' line");
  throw_violations("polytree", validate(*pt));
  return std::move(*pt);
}

void write_ptn(std::ostream& out, const Polytree& pt) {
  out << std::setprecision(17) << "PTN 1\nk " << pt.k() << '\n';
  for (const auto& v : pt.variables()) out << "node " << v.id << ' ' << (v.name.empty() ? "_" : v.name) << '\n';
  for (const auto& v : pt.variables()) {
    if (v.parents.empty()) continue;
    out << "parents " << v.id;
    for (VarId p : v.parents) out << ' ' << p;
    out << '\n';
  }
  for (const auto& v : pt.variables()) floats(out << (v.parents.empty() ? "prior " : "cpt ") << v.id, v.cpt.data()) << '\n';
}

JoinTree read_jtn(std::istream& in) {
  const auto lines = read_lines(in);
  expect_header(lines, "JTN");
  std::size_t k = 0;
  std::optional<JoinTree> tree;
  std::map<std::uint64_t, std::size_t> cliques;
  std::optional<std::size_t> root;
  std::optional<std::pair<const Line*, Vector>> prior;
  std::vector<const Line*> evidence;
  auto clique = [&](const Line& line, std::size_t field) {
    const auto id = parse_uint(line, field);
    const auto it = cliques.find(id);
    if (it == cliques.end()) throw SyntaxError(line.number, "unknown clique " + std::to_string(id));
    return it->second;
  };
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const Line& line = lines[li];
    const std::string& key = line.key();
    if (key == "k") {
      if (k != 0) throw SyntaxError(line.number, "duplicate 'k'");
      k = read_k(line);
      tree.emplace(k);
      continue;
    }
    require_k(line, k);
    if (key == "clique") {
      if (line.tokens.size() < 3) throw SyntaxError(line.number, "'clique' takes an id, a name and variables");
      const auto id = parse_uint(line, 1);
      if (cliques.count(id)) throw SyntaxError(line.number, "duplicate clique " + std::to_string(id));
      std::vector<VarId> vars;
      for (std::size_t f = 3; f < line.tokens.size(); ++f) vars.push_back(parse_int(line, f));
      at_line(line, [&] { cliques[id] = tree->add_clique(line.tokens[2], std::move(vars)); });
    } else if (key == "edge") {
      const auto parent = clique(line, 1), child = clique(line, 2);
      const auto& pc = tree->node(parent).clique;
      const auto& cc = tree->node(child).clique;
      std::size_t shared = 0;
      for (VarId v : cc.vars) shared += pc.contains(v) ? 1 : 0;
      std::size_t L = 0, K = 0;
      at_line(line, [&] {
        L = domain_size(k, shared);
        K = cc.K();
      });
      auto values = parse_floats(line, 3, L * K);
      at_line(line, [&] { tree->connect(parent, child, Matrix(L, K, std::move(values))); });
    } else if (key == "root") {
      expect_fields(line, 2);
      if (root) throw SyntaxError(line.number, "duplicate 'root'");
      root = clique(line, 1);
    } else if (key == "prior") {
      if (prior) throw SyntaxError(line.number, "duplicate 'prior'");
      prior.emplace(&line, parse_floats(line, 1));
    } else if (key == "evidence") {
      expect_fields(line, 3);
      parse_int(line, 1);
      clique(line, 2);
      evidence.push_back(&line);
    } else {
      throw SyntaxError(line.number, "unknown keyword '" + key + "'");
    }
  }
  if (k == 0) throw SyntaxError(last_line(lines), "missing 'k' line");
  if (!root) throw SyntaxError(last_line(lines), "missing 'root' line");
  if (!prior) throw SyntaxError(last_line(lines), "missing 'prior' line");
  at_line(*prior->first, [&] { tree->set_root(*root, std::move(prior->second)); });
  for (const Line* line : evidence) {
    at_line(*line, [&] { tree->attach_evidence(parse_int(*line, 1), clique(*line, 2)); });
  }
  throw_violations("join tree", validate(*tree));
  return std::move(*tree);
}

void write_jtn(std::ostream& out, const JoinTree& tree) {
  out << std::setprecision(17) << "JTN 1\nk " << tree.k() << '\n';
  for (std::size_t i = 0; i < tree.size(); ++i) {
    const auto& n = tree.node(i);
    if (n.kind == JoinNodeKind::Evidence) continue;
    if (n.kind != JoinNodeKind::Clique) throw UsageError("only clique and evidence nodes can be written");
    out << "clique " << i << ' ' << (n.name.empty() ? "_" : n.name);
    for (VarId v : n.clique.vars) out << ' ' << v;
    out << '\n';
  }
  if (tree.root() != SIZE_MAX) floats(out << "root " << tree.root() << "\nprior", tree.prior()) << '\n';
  for (std::size_t i = 0; i < tree.size(); ++i) {
    const auto& n = tree.node(i);
    if (n.kind != JoinNodeKind::Clique || n.parent == SIZE_MAX) continue;
    floats(out << "edge " << n.parent << ' ' << i, n.table.data()) << '\n';
  }
  for (std::size_t i = 0; i < tree.size(); ++i) {
    const auto& n = tree.node(i);
    if (n.kind == JoinNodeKind::Evidence) out << "evidence " << n.evidence_var << ' ' << n.parent << '\n';
  }
}

void write_contract_dump(std::ostream& out, const CausalTree& tree) {
  const HierarchyEngine engine(tree);
  const auto& h = engine.hierarchy();
  // Owner of each stored matrix: the node, side and level where it first appears.
  std::map<SlotId, std::string> owner;
  for (NodeIndex x = 0; x < h.node_count(); ++x) {
    for (std::size_t level = 0; level <= h.ind(x); ++level) {
      const LevelNode& n = h.at(x, level);
      for (int side = 0; side < 2; ++side) {
        if (n.slot[side] == kNoSlot) continue;
        owner.try_emplace(n.slot[side], display_name(tree, x) + (side == 0 ? ".A@" : ".B@") + std::to_string(level));
      }
    }
  }
  for (std::size_t level = 0; level < h.level_count(); ++level) {
    out << "level " << level << " nodes";
    for (NodeIndex x : h.nodes_at(level)) out << ' ' << display_name(tree, x);
    out << '\n';
  }
  for (const Recipe& r : h.recipes()) {
    out << r.level << ' ' << display_name(tree, r.target) << (r.target_side == Side::Left ? ".A" : ".B") << " <- "
        << owner.at(r.in_target) << ' ' << owner.at(r.in_leaf_edge) << " lambda(" << display_name(tree, r.raked_leaf)
        << ") " << owner.at(r.in_keep_edge) << '\n';
  }
}

}  // namespace raketree

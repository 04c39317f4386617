#include "raketree/protein.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "raketree/errors.hpp"

namespace raketree {

namespace {

std::size_t symbol_index(std::string_view alphabet, char c, const char* what) {
  const auto pos = alphabet.find(c);
  if (pos == std::string_view::npos) throw DomainError(std::string("unknown ") + what + " symbol '" + c + "'");
  return pos;
}

std::size_t power(std::size_t base, std::size_t e) {
  std::size_t out = 1;
  for (std::size_t i = 0; i < e; ++i) out *= base;
  return out;
}

void check_w(std::size_t w) {
  if (w != 2 && w != 3) throw DomainError("window length must be 2 or 3");
}

void normalize_row(Matrix& m, std::size_t r) {
  double sum = 0.0;
  for (double x : m.row(r)) sum += x;
  for (std::size_t c = 0; c < m.cols(); ++c) m(r, c) /= sum;
}

std::ostream& precise(std::ostream& out) { return out << std::setprecision(17); }

}  // namespace

std::vector<ProteinRecord> parse_corpus(std::istream& in) {
  std::vector<ProteinRecord> out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream fields(line);
    ProteinRecord r;
    if (!(fields >> r.residues)) continue;
    std::string extra;
    if (!(fields >> r.structure) || (fields >> extra)) {
      throw SyntaxError(number, "expected '<residues> <structure>'");
    }
    if (r.residues.size() != r.structure.size()) throw SyntaxError(number, "residue and structure lengths differ");
    for (char c : r.residues)
      if (kAminoAcids.find(c) == std::string_view::npos) throw SyntaxError(number, std::string("unknown amino acid '") + c + "'");
    for (char c : r.structure)
      if (kStructureSymbols.find(c) == std::string_view::npos) throw SyntaxError(number, std::string("unknown structure symbol '") + c + "'");
    out.push_back(std::move(r));
  }
  return out;
}

void write_corpus(std::ostream& out, const std::vector<ProteinRecord>& corpus) {
  for (const auto& r : corpus) out << r.residues << ' ' << r.structure << '\n';
}

std::size_t structure_states(std::size_t w) { return power(kStructureSymbols.size(), w); }
std::size_t residue_windows(std::size_t w) { return power(kAminoAcids.size(), w); }

std::size_t encode_structure(std::string_view window) {
  std::size_t v = 0;
  for (char c : window) v = v * kStructureSymbols.size() + symbol_index(kStructureSymbols, c, "structure");
  return v;
}

std::string decode_structure(std::size_t value, std::size_t w) {
  std::string out(w, '?');
  for (std::size_t i = w; i-- > 0;) {
    out[i] = kStructureSymbols[value % kStructureSymbols.size()];
    value /= kStructureSymbols.size();
  }
  return out;
}

std::size_t encode_residues(std::string_view window) {
  std::size_t v = 0;
  for (char c : window) v = v * kAminoAcids.size() + symbol_index(kAminoAcids, c, "amino-acid");
  return v;
}

bool windows_overlap(std::size_t from, std::size_t to, std::size_t w) {
  const std::string a = decode_structure(from, w), b = decode_structure(to, w);
  return a.substr(1) == b.substr(0, w - 1);
}

ProteinTables train(const std::vector<ProteinRecord>& corpus, std::size_t w) {
  check_w(w);
  if (corpus.empty()) throw DomainError("empty corpus");
  const std::size_t k = structure_states(w), m = residue_windows(w);
  ProteinTables t;
  t.w = w;
  t.initial.assign(k, 1.0);
  t.transition = Matrix(k, k);
  t.emission = Matrix(k, m);
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = 0; b < k; ++b)
      if (windows_overlap(a, b, w)) t.transition(a, b) = 1.0;
    for (std::size_t r = 0; r < m; ++r) t.emission(a, r) = 1.0;
  }
  bool any = false;
  for (const auto& rec : corpus) {
    if (rec.residues.size() != rec.structure.size()) throw DomainError("residue and structure lengths differ");
    if (rec.residues.size() < w) continue;
    any = true;
    std::size_t previous = 0;
    for (std::size_t i = 0; i + w <= rec.residues.size(); ++i) {
      const std::size_t s = encode_structure(std::string_view(rec.structure).substr(i, w));
      t.emission(s, encode_residues(std::string_view(rec.residues).substr(i, w))) += 1.0;
      if (i == 0) {
        t.initial[s] += 1.0;
      } else {
        t.transition(previous, s) += 1.0;
      }
      previous = s;
    }
  }
  if (!any) throw DomainError("corpus has no record of length >= w");
  double total = 0.0;
  for (double x : t.initial) total += x;
  for (double& x : t.initial) x /= total;
  for (std::size_t a = 0; a < k; ++a) {
    normalize_row(t.transition, a);
    normalize_row(t.emission, a);
  }
  return t;
}

void write_tables(std::ostream& out, const ProteinTables& t) {
  precise(out) << "PROTEIN 1\nw " << t.w << "\ninitial";
  for (double x : t.initial) out << ' ' << x;
  out << '\n';
  for (std::size_t a = 0; a < t.transition.rows(); ++a) {
    out << "transition " << a;
    for (double x : t.transition.row(a)) out << ' ' << x;
    out << '\n';
  }
  for (std::size_t a = 0; a < t.emission.rows(); ++a) {
    out << "emission " << a;
    for (double x : t.emission.row(a)) out << ' ' << x;
    out << '\n';
  }
}

ProteinTables read_tables(std::istream& in) {
  ProteinTables t;
  std::string line;
  std::size_t number = 0;
  bool header = false, have_w = false;
  std::size_t k = 0, m = 0, transitions = 0, emissions = 0;
  auto read_row = [&](std::istringstream& fields, std::size_t n) {
    Vector v(n);
    for (double& x : v)
      if (!(fields >> x)) throw SyntaxError(number, "expected " + std::to_string(n) + " numbers");
    std::string extra;
    if (fields >> extra) throw SyntaxError(number, "trailing fields");
    return v;
  };
  while (std::getline(in, line)) {
    ++number;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream fields(line);
    std::string key;
    if (!(fields >> key)) continue;
    if (!header) {
      std::string version;
      if (key != "PROTEIN" || !(fields >> version) || version != "1") throw SyntaxError(number, "expected 'PROTEIN 1'");
      header = true;
      continue;
    }
    if (key == "w") {
      if (!(fields >> t.w)) throw SyntaxError(number, "expected window length");
      try {
        check_w(t.w);
      } catch (const DomainError& e) {
        throw SyntaxError(number, e.what());
      }
      k = structure_states(t.w);
      m = residue_windows(t.w);
      t.transition = Matrix(k, k);
      t.emission = Matrix(k, m);
      have_w = true;
      continue;
    }
    if (!have_w) throw SyntaxError(number, "'w' must come first");
    if (key == "initial") {
      t.initial = read_row(fields, k);
    } else if (key == "transition" || key == "emission") {
      std::size_t row = 0;
      if (!(fields >> row) || row >= k) throw SyntaxError(number, "bad row index");
      const bool tr = key == "transition";
      const Vector v = read_row(fields, tr ? k : m);
      Matrix& target = tr ? t.transition : t.emission;
      std::copy(v.begin(), v.end(), target.data().begin() + static_cast<std::ptrdiff_t>(row * target.cols()));
      ++(tr ? transitions : emissions);
    } else {
      throw SyntaxError(number, "unknown keyword '" + key + "'");
    }
  }
  if (!header) throw SyntaxError(number, "missing 'PROTEIN 1' header");
  if (t.initial.size() != k || transitions != k || emissions != k) throw SyntaxError(number, "incomplete tables");
  return t;
}

CausalTree build_chain(std::string_view residues, const ProteinTables& tables) {
  const std::size_t w = tables.w;
  if (residues.size() < w) throw DomainError("sequence shorter than the window length");
  for (char c : residues) symbol_index(kAminoAcids, c, "amino-acid");
  const std::size_t windows = residues.size() - w + 1;
  const std::size_t k = tables.k();
  CausalTree raw(k);
  std::vector<NodeIndex> s(windows), e(windows);
  for (std::size_t t = 0; t < windows; ++t) s[t] = raw.add_node("s" + std::to_string(t));
  for (std::size_t t = 0; t < windows; ++t) e[t] = raw.add_node("e" + std::to_string(t));
  for (std::size_t t = 0; t < windows; ++t) {
    raw.add_edge(s[t], e[t], Matrix::identity(k));
    if (t + 1 < windows) raw.add_edge(s[t], s[t + 1], tables.transition);
    const std::size_t obs = encode_residues(residues.substr(t, w));
    Vector lik(k);
    for (std::size_t a = 0; a < k; ++a) lik[a] = tables.emission(a, obs);
    raw.set_evidence(e[t], std::move(lik));
  }
  raw.set_root(s[0]);
  raw.set_prior(tables.initial);
  return binarize(raw);
}

ProteinModel::ProteinModel(ProteinTables tables, std::string residues)
    : tables_(std::move(tables)), residues_(std::move(residues)), engine_(build_chain(residues_, tables_)) {
  const std::size_t windows = residues_.size() - tables_.w + 1;
  for (std::size_t t = 0; t < windows; ++t) {
    window_nodes_.push_back(NodeId{static_cast<std::uint32_t>(t)});
    evidence_nodes_.push_back(NodeId{static_cast<std::uint32_t>(windows + t)});
  }
}

Vector ProteinModel::window_likelihood(std::size_t t) const {
  const std::size_t obs = encode_residues(std::string_view(residues_).substr(t, tables_.w));
  Vector lik(tables_.k());
  for (std::size_t a = 0; a < lik.size(); ++a) lik[a] = tables_.emission(a, obs);
  return lik;
}

Vector ProteinModel::window_belief(std::size_t t) const { return engine_.bel_query(window_node(t)); }

Vector ProteinModel::residue_belief(std::size_t site) const {
  if (site >= residues_.size()) throw DomainError("site " + std::to_string(site) + " is outside the sequence");
  const std::size_t t = std::min(site, windows() - 1);
  const std::size_t offset = site - t;
  const Vector bel = window_belief(t);
  Vector out(kStructureSymbols.size(), 0.0);
  for (std::size_t v = 0; v < bel.size(); ++v) {
    const std::string window = decode_structure(v, tables_.w);
    out[kStructureSymbols.find(window[offset])] += bel[v];
  }
  return out;
}

std::string ProteinModel::predict() const {
  std::vector<Vector> beliefs;
  for (std::size_t t = 0; t < windows(); ++t) beliefs.push_back(window_belief(t));
  return decode_prediction(beliefs, tables_.w);
}

std::size_t ProteinModel::mutate(std::size_t site, char residue) {
  if (site >= residues_.size()) throw DomainError("site " + std::to_string(site) + " is outside the sequence");
  symbol_index(kAminoAcids, residue, "amino-acid");
  residues_[site] = residue;
  const std::size_t first = site + 1 >= tables_.w ? site + 1 - tables_.w : 0;
  const std::size_t last = std::min(site, windows() - 1);
  for (std::size_t t = first; t <= last; ++t) engine_.update_evidence(evidence_node(t), window_likelihood(t));
  return last - first + 1;
}

std::vector<WatchRow> ProteinModel::mutagenesis(std::size_t site, char residue, const std::vector<std::size_t>& watch) {
  for (std::size_t w : watch)
    if (w >= residues_.size()) throw DomainError("watch site " + std::to_string(w) + " is outside the sequence");
  std::vector<WatchRow> rows;
  for (std::size_t w : watch) rows.push_back({site, w, residue_belief(w), {}, false});
  mutate(site, residue);
  for (auto& row : rows) {
    row.after = residue_belief(row.watch);
    row.argmax_changed = argmax_with_ties(row.before) != argmax_with_ties(row.after);
  }
  return rows;
}

std::size_t argmax_with_ties(const Vector& v) {
  double best = -std::numeric_limits<double>::infinity();
  for (double x : v) best = std::max(best, x);
  const double slack = 1e-12 * std::abs(best);
  for (std::size_t i = 0; i < v.size(); ++i)
    if (v[i] >= best - slack) return i;
  return 0;
}

std::string decode_prediction(const std::vector<Vector>& window_beliefs, std::size_t w) {
  if (window_beliefs.empty()) return {};
  const std::size_t length = window_beliefs.size() + w - 1;
  std::vector<std::array<std::size_t, 3>> votes(length, {0, 0, 0});
  for (std::size_t t = 0; t < window_beliefs.size(); ++t) {
    const std::string window = decode_structure(argmax_with_ties(window_beliefs[t]), w);
    for (std::size_t j = 0; j < w; ++j) ++votes[t + j][kStructureSymbols.find(window[j])];
  }
  std::string out(length, 'c');
  for (std::size_t i = 0; i < length; ++i) {
    const auto& v = votes[i];
    const std::size_t best = *std::max_element(v.begin(), v.end());
    std::size_t winners = 0, which = 0;
    for (std::size_t s = 0; s < 3; ++s)
      if (v[s] == best) {
        ++winners;
        which = s;
      }
    out[i] = winners == 1 ? kStructureSymbols[which] : 'c';
  }
  return out;
}

void write_report(std::ostream& out, const std::vector<WatchRow>& rows) {
  out << "site,watch_site";
  for (const char* phase : {"before", "after"})
    for (char s : kStructureSymbols) out << ",bel_" << phase << '_' << s;
  out << ",argmax_changed\n";
  precise(out);
  for (const auto& r : rows) {
    out << r.site << ',' << r.watch;
    for (double x : r.before) out << ',' << x;
    for (double x : r.after) out << ',' << x;
    out << ',' << (r.argmax_changed ? 1 : 0) << '\n';
  }
}

std::vector<ProteinRecord> synthetic_corpus(std::size_t records, std::size_t length, Rng& rng) {
  // Residues each structure type favors.
  const std::string_view favored[3] = {"GPNDSTC", "AELMQKRH", "VIYFWT"};
  std::vector<ProteinRecord> out;
  for (std::size_t r = 0; r < records; ++r) {
    ProteinRecord rec;
    while (rec.structure.size() < length) {
      const std::size_t s = uniform_index(rng, 3);
      const std::size_t run = 3 + uniform_index(rng, 8);
      for (std::size_t i = 0; i < run && rec.structure.size() < length; ++i) {
        rec.structure += kStructureSymbols[s];
        rec.residues += uniform01(rng) < 0.7 ? favored[s][uniform_index(rng, favored[s].size())]
                                             : kAminoAcids[uniform_index(rng, kAminoAcids.size())];
      }
    }
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace raketree

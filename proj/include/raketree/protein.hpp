#pragma once

// Secondary-structure chain model: one structure-window node per position,
// each with one evidence leaf for the amino-acid window observed there.

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "raketree/dynamic.hpp"
#include "raketree/generate.hpp"
#include "raketree/linalg.hpp"
#include "raketree/tree.hpp"

namespace raketree {

// Symbol order fixes the value encoding (first symbol most significant).
inline constexpr std::string_view kStructureSymbols = "che";
inline constexpr std::string_view kAminoAcids = "ACDEFGHIKLMNPQRSTVWY";

struct ProteinRecord {
  std::string residues;
  std::string structure;
};

// One record per line: `<residues> <structure>`; `#` starts a comment.
std::vector<ProteinRecord> parse_corpus(std::istream& in);
void write_corpus(std::ostream& out, const std::vector<ProteinRecord>& corpus);

std::size_t structure_states(std::size_t w);  // 3^w
std::size_t residue_windows(std::size_t w);   // 20^w
std::size_t encode_structure(std::string_view window);
std::string decode_structure(std::size_t value, std::size_t w);
std::size_t encode_residues(std::string_view window);
// Windows agree when the tail of `from` equals the head of `to`.
bool windows_overlap(std::size_t from, std::size_t to, std::size_t w);

struct ProteinTables {
  std::size_t w = 2;
  Vector initial;    // first window
  Matrix transition; // consecutive windows; zero where windows disagree
  Matrix emission;   // structure window x residue window

  std::size_t k() const { return initial.size(); }
};

// Add-one smoothed frequency counts; inconsistent transitions stay zero.
ProteinTables train(const std::vector<ProteinRecord>& corpus, std::size_t w);
void write_tables(std::ostream& out, const ProteinTables& tables);
ProteinTables read_tables(std::istream& in);

// The chain for a residue sequence, normalized and ready for the engines.
// Window t is node "s<t>" with evidence leaf "e<t>" (t from 0).
CausalTree build_chain(std::string_view residues, const ProteinTables& tables);

struct WatchRow {
  std::size_t site = 0;
  std::size_t watch = 0;
  Vector before;
  Vector after;
  bool argmax_changed = false;
};

class ProteinModel {
 public:
  ProteinModel(ProteinTables tables, std::string residues);

  const ProteinTables& tables() const { return tables_; }
  const std::string& residues() const { return residues_; }
  const CausalTree& tree() const { return engine_.tree(); }
  const HierarchyEngine& engine() const { return engine_; }
  std::size_t windows() const { return window_nodes_.size(); }
  NodeId window_node(std::size_t t) const { return window_nodes_.at(t); }
  NodeId evidence_node(std::size_t t) const { return evidence_nodes_.at(t); }

  Vector window_belief(std::size_t t) const;
  // Marginal over c, h, e of the structure symbol at one residue.
  Vector residue_belief(std::size_t site) const;
  std::string predict() const;

  // Replaces one residue, re-posts the covering windows' evidence, returns
  // the number of evidence leaves touched.
  std::size_t mutate(std::size_t site, char residue);
  std::vector<WatchRow> mutagenesis(std::size_t site, char residue, const std::vector<std::size_t>& watch);

 private:
  Vector window_likelihood(std::size_t t) const;

  ProteinTables tables_;
  std::string residues_;
  HierarchyEngine engine_;
  std::vector<NodeId> window_nodes_;
  std::vector<NodeId> evidence_nodes_;
};

// Per-window argmax structure, decoded to a per-residue string by majority
// vote over covering windows; ties go to 'c'.
std::string decode_prediction(const std::vector<Vector>& window_beliefs, std::size_t w);
std::size_t argmax_with_ties(const Vector& v);

void write_report(std::ostream& out, const std::vector<WatchRow>& rows);

// Random labelled records with runs of each structure type.
std::vector<ProteinRecord> synthetic_corpus(std::size_t records, std::size_t length, Rng& rng);

}  // namespace raketree

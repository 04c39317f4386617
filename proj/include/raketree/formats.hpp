#pragma once

// Line-oriented text formats. Every format starts with a `<TAG> 1` header,
// `#` starts a comment, fields are whitespace separated.
//
//   BTN  causal trees:  k, node <id> <name>, root <id>, prior <id> <k>,
//        edge <parent> <child> <k*k>, evidence <leaf> <k>,
//        dummy <id>, alias <copy-id> <original-id>
//   PTN  polytrees:     k, node <id> <name>, parents <id> <ids...>,
//        cpt <id> <k^(p+1)>, prior <id> <k>
//   JTN  join trees:    k, clique <id> <name> <vars...>,
//        edge <parent> <child> <L*K>, root <id>, prior <K>,
//        evidence <var> <clique>

#include <iosfwd>
#include <string>

#include "raketree/jointree.hpp"
#include "raketree/polytree.hpp"
#include "raketree/tree.hpp"

namespace raketree {

enum class ModelFormat { Btn, Ptn, Jtn };

// Reads the header line; throws SyntaxError when it is not a known format.
ModelFormat sniff_format(std::istream& in);
std::string read_file(const std::string& path);  // throws DomainError

// Returns the normalized tree; throws SyntaxError or StructureError.
CausalTree read_btn(std::istream& in);
void write_btn(std::ostream& out, const CausalTree& tree);

Polytree read_ptn(std::istream& in);
void write_ptn(std::ostream& out, const Polytree& pt);

// Returns the tree as written (not binarized).
JoinTree read_jtn(std::istream& in);
// Only clique and evidence nodes can be written.
void write_jtn(std::ostream& out, const JoinTree& tree);

// Node sets per level, then one line per recipe:
//   <level> <target>.<A|B> <- <input> ...
// where inputs name stored matrices as <node>.<A|B>@<level> and the raked
// leaf's likelihood as lambda(<leaf>).
void write_contract_dump(std::ostream& out, const CausalTree& tree);

}  // namespace raketree

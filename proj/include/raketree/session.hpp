#pragma once

// Scripted sense/evaluate sessions over any engine. One command per line:
//   update <id> <k floats>   -> ok
//   query <id>               -> bel <k floats>
//   stats                    -> stats mv=<n> mm=<n> flops=<n>
//   quit
// Errors answer `err <message>` (`err inconsistent` for zero-mass evidence)
// and the session continues.

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "raketree/jointree.hpp"
#include "raketree/linalg.hpp"
#include "raketree/polytree.hpp"
#include "raketree/tree.hpp"

namespace raketree {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitData = 2, kExitInconsistent = 3 };

enum class TreeEngineKind { Hierarchy, Path, Full };
enum class JoinEngineKind { Factored, Expanded, Full };

TreeEngineKind parse_tree_engine(const std::string& name);  // throws UsageError
JoinEngineKind parse_join_engine(const std::string& name);
std::string engine_name(TreeEngineKind kind);
std::string engine_name(JoinEngineKind kind);

// Ids are node ids for causal trees and variable ids for join trees and
// polytrees.
class SessionBackend {
 public:
  virtual ~SessionBackend() = default;
  virtual std::size_t k() const = 0;
  virtual void update(std::uint32_t id, Vector likelihood) = 0;
  virtual Vector query(std::uint32_t id) = 0;
  virtual OpCounts counts() const = 0;
  // Ids accepted by update and query.
  virtual std::vector<std::uint32_t> update_targets() const = 0;
  virtual std::vector<std::uint32_t> query_targets() const = 0;
};

std::unique_ptr<SessionBackend> make_tree_backend(CausalTree tree, TreeEngineKind kind);
std::unique_ptr<SessionBackend> make_join_backend(JoinTree tree, JoinEngineKind kind);
std::unique_ptr<SessionBackend> make_polytree_backend(const Polytree& pt, JoinEngineKind kind);

std::string format_belief(const Vector& belief);  // "bel ..." at 17 significant digits

// Returns kExitOk after `quit`; at end of input returns kExitInconsistent if
// any command hit inconsistent evidence, kExitOk otherwise.
int run_session(std::istream& in, std::ostream& out, SessionBackend& backend);

}  // namespace raketree

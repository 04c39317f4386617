#pragma once

// Benchmark harness: alternating update/query mixes on random models, one
// CSV row per (engine, size, op). Counts are deterministic under a fixed
// seed; only the ns columns vary between runs.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "raketree/generate.hpp"
#include "raketree/polytree.hpp"
#include "raketree/session.hpp"

namespace raketree {

struct BenchRecord {
  std::string engine;
  std::string shape;
  std::size_t n = 0;
  std::size_t k = 0;
  std::string op;  // update or query
  std::uint64_t count_mv = 0;
  std::uint64_t count_mm = 0;
  std::uint64_t ns_total = 0;
  double ns_per_op = 0.0;
};

struct BenchConfig {
  Shape shape = Shape::Chain;
  std::vector<std::size_t> sizes;  // internal nodes, ascending
  std::size_t k = 2;
  std::size_t ops = 100;
  std::uint64_t seed = 1;
  std::vector<TreeEngineKind> engines{TreeEngineKind::Hierarchy, TreeEngineKind::Path, TreeEngineKind::Full};
};

// Largest accepted model, in stored matrix entries.
inline constexpr std::uint64_t kMaxBenchEntries = std::uint64_t{1} << 28;

// Throws ScaleError for oversized models, UsageError for unsorted sizes.
std::vector<BenchRecord> run_tree_bench(const BenchConfig& config);

// The same op mix on a polytree; `n` is the variable count.
std::vector<BenchRecord> run_polytree_bench(const Polytree& pt, const std::string& label, std::size_t ops,
                                            std::uint64_t seed, const std::vector<JoinEngineKind>& engines);

// Runs `ops` alternating update/query commands (updates first) against one
// backend; returns the update and query records with engine/shape unset.
std::vector<BenchRecord> run_op_mix(SessionBackend& backend, std::size_t ops, std::uint64_t seed);

void write_bench_csv(std::ostream& out, const std::vector<BenchRecord>& records);

}  // namespace raketree

#include "raketree/bench.hpp"

#include <chrono>
#include <iomanip>
#include <ostream>

#include "raketree/errors.hpp"

namespace raketree {

namespace {

void check_scale(std::size_t internal, std::size_t k) {
  // Level-0 edges plus at most twice as many fresh matrices.
  const long double entries = (2.0L * internal + 1.0L) * k * k * 3.0L;
  if (entries > static_cast<long double>(kMaxBenchEntries)) {
    throw ScaleError("model with " + std::to_string(internal) + " internal nodes and k=" + std::to_string(k) +
                     " exceeds the benchmark memory limit");
  }
}

}  // namespace

std::vector<BenchRecord> run_op_mix(SessionBackend& backend, std::size_t ops, std::uint64_t seed) {
  using Clock = std::chrono::steady_clock;
  const auto updates = backend.update_targets();
  const auto queries = backend.query_targets();
  if (ops > 0 && (updates.empty() || queries.empty())) throw UsageError("model has nothing to update or query");
  Rng rng(seed);
  BenchRecord rec[2];
  rec[0].op = "update";
  rec[1].op = "query";
  std::size_t done[2] = {0, 0};
  for (std::size_t i = 0; i < ops; ++i) {
    const int kind = static_cast<int>(i % 2);
    const OpCounts before = backend.counts();
    Clock::time_point start;
    if (kind == 0) {
      const std::uint32_t id = updates[uniform_index(rng, updates.size())];
      Vector lik = random_likelihood(backend.k(), rng);
      start = Clock::now();
      backend.update(id, std::move(lik));
    } else {
      const std::uint32_t id = queries[uniform_index(rng, queries.size())];
      start = Clock::now();
      backend.query(id);
    }
    rec[kind].ns_total += static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - start).count());
    const OpCounts after = backend.counts();
    rec[kind].count_mv += after.mat_vec - before.mat_vec;
    rec[kind].count_mm += after.mat_mat - before.mat_mat;
    ++done[kind];
  }
  std::vector<BenchRecord> out;
  for (int kind = 0; kind < 2; ++kind) {
    if (done[kind] == 0) continue;
    rec[kind].ns_per_op = static_cast<double>(rec[kind].ns_total) / static_cast<double>(done[kind]);
    out.push_back(rec[kind]);
  }
  return out;
}

std::vector<BenchRecord> run_tree_bench(const BenchConfig& config) {
  for (std::size_t i = 1; i < config.sizes.size(); ++i)
    if (config.sizes[i] < config.sizes[i - 1]) throw UsageError("sizes must be ascending");
  if (config.k == 0) throw UsageError("k must be positive");
  for (std::size_t n : config.sizes) check_scale(n, config.k);
  std::vector<BenchRecord> out;
  if (config.ops == 0) return out;
  for (std::size_t n : config.sizes) {
    Rng model_rng(config.seed + n);
    const CausalTree tree = make_tree(config.shape, n, config.k, model_rng);
    for (TreeEngineKind kind : config.engines) {
      auto backend = make_tree_backend(tree, kind);
      for (auto& r : run_op_mix(*backend, config.ops, config.seed + n)) {
        r.engine = engine_name(kind);
        r.shape = shape_name(config.shape);
        r.n = n;
        r.k = config.k;
        out.push_back(std::move(r));
      }
    }
  }
  return out;
}

std::vector<BenchRecord> run_polytree_bench(const Polytree& pt, const std::string& label, std::size_t ops,
                                            std::uint64_t seed, const std::vector<JoinEngineKind>& engines) {
  std::vector<BenchRecord> out;
  if (ops == 0) return out;
  for (JoinEngineKind kind : engines) {
    auto backend = make_polytree_backend(pt, kind);
    for (auto& r : run_op_mix(*backend, ops, seed)) {
      r.engine = engine_name(kind);
      r.shape = label;
      r.n = pt.size();
      r.k = pt.k();
      out.push_back(std::move(r));
    }
  }
  return out;
}

void write_bench_csv(std::ostream& out, const std::vector<BenchRecord>& records) {
  out << "engine,shape,N,k,op,count_mv,count_mm,ns_total,ns_per_op\n";
  for (const auto& r : records) {
    out << r.engine << ',' << r.shape << ',' << r.n << ',' << r.k << ',' << r.op << ',' << r.count_mv << ','
        << r.count_mm << ',' << r.ns_total << ',' << std::fixed << std::setprecision(1) << r.ns_per_op
        << std::defaultfloat << '\n';
  }
}

}  // namespace raketree

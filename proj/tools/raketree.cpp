// raketree: command-line front end for the causal-tree, join-tree, polytree
// and protein-chain engines.

#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "raketree/bench.hpp"
#include "raketree/dynamic.hpp"
#include "raketree/errors.hpp"
#include "raketree/formats.hpp"
#include "raketree/protein.hpp"
#include "raketree/session.hpp"

using namespace raketree;

namespace {

std::istringstream open_model(const std::string& path) { return std::istringstream(read_file(path)); }

CausalTree load_btn(const std::string& path) {
  auto in = open_model(path);
  return read_btn(in);
}

Polytree load_ptn(const std::string& path) {
  auto in = open_model(path);
  return read_ptn(in);
}

JoinTree load_jtn(const std::string& path) {
  auto in = open_model(path);
  return read_jtn(in);
}

ProteinTables load_tables(const std::string& path) {
  auto in = open_model(path);
  return read_tables(in);
}

// Writes to `path`, or to stdout when it is empty or "-".
void emit(const std::string& path, const std::function<void(std::ostream&)>& write) {
  if (path.empty() || path == "-") {
    write(std::cout);
    return;
  }
  std::ofstream out(path);
  if (!out) throw DomainError("cannot write '" + path + "'");
  write(out);
}

int check(const std::string& path) {
  auto in = open_model(path);
  switch (sniff_format(in)) {
    case ModelFormat::Btn: {
      const HierarchyEngine engine(read_btn(in));
      const auto& h = engine.hierarchy();
      std::cout << "ok btn k=" << engine.tree().k() << " nodes=" << engine.tree().size()
                << " leaves=" << engine.tree().leaves_in_order().size() << " levels=" << h.level_count()
                << " recipes=" << h.recipes().size() << '\n';
      break;
    }
    case ModelFormat::Ptn: {
      const Polytree pt = read_ptn(in);
      const PolytreePlan plan = to_join_tree(pt);
      std::cout << "ok ptn k=" << pt.k() << " variables=" << pt.size() << " max_parents=" << pt.max_in_degree()
                << " join_nodes=" << plan.tree.size() << '\n';
      break;
    }
    case ModelFormat::Jtn: {
      const JoinTree jt = read_jtn(in);
      std::cout << "ok jtn k=" << jt.k() << " nodes=" << jt.size() << " variables=" << jt.variables().size() << '\n';
      break;
    }
  }
  return kExitOk;
}

std::vector<std::size_t> parse_list(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream s(text);
  for (std::string item; std::getline(s, item, ',');) {
    if (item.empty()) continue;
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(item, &pos);
    } catch (const std::exception&) {
      pos = std::string::npos;
    }
    if (pos != item.size()) throw UsageError("bad list entry '" + item + "'");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

std::vector<std::string> split_names(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream s(text);
  for (std::string item; std::getline(s, item, ',');)
    if (!item.empty()) out.push_back(item);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Logarithmic-time belief updates on causal trees"};
  app.require_subcommand(1);
  std::function<int()> action;

  std::string file, engine = "hierarchy", output;
  auto* check_cmd = app.add_subcommand("check", "Validate a BTN, PTN or JTN file");
  check_cmd->add_option("file", file, "Model file")->required();
  check_cmd->callback([&] { action = [&] { return check(file); }; });

  auto* dump_cmd = app.add_subcommand("contract-dump", "Print the contraction levels and recipes of a BTN tree");
  dump_cmd->add_option("file", file, "BTN file")->required();
  dump_cmd->callback([&] {
    action = [&] {
      write_contract_dump(std::cout, load_btn(file));
      return int{kExitOk};
    };
  });

  auto* session_cmd = app.add_subcommand("session", "Answer update/query commands from stdin");
  session_cmd->add_option("file", file, "BTN file")->required();
  session_cmd->add_option("-e,--engine", engine, "hierarchy, path or full");
  session_cmd->callback([&] {
    action = [&] {
      const auto kind = parse_tree_engine(engine);
      auto backend = make_tree_backend(load_btn(file), kind);
      return run_session(std::cin, std::cout, *backend);
    };
  });

  std::string shape = "chain", sizes = "64,128,256", engines;
  std::size_t k = 2, ops = 100;
  std::uint64_t seed = 1;
  auto* bench_cmd = app.add_subcommand("bench", "Operation counts and timings on random trees, as CSV");
  bench_cmd->add_option("--shape", shape, "chain, balanced or random");
  bench_cmd->add_option("--sizes", sizes, "Comma-separated internal node counts, ascending");
  bench_cmd->add_option("-k", k, "Domain size");
  bench_cmd->add_option("--ops", ops, "Operations per size, alternating update and query");
  bench_cmd->add_option("--seed", seed, "Random seed");
  bench_cmd->add_option("--engines", engines, "Comma-separated subset of hierarchy,path,full");
  bench_cmd->add_option("-o,--output", output, "CSV file (default stdout)");
  bench_cmd->callback([&] {
    action = [&] {
      BenchConfig config;
      config.shape = parse_shape(shape);
      config.sizes = parse_list(sizes);
      config.k = k;
      config.ops = ops;
      config.seed = seed;
      if (!engines.empty()) {
        config.engines.clear();
        for (const auto& e : split_names(engines)) config.engines.push_back(parse_tree_engine(e));
      }
      const auto records = run_tree_bench(config);
      emit(output, [&](std::ostream& out) { write_bench_csv(out, records); });
      return int{kExitOk};
    };
  });

  auto* protein_cmd = app.add_subcommand("protein", "Secondary-structure chain model");
  protein_cmd->require_subcommand(1);
  std::string corpus, tables, sequence, residue, watch;
  std::size_t w = 2, site = 0, records = 20, length = 100;
  auto* train_cmd = protein_cmd->add_subcommand("train", "Estimate tables from a labelled corpus");
  train_cmd->add_option("corpus", corpus, "Corpus file, one '<residues> <structure>' per line")->required();
  train_cmd->add_option("-w", w, "Window length (2 or 3)");
  train_cmd->add_option("-o,--output", output, "Tables file (default stdout)");
  train_cmd->callback([&] {
    action = [&] {
      auto in = open_model(corpus);
      const ProteinTables t = train(parse_corpus(in), w);
      emit(output, [&](std::ostream& out) { write_tables(out, t); });
      return int{kExitOk};
    };
  });
  auto* predict_cmd = protein_cmd->add_subcommand("predict", "Predict the structure string of a sequence");
  predict_cmd->add_option("tables", tables, "Tables file")->required();
  predict_cmd->add_option("sequence", sequence, "Amino-acid sequence")->required();
  predict_cmd->callback([&] {
    action = [&] {
      const ProteinModel model(load_tables(tables), sequence);
      std::cout << model.predict() << '\n';
      return int{kExitOk};
    };
  });
  auto* mutate_cmd = protein_cmd->add_subcommand("mutate", "Mutate one residue and report watched beliefs as CSV");
  mutate_cmd->add_option("tables", tables, "Tables file")->required();
  mutate_cmd->add_option("sequence", sequence, "Amino-acid sequence")->required();
  mutate_cmd->add_option("--site", site, "0-based residue position")->required();
  mutate_cmd->add_option("--residue", residue, "Replacement amino acid")->required();
  mutate_cmd->add_option("--watch", watch, "Comma-separated 0-based watch sites")->required();
  mutate_cmd->callback([&] {
    action = [&] {
      if (residue.size() != 1) throw UsageError("--residue takes one amino-acid letter");
      ProteinModel model(load_tables(tables), sequence);
      const auto rows = model.mutagenesis(site, residue[0], parse_list(watch));
      write_report(std::cout, rows);
      return int{kExitOk};
    };
  });
  auto* synth_cmd = protein_cmd->add_subcommand("synth", "Write a random labelled corpus");
  synth_cmd->add_option("--records", records, "Number of records");
  synth_cmd->add_option("--length", length, "Residues per record");
  synth_cmd->add_option("--seed", seed, "Random seed");
  synth_cmd->callback([&] {
    action = [&] {
      Rng rng(seed);
      write_corpus(std::cout, synthetic_corpus(records, length, rng));
      return int{kExitOk};
    };
  });

  std::string join_engine = "factored";
  auto* polytree_cmd = app.add_subcommand("polytree", "Polytrees from PTN files");
  polytree_cmd->require_subcommand(1);
  auto* pt_session = polytree_cmd->add_subcommand("session", "Answer update/query commands on variables");
  pt_session->add_option("file", file, "PTN file")->required();
  pt_session->add_option("-e,--engine", join_engine, "factored, expanded or full");
  pt_session->callback([&] {
    action = [&] {
      const auto kind = parse_join_engine(join_engine);
      auto backend = make_polytree_backend(load_ptn(file), kind);
      return run_session(std::cin, std::cout, *backend);
    };
  });
  auto* pt_bench = polytree_cmd->add_subcommand("bench", "Operation counts on a PTN model, as CSV");
  pt_bench->add_option("file", file, "PTN file")->required();
  pt_bench->add_option("--ops", ops, "Operations, alternating update and query");
  pt_bench->add_option("--seed", seed, "Random seed");
  pt_bench->add_option("--engines", engines, "Comma-separated subset of factored,expanded,full");
  pt_bench->add_option("-o,--output", output, "CSV file (default stdout)");
  pt_bench->callback([&] {
    action = [&] {
      std::vector<JoinEngineKind> kinds{JoinEngineKind::Factored, JoinEngineKind::Expanded, JoinEngineKind::Full};
      if (!engines.empty()) {
        kinds.clear();
        for (const auto& e : split_names(engines)) kinds.push_back(parse_join_engine(e));
      }
      const auto records = run_polytree_bench(load_ptn(file), "polytree", ops, seed, kinds);
      emit(output, [&](std::ostream& out) { write_bench_csv(out, records); });
      return int{kExitOk};
    };
  });

  auto* jointree_cmd = app.add_subcommand("jointree", "Join trees from JTN files");
  jointree_cmd->require_subcommand(1);
  auto* jt_session = jointree_cmd->add_subcommand("session", "Answer update/query commands on variables");
  jt_session->add_option("file", file, "JTN file")->required();
  jt_session->add_option("-e,--engine", join_engine, "factored, expanded or full");
  jt_session->callback([&] {
    action = [&] {
      const auto kind = parse_join_engine(join_engine);
      auto backend = make_join_backend(load_jtn(file), kind);
      return run_session(std::cin, std::cout, *backend);
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    return action ? action() : kExitUsage;
  } catch (const InconsistentEvidence& e) {
    std::cerr << "raketree: inconsistent evidence: " << e.what() << '\n';
    return kExitInconsistent;
  } catch (const UsageError& e) {
    std::cerr << "raketree: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "raketree: " << e.what() << '\n';
    return kExitData;
  }
}

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "raketree/dynamic.hpp"
#include "raketree/errors.hpp"
#include "raketree/exact.hpp"
#include "raketree/formats.hpp"
#include "raketree/polytree.hpp"
#include "raketree/protein.hpp"
#include "raketree/session.hpp"

namespace py = pybind11;
using namespace raketree;

namespace {

using Rows = std::vector<std::vector<double>>;

Matrix matrix_of(const Rows& rows) {
  if (rows.empty()) return {};
  Matrix m(rows.size(), rows[0].size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != m.cols()) throw DimensionError("ragged matrix rows");
    for (std::size_t c = 0; c < m.cols(); ++c) m(r, c) = rows[r][c];
  }
  return m;
}

py::dict counts_dict(const OpCounts& c) {
  py::dict d;
  d["mv"] = c.mat_vec;
  d["mm"] = c.mat_mat;
  d["flops"] = c.flops;
  return d;
}

NodeId id_of(const CausalTree& t, std::uint32_t id) { return t.resolve(NodeId{id}); }

}  // namespace

PYBIND11_MODULE(raketree, m) {
  m.doc() = "Logarithmic-time evidence updates and belief queries on causal trees";

  auto base = py::register_exception<Error>(m, "RaketreeError");
  py::register_exception<InconsistentEvidence>(m, "InconsistentEvidence", base.ptr());
  py::register_exception<SyntaxError>(m, "SyntaxError", base.ptr());

  py::class_<CausalTree>(m, "CausalTree")
      .def(py::init<std::size_t>(), py::arg("k"))
      .def_property_readonly("k", &CausalTree::k)
      .def("__len__", &CausalTree::size)
      .def("add_node", py::overload_cast<std::string>(&CausalTree::add_node), py::arg("name"),
           "Adds a node and returns its index")
      .def("add_edge", [](CausalTree& t, NodeIndex p, NodeIndex c, const Rows& rows) { t.add_edge(p, c, matrix_of(rows)); },
           py::arg("parent"), py::arg("child"), py::arg("matrix"))
      .def("set_root", &CausalTree::set_root)
      .def("set_prior", &CausalTree::set_prior)
      .def("set_evidence", &CausalTree::set_evidence, py::arg("leaf"), py::arg("likelihood"))
      .def("observe", &CausalTree::observe, py::arg("leaf"), py::arg("value"))
      .def("index", [](const CausalTree& t, const std::string& name) {
        for (NodeIndex i = 0; i < t.size(); ++i)
          if (t.node(i).name == name) return i;
        throw LookupError("no node named '" + name + "'");
      })
      .def("node_id", [](const CausalTree& t, NodeIndex i) { return value_of(t.node(i).id); })
      .def("name", [](const CausalTree& t, NodeIndex i) { return t.node(i).name; })
      .def("is_leaf", &CausalTree::is_leaf)
      .def("is_dummy", [](const CausalTree& t, NodeIndex i) { return t.node(i).dummy; });

  m.def("binarize", [](const CausalTree& t) { return binarize(t); }, py::arg("tree"));
  m.def("validate", [](const CausalTree& t) {
    std::vector<std::tuple<std::string, std::string, std::string>> out;
    for (const auto& v : validate(t)) out.emplace_back(v.rule, v.where, v.message);
    return out;
  });
  m.def("read_btn", [](const std::string& text) {
    std::istringstream in(text);
    return read_btn(in);
  });
  m.def("write_btn", [](const CausalTree& t) {
    std::ostringstream out;
    write_btn(out, t);
    return out.str();
  });
  m.def("propagate_all", [](const CausalTree& t) { return propagate_all(t); });
  m.def("joint_marginals", [](const CausalTree& t) { return joint_marginals(t); });

  py::class_<HierarchyEngine>(m, "HierarchyEngine")
      .def(py::init<CausalTree>(), py::arg("tree"))
      .def_property_readonly("tree", &HierarchyEngine::tree, py::return_value_policy::reference_internal)
      .def_property_readonly("levels", [](const HierarchyEngine& e) { return e.hierarchy().level_count(); })
      .def("update", [](HierarchyEngine& e, std::uint32_t id, Vector lik) {
        return e.update_evidence(id_of(e.tree(), id), std::move(lik)).size();
      }, py::arg("node_id"), py::arg("likelihood"), "Returns the number of recomputed matrices")
      .def("belief", [](const HierarchyEngine& e, std::uint32_t id) { return e.bel_query(id_of(e.tree(), id)); },
           py::arg("node_id"))
      .def("counts", [](const HierarchyEngine& e) { return counts_dict(e.counts()); })
      .def("matches_rebuild", [](const HierarchyEngine& e) { return e.hierarchy().matches_rebuild(); });

  py::class_<Polytree>(m, "Polytree")
      .def_property_readonly("k", &Polytree::k)
      .def("__len__", &Polytree::size)
      .def("ids", [](const Polytree& pt) {
        std::vector<VarId> out;
        for (const auto& v : pt.variables()) out.push_back(v.id);
        return out;
      });
  m.def("read_ptn", [](const std::string& text) {
    std::istringstream in(text);
    return read_ptn(in);
  });

  py::class_<PolytreeEngine>(m, "PolytreeEngine")
      .def(py::init([](const Polytree& pt, const std::string& rep) {
             if (rep != "factored" && rep != "expanded") throw UsageError("representation is factored or expanded");
             return std::make_unique<PolytreeEngine>(
                 pt, rep == "factored" ? JoinRepresentation::Factored : JoinRepresentation::Expanded);
           }),
           py::arg("polytree"), py::arg("representation") = "factored")
      .def("update", &PolytreeEngine::pt_update, py::arg("var"), py::arg("likelihood"))
      .def("query", py::overload_cast<VarId>(&PolytreeEngine::pt_query, py::const_), py::arg("var"))
      .def("counts", [](const PolytreeEngine& e) { return counts_dict(e.counts()); });

  py::class_<ProteinTables>(m, "ProteinTables")
      .def_readonly("w", &ProteinTables::w)
      .def_property_readonly("k", &ProteinTables::k);
  m.def("train", [](const std::vector<std::pair<std::string, std::string>>& records, std::size_t w) {
    std::vector<ProteinRecord> corpus;
    for (const auto& [r, s] : records) corpus.push_back({r, s});
    return train(corpus, w);
  }, py::arg("records"), py::arg("w") = 2, "records: (residues, structure) pairs");

  py::class_<ProteinModel>(m, "ProteinModel")
      .def(py::init<ProteinTables, std::string>(), py::arg("tables"), py::arg("residues"))
      .def_property_readonly("residues", &ProteinModel::residues)
      .def("predict", &ProteinModel::predict)
      .def("residue_belief", &ProteinModel::residue_belief, py::arg("site"))
      .def("mutate", &ProteinModel::mutate, py::arg("site"), py::arg("residue"));

  m.def("session", [](const std::string& btn_text, const std::string& engine, const std::string& script) {
    std::istringstream model(btn_text);
    auto backend = make_tree_backend(read_btn(model), parse_tree_engine(engine));
    std::istringstream in(script);
    std::ostringstream out;
    const int rc = run_session(in, out, *backend);
    return std::make_pair(out.str(), rc);
  }, py::arg("btn"), py::arg("engine"), py::arg("script"), "Returns (replies, exit code)");
}

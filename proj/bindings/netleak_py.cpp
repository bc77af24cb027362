#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "netleak/assignment.hpp"
#include "netleak/claims.hpp"
#include "netleak/community.hpp"
#include "netleak/graph.hpp"
#include "netleak/pipeline.hpp"
#include "netleak/profile.hpp"
#include "netleak/synth.hpp"
#include "netleak/trade.hpp"

namespace py = pybind11;
using namespace netleak;

namespace {

using EdgeList = std::vector<std::tuple<std::string, std::string, std::uint32_t>>;

ProviderGraph graph_from_edges(const EdgeList& edges) {
    std::ostringstream csv;
    csv << "npi_a,npi_b,weight\n";
    for (const auto& [a, b, w] : edges) csv << a << "," << b << "," << w << "\n";
    std::istringstream in(csv.str());
    return read_edge_csv(in);
}

nlohmann::json json_from_py(const py::dict& d) {
    const auto dumped = py::cast<std::string>(py::module_::import("json").attr("dumps")(d));
    return nlohmann::json::parse(dumped);
}

py::object py_from_json(const nlohmann::json& j) {
    return py::module_::import("json").attr("loads")(j.dump());
}

RunConfig config_from_dict(const py::dict& d) { return RunConfig::from_json(json_from_py(d)); }

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Provider patient-sharing networks, community detection, and service-leakage "
              "analysis from claims data";

    m.def(
        "modularity",
        [](const EdgeList& edges, const std::unordered_map<std::string, std::uint32_t>& labels) {
            const auto graph = graph_from_edges(edges);
            std::vector<std::uint32_t> dense(graph.node_count(), kNoCommunity);
            for (std::size_t i = 0; i < graph.node_count(); ++i) {
                auto it = labels.find(graph.nodes()[i].npi);
                if (it != labels.end()) dense[i] = it->second;
            }
            return modularity(graph, dense);
        },
        py::arg("edges"), py::arg("labels"),
        "Weighted modularity of a labeling. edges: [(npi_a, npi_b, weight)]; labels: {npi: "
        "community}.");

    m.def(
        "fast_greedy",
        [](const EdgeList& edges) {
            const auto graph = graph_from_edges(edges);
            const auto partition = fast_greedy(graph);
            py::dict labels;
            for (std::size_t i = 0; i < graph.node_count(); ++i)
                labels[py::str(graph.nodes()[i].npi)] = partition.community_of[i];
            py::dict result;
            result["communities"] = labels;
            result["q"] = partition.modularity;
            result["n_communities"] = partition.n_communities;
            result["merge_count"] = partition.merge_log.size();
            return result;
        },
        py::arg("edges"),
        "Agglomerative modularity maximization over a weighted edge list; returns the labeling, "
        "Q, and merge count.");

    m.def(
        "adjusted_rand_index",
        [](const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b) {
            return adjusted_rand_index(a, b);
        },
        py::arg("labels_a"), py::arg("labels_b"));

    m.def("herfindahl", &herfindahl, py::arg("org_ids"),
          "Herfindahl index over organizational market share; empty org ids count as singleton "
          "organizations.");

    m.def("risk_adjusted_pmpm", &risk_adjusted_pmpm, py::arg("pmpm"), py::arg("mean_risk"));

    m.def(
        "rca",
        [](const std::vector<std::tuple<std::uint32_t, std::string, std::uint64_t>>& counts,
           const std::string& direction) {
            TradeMatrix matrix;
            const bool is_import = direction == "import";
            if (!is_import && direction != "export")
                throw py::value_error("direction must be 'import' or 'export'");
            std::uint32_t n = 0;
            for (const auto& [community, specialty, count] : counts) {
                auto& slot = is_import ? matrix.import_counts : matrix.export_counts;
                slot[{community, specialty}] += count;
                n = std::max(n, community + 1);
            }
            matrix.n_communities = n;
            const auto table = rca(matrix, is_import ? TradeDirection::imports
                                                     : TradeDirection::exports);
            std::vector<std::tuple<std::uint32_t, std::string, std::optional<double>>> out;
            for (const auto& [key, value] : table.values)
                out.emplace_back(key.first, key.second, value);
            return out;
        },
        py::arg("counts"), py::arg("direction") = "import",
        "Revealed comparative advantage per (community, specialty). counts: [(community, "
        "specialty, count)]. Undefined entries are None.");

    m.def(
        "generate_synthetic",
        [](const py::dict& config, const std::string& out_dir) {
            const auto synth = SynthConfig::from_json(json_from_py(config));
            return write_synth_output(generate(synth), out_dir);
        },
        py::arg("config"), py::arg("out_dir"),
        "Generate seeded synthetic claims/patients with planted communities; returns the "
        "written file paths.");

    m.def(
        "run_pipeline",
        [](const py::dict& config) {
            const auto summary = run_pipeline(config_from_dict(config));
            py::dict result;
            result["q"] = summary.q;
            result["n_communities"] = summary.n_communities;
            result["n_providers"] = summary.n_providers;
            result["n_patients"] = summary.n_patients;
            result["n_visits"] = summary.n_visits;
            result["out_dir"] = summary.out_dir;
            return result;
        },
        py::arg("config"),
        "Run ingest -> graph -> detect -> assign -> profile -> trade -> report; returns the "
        "run summary. config mirrors the CLI JSON schema.");

    m.def(
        "run_stage",
        [](const std::string& stage, const py::dict& config) {
            const auto cfg = config_from_dict(config);
            if (stage == "synth") run_synth(cfg);
            else if (stage == "ingest") run_ingest(cfg);
            else if (stage == "graph") run_graph(cfg);
            else if (stage == "detect") run_detect(cfg);
            else if (stage == "assign") run_assign(cfg);
            else if (stage == "profile") run_profile(cfg);
            else if (stage == "trade") run_trade(cfg);
            else if (stage == "report") run_report(cfg);
            else throw py::value_error("unknown stage: " + stage);
        },
        py::arg("stage"), py::arg("config"),
        "Run a single pipeline stage against the artifact directory in config['out'].");

    m.def("default_config", []() { return py_from_json(RunConfig{}.to_json()); },
          "Default run configuration as a dict.");

    m.attr("__version__") = kVersion;
}

#include "netleak/graph.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include "netleak/csv.hpp"

namespace netleak {

PcpSpecialtySet::PcpSpecialtySet(const std::vector<std::string>& labels) {
    for (const auto& label : labels) keys_.insert(normalize_specialty(label).key);
}

PcpSpecialtySet PcpSpecialtySet::defaults() {
    return PcpSpecialtySet({"Family Medicine", "Internal Medicine", "General Practice",
                            "Geriatric Medicine", "Pediatrics"});
}

bool PcpSpecialtySet::contains(std::string_view specialty_key) const {
    return keys_.find(specialty_key) != keys_.end();
}

std::vector<std::string> PcpSpecialtySet::labels() const {
    return {keys_.begin(), keys_.end()};
}

ProviderGraph::ProviderGraph(std::vector<ProviderNode> nodes, std::vector<GraphEdge> edges)
    : nodes_(std::move(nodes)), edges_(std::move(edges)) {
    for (const auto& e : edges_) {
        if (e.u == e.v) throw std::invalid_argument("self-loop edge");
        if (e.u >= nodes_.size() || e.v >= nodes_.size())
            throw std::invalid_argument("edge endpoint out of range");
    }
    std::sort(edges_.begin(), edges_.end(), [](const GraphEdge& a, const GraphEdge& b) {
        return std::tie(a.u, a.v) < std::tie(b.u, b.v);
    });
}

std::optional<std::uint32_t> ProviderGraph::index_of(std::string_view npi) const {
    auto it = std::lower_bound(nodes_.begin(), nodes_.end(), npi,
                               [](const ProviderNode& n, std::string_view key) { return n.npi < key; });
    if (it == nodes_.end() || it->npi != npi) return std::nullopt;
    return static_cast<std::uint32_t>(it - nodes_.begin());
}

std::uint64_t ProviderGraph::total_weight() const {
    std::uint64_t m = 0;
    for (const auto& e : edges_) m += e.weight;
    return m;
}

std::vector<std::uint64_t> ProviderGraph::weighted_degrees() const {
    std::vector<std::uint64_t> deg(nodes_.size(), 0);
    for (const auto& e : edges_) {
        deg[e.u] += e.weight;
        deg[e.v] += e.weight;
    }
    return deg;
}

namespace {

using PairCounts = std::unordered_map<std::uint64_t, std::uint32_t>;

std::uint64_t pair_key(std::uint32_t u, std::uint32_t v) {
    return (static_cast<std::uint64_t>(u) << 32) | v;
}

void count_patient_pairs(const std::vector<std::vector<std::uint32_t>>& patient_providers,
                         std::size_t begin, std::size_t end, PairCounts& out) {
    for (std::size_t p = begin; p < end; ++p) {
        const auto& providers = patient_providers[p];
        for (std::size_t i = 0; i < providers.size(); ++i)
            for (std::size_t j = i + 1; j < providers.size(); ++j)
                ++out[pair_key(providers[i], providers[j])];
    }
}

}  // namespace

ProviderGraph shared_patient_counts(const std::vector<Visit>& visits,
                                    const std::vector<ProviderInfo>& directory,
                                    const PcpSpecialtySet& pcp_set, unsigned threads) {
    // node set: every provider with >= 1 visit, ordered by npi
    std::set<std::string> npis;
    for (const auto& v : visits) npis.insert(v.npi);

    std::vector<ProviderNode> nodes;
    nodes.reserve(npis.size());
    std::unordered_map<std::string, std::uint32_t> index;
    index.reserve(npis.size());
    for (const auto& npi : npis) {
        ProviderNode node;
        node.npi = npi;
        if (const ProviderInfo* info = find_provider(directory, npi)) {
            node.specialty = info->specialty;
            node.specialty_key = info->specialty_key;
            node.org_id = info->org_id;
        }
        node.is_pcp = pcp_set.contains(node.specialty_key);
        index.emplace(npi, static_cast<std::uint32_t>(nodes.size()));
        nodes.push_back(std::move(node));
    }

    // distinct provider set per patient
    std::map<std::string, std::unordered_set<std::uint32_t>> by_patient;
    for (const auto& v : visits) by_patient[v.patient_id].insert(index.at(v.npi));

    std::vector<std::vector<std::uint32_t>> patient_providers;
    patient_providers.reserve(by_patient.size());
    for (auto& [_, providers] : by_patient) {
        std::vector<std::uint32_t> sorted(providers.begin(), providers.end());
        std::sort(sorted.begin(), sorted.end());
        for (std::uint32_t p : sorted) ++nodes[p].unique_patient_count;
        patient_providers.push_back(std::move(sorted));
    }

    PairCounts counts;
    if (threads <= 1 || patient_providers.size() < 2 * threads) {
        count_patient_pairs(patient_providers, 0, patient_providers.size(), counts);
    } else {
        // per-chunk counting merges commutatively, so the result does not
        // depend on the thread count
        std::vector<PairCounts> partials(threads);
        std::vector<std::thread> workers;
        const std::size_t chunk = (patient_providers.size() + threads - 1) / threads;
        for (unsigned t = 0; t < threads; ++t) {
            const std::size_t begin = std::min<std::size_t>(t * chunk, patient_providers.size());
            const std::size_t end = std::min<std::size_t>(begin + chunk, patient_providers.size());
            workers.emplace_back(count_patient_pairs, std::cref(patient_providers), begin, end,
                                 std::ref(partials[t]));
        }
        for (auto& w : workers) w.join();
        for (const auto& partial : partials)
            for (const auto& [key, count] : partial) counts[key] += count;
    }

    std::vector<GraphEdge> edges;
    edges.reserve(counts.size());
    for (const auto& [key, weight] : counts)
        edges.push_back({static_cast<std::uint32_t>(key >> 32),
                         static_cast<std::uint32_t>(key & 0xffffffffu), weight});
    return ProviderGraph(std::move(nodes), std::move(edges));
}

ProviderGraph apply_thresholds(const ProviderGraph& graph, int min_patients_per_provider,
                               int min_edge_weight) {
    if (min_patients_per_provider < 1 || min_edge_weight < 1)
        throw std::invalid_argument("thresholds must be >= 1");

    const auto& nodes = graph.nodes();
    std::vector<std::uint32_t> remap(nodes.size(), UINT32_MAX);
    std::vector<ProviderNode> kept;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i].unique_patient_count >= static_cast<std::uint32_t>(min_patients_per_provider)) {
            remap[i] = static_cast<std::uint32_t>(kept.size());
            kept.push_back(nodes[i]);
        }
    }

    std::vector<GraphEdge> edges;
    for (const auto& e : graph.edges()) {
        if (remap[e.u] == UINT32_MAX || remap[e.v] == UINT32_MAX) continue;
        if (e.weight < static_cast<std::uint32_t>(min_edge_weight)) continue;
        edges.push_back({remap[e.u], remap[e.v], e.weight});
    }
    return ProviderGraph(std::move(kept), std::move(edges));
}

std::optional<GraphFormat> parse_graph_format(std::string_view name) {
    std::string v = to_lower_ascii(trim_copy(name));
    if (v == "edge-csv" || v == "csv") return GraphFormat::edge_csv;
    if (v == "gexf") return GraphFormat::gexf;
    if (v == "dot") return GraphFormat::dot;
    return std::nullopt;
}

namespace {

std::string xml_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

std::string dot_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    return out;
}

std::string export_gexf(const ProviderGraph& graph, std::span<const std::uint32_t> community_of,
                        std::uint32_t min_display_weight) {
    std::string out;
    out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<gexf xmlns=\"http://www.gexf.net/1.2draft\" version=\"1.2\">\n";
    out += "  <graph defaultedgetype=\"undirected\">\n";
    out += "    <attributes class=\"node\">\n";
    out += "      <attribute id=\"0\" title=\"specialty\" type=\"string\"/>\n";
    out += "      <attribute id=\"1\" title=\"is_pcp\" type=\"boolean\"/>\n";
    if (!community_of.empty())
        out += "      <attribute id=\"2\" title=\"community\" type=\"integer\"/>\n";
    out += "    </attributes>\n";
    out += "    <nodes>\n";
    for (std::size_t i = 0; i < graph.node_count(); ++i) {
        const auto& n = graph.nodes()[i];
        out += "      <node id=\"" + xml_escape(n.npi) + "\" label=\"" + xml_escape(n.npi) + "\">\n";
        out += "        <attvalues>\n";
        out += "          <attvalue for=\"0\" value=\"" + xml_escape(n.specialty) + "\"/>\n";
        out += std::string("          <attvalue for=\"1\" value=\"") + (n.is_pcp ? "true" : "false") +
               "\"/>\n";
        if (!community_of.empty())
            out += "          <attvalue for=\"2\" value=\"" + std::to_string(community_of[i]) + "\"/>\n";
        out += "        </attvalues>\n";
        out += "      </node>\n";
    }
    out += "    </nodes>\n";
    out += "    <edges>\n";
    std::size_t edge_id = 0;
    for (const auto& e : graph.edges()) {
        if (e.weight < min_display_weight) continue;
        out += "      <edge id=\"" + std::to_string(edge_id++) + "\" source=\"" +
               xml_escape(graph.nodes()[e.u].npi) + "\" target=\"" + xml_escape(graph.nodes()[e.v].npi) +
               "\" weight=\"" + std::to_string(e.weight) + "\"/>\n";
    }
    out += "    </edges>\n";
    out += "  </graph>\n";
    out += "</gexf>\n";
    return out;
}

std::string export_dot(const ProviderGraph& graph, std::span<const std::uint32_t> community_of,
                       std::uint32_t min_display_weight) {
    std::string out = "graph providers {\n";
    for (std::size_t i = 0; i < graph.node_count(); ++i) {
        const auto& n = graph.nodes()[i];
        out += "  \"" + dot_escape(n.npi) + "\" [specialty=\"" + dot_escape(n.specialty) + "\"";
        if (!community_of.empty()) out += " community=" + std::to_string(community_of[i]);
        out += "];\n";
    }
    for (const auto& e : graph.edges()) {
        if (e.weight < min_display_weight) continue;
        out += "  \"" + dot_escape(graph.nodes()[e.u].npi) + "\" -- \"" +
               dot_escape(graph.nodes()[e.v].npi) + "\" [weight=" + std::to_string(e.weight) + "];\n";
    }
    out += "}\n";
    return out;
}

std::string export_edge_csv(const ProviderGraph& graph, std::uint32_t min_display_weight) {
    std::string out = "npi_a,npi_b,weight\n";
    for (const auto& e : graph.edges()) {
        if (e.weight < min_display_weight) continue;
        // nodes are sorted by npi, so (u < v) is already lexicographic
        std::vector<std::string> row{graph.nodes()[e.u].npi, graph.nodes()[e.v].npi,
                                     std::to_string(e.weight)};
        out += csv::join_row(row);
    }
    return out;
}

}  // namespace

std::string export_graph(const ProviderGraph& graph, GraphFormat format,
                         std::span<const std::uint32_t> community_of,
                         std::uint32_t min_display_weight) {
    if (!community_of.empty() && community_of.size() != graph.node_count())
        throw std::invalid_argument("community labeling does not cover all nodes");
    switch (format) {
        case GraphFormat::edge_csv: return export_edge_csv(graph, min_display_weight);
        case GraphFormat::gexf: return export_gexf(graph, community_of, min_display_weight);
        case GraphFormat::dot: return export_dot(graph, community_of, min_display_weight);
    }
    throw std::invalid_argument("unknown graph format");
}

std::string write_nodes_csv(const ProviderGraph& graph) {
    std::string out = "npi,specialty,org_id,is_pcp,unique_patient_count\n";
    for (const auto& n : graph.nodes()) {
        std::vector<std::string> row{n.npi, n.specialty, n.org_id, n.is_pcp ? "1" : "0",
                                     std::to_string(n.unique_patient_count)};
        out += csv::join_row(row);
    }
    return out;
}

std::string write_edges_csv(const ProviderGraph& graph) {
    return export_graph(graph, GraphFormat::edge_csv);
}

namespace {

std::vector<GraphEdge> parse_edge_rows(csv::Reader& reader,
                                       const std::unordered_map<std::string, std::uint32_t>& index,
                                       std::vector<ProviderNode>* nodes_out) {
    std::unordered_map<std::string, std::uint32_t> index_local = index;
    std::vector<GraphEdge> edges;
    while (auto row = reader.next()) {
        if (row->size() < 3) throw std::runtime_error("edge csv: malformed row");
        auto lookup = [&](const std::string& npi) -> std::uint32_t {
            auto it = index_local.find(npi);
            if (it != index_local.end()) return it->second;
            if (nodes_out == nullptr) throw std::runtime_error("edge csv: unknown npi " + npi);
            std::uint32_t id = static_cast<std::uint32_t>(nodes_out->size());
            ProviderNode node;
            node.npi = npi;
            nodes_out->push_back(std::move(node));
            index_local.emplace(npi, id);
            return id;
        };
        std::uint32_t u = lookup((*row)[0]);
        std::uint32_t v = lookup((*row)[1]);
        std::uint32_t w = static_cast<std::uint32_t>(std::stoul((*row)[2]));
        if (u > v) std::swap(u, v);
        edges.push_back({u, v, w});
    }
    return edges;
}

}  // namespace

ProviderGraph read_graph_csv(std::istream& nodes_csv, std::istream& edges_csv) {
    csv::Reader nodes_reader(nodes_csv);
    auto header = nodes_reader.next();
    if (!header || header->size() < 5 || (*header)[0] != "npi")
        throw std::runtime_error("graph nodes csv: bad header");
    std::vector<ProviderNode> nodes;
    std::unordered_map<std::string, std::uint32_t> index;
    while (auto row = nodes_reader.next()) {
        if (row->size() < 5) throw std::runtime_error("graph nodes csv: malformed row");
        ProviderNode n;
        n.npi = (*row)[0];
        auto label = normalize_specialty((*row)[1]);
        n.specialty = label.display;
        n.specialty_key = label.key;
        n.org_id = (*row)[2];
        n.is_pcp = (*row)[3] == "1";
        n.unique_patient_count = static_cast<std::uint32_t>(std::stoul((*row)[4]));
        index.emplace(n.npi, static_cast<std::uint32_t>(nodes.size()));
        nodes.push_back(std::move(n));
    }

    csv::Reader edges_reader(edges_csv);
    auto edge_header = edges_reader.next();
    if (!edge_header || edge_header->size() < 3)
        throw std::runtime_error("graph edges csv: bad header");
    auto edges = parse_edge_rows(edges_reader, index, nullptr);
    return ProviderGraph(std::move(nodes), std::move(edges));
}

ProviderGraph read_edge_csv(std::istream& edges_csv) {
    csv::Reader reader(edges_csv);
    auto header = reader.next();
    if (!header || header->size() < 3) throw std::runtime_error("edge csv: bad header");
    std::vector<ProviderNode> nodes;
    auto edges = parse_edge_rows(reader, {}, &nodes);

    // canonical order: sort nodes by npi and remap edge endpoints
    std::vector<std::uint32_t> order(nodes.size());
    for (std::uint32_t i = 0; i < nodes.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::uint32_t a, std::uint32_t b) { return nodes[a].npi < nodes[b].npi; });
    std::vector<std::uint32_t> remap(nodes.size());
    std::vector<ProviderNode> sorted;
    sorted.reserve(nodes.size());
    for (std::uint32_t rank = 0; rank < order.size(); ++rank) {
        remap[order[rank]] = rank;
        sorted.push_back(std::move(nodes[order[rank]]));
    }
    for (auto& e : edges) {
        e.u = remap[e.u];
        e.v = remap[e.v];
        if (e.u > e.v) std::swap(e.u, e.v);
    }
    return ProviderGraph(std::move(sorted), std::move(edges));
}

}  // namespace netleak

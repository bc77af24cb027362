#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "netleak/claims.hpp"

namespace netleak {

/// PCP specialty membership, matched on case-folded keys.
class PcpSpecialtySet {
  public:
    PcpSpecialtySet() = default;
    explicit PcpSpecialtySet(const std::vector<std::string>& labels);

    static PcpSpecialtySet defaults();

    bool contains(std::string_view specialty_key) const;
    std::vector<std::string> labels() const;

  private:
    std::set<std::string, std::less<>> keys_;
};

struct ProviderNode {
    std::string npi;
    std::string specialty;
    std::string specialty_key;
    std::string org_id;
    bool is_pcp = false;
    std::uint32_t unique_patient_count = 0;
};

struct GraphEdge {
    std::uint32_t u = 0;  // node indices, u < v
    std::uint32_t v = 0;
    std::uint32_t weight = 0;  // distinct shared patients
};

/// Undirected weighted patient-sharing graph. Nodes are sorted by npi and
/// edges by (u, v), which makes every serialization canonical.
class ProviderGraph {
  public:
    ProviderGraph() = default;
    ProviderGraph(std::vector<ProviderNode> nodes, std::vector<GraphEdge> edges);

    const std::vector<ProviderNode>& nodes() const { return nodes_; }
    const std::vector<GraphEdge>& edges() const { return edges_; }

    std::size_t node_count() const { return nodes_.size(); }
    std::size_t edge_count() const { return edges_.size(); }

    std::optional<std::uint32_t> index_of(std::string_view npi) const;

    /// Sum of edge weights (m); total degree volume is 2m.
    std::uint64_t total_weight() const;

    std::vector<std::uint64_t> weighted_degrees() const;

  private:
    std::vector<ProviderNode> nodes_;
    std::vector<GraphEdge> edges_;
};

/// Builds the unfiltered graph: edge weight = number of distinct patients
/// who visited both endpoints during the study period. Provider attributes
/// come from the directory; node set = every provider with at least one
/// visit. `threads` partitions patients for counting; the merged result is
/// identical for any thread count.
ProviderGraph shared_patient_counts(const std::vector<Visit>& visits,
                                    const std::vector<ProviderInfo>& directory,
                                    const PcpSpecialtySet& pcp_set,
                                    unsigned threads = 1);

/// Provider filter first (unique patients below threshold removed with
/// their incident edges), then edge filter. Isolated nodes are retained.
ProviderGraph apply_thresholds(const ProviderGraph& graph, int min_patients_per_provider = 5,
                               int min_edge_weight = 2);

enum class GraphFormat { edge_csv, gexf, dot };

std::optional<GraphFormat> parse_graph_format(std::string_view name);

/// Serializes the graph. `community_of` (one id per node, optional) is
/// emitted as a node attribute; edges under min_display_weight are
/// omitted (a display aid, never an analysis filter).
std::string export_graph(const ProviderGraph& graph, GraphFormat format,
                         std::span<const std::uint32_t> community_of = {},
                         std::uint32_t min_display_weight = 0);

/// Canonical CSV artifacts for pipeline stages.
std::string write_nodes_csv(const ProviderGraph& graph);
std::string write_edges_csv(const ProviderGraph& graph);
ProviderGraph read_graph_csv(std::istream& nodes_csv, std::istream& edges_csv);

/// Rebuilds a graph from an edge list alone (round-trip of edge_csv
/// export); node attributes default.
ProviderGraph read_edge_csv(std::istream& edges_csv);

}  // namespace netleak

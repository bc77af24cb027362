#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "netleak/assignment.hpp"
#include "netleak/claims.hpp"

namespace netleak {

enum class TradeDirection { imports, exports };

std::string to_string(TradeDirection d);

/// Cross-community service accounting. Every cross-community visit is one
/// import (to the patient's community) and one export (from the provider's
/// community), keyed by the provider's servicing specialty.
struct TradeMatrix {
    using CommunitySpecialty = std::pair<std::uint32_t, std::string>;
    using PairFlow = std::tuple<std::uint32_t, std::uint32_t, std::string>;  // from, to, specialty

    std::map<CommunitySpecialty, std::uint64_t> import_counts;
    std::map<CommunitySpecialty, std::uint64_t> export_counts;
    std::map<PairFlow, std::uint64_t> pair_flows;  // from = exporter, to = importer
    std::uint64_t within_count = 0;
    std::uint64_t excluded_count = 0;  // unassigned patient or unpartitioned provider
    std::uint32_t n_communities = 0;
    bool spend_weighted = false;  // counts are cents instead of visits

    const std::map<CommunitySpecialty, std::uint64_t>& counts(TradeDirection d) const {
        return d == TradeDirection::imports ? import_counts : export_counts;
    }

    std::vector<std::string> specialties(TradeDirection d) const;
    std::uint64_t specialty_total(const std::string& specialty_key) const;
    std::uint64_t cross_total() const;  // all cross-community volume
};

/// Classifies every visit. Visits by unassigned patients or to providers
/// outside the major partition are excluded and tallied. With
/// spend_weighted, counts accumulate paid cents instead of visit counts.
TradeMatrix trade_counts(const std::vector<Visit>& visits, const AssignmentResult& assignment,
                         const CommunityIndex& index, const std::vector<ProviderInfo>& directory,
                         bool spend_weighted = false);

/// Revealed comparative advantage per (community, specialty). Zero
/// denominators yield disengaged (nullopt) entries which rankings skip.
struct RcaTable {
    TradeDirection direction = TradeDirection::imports;
    std::map<TradeMatrix::CommunitySpecialty, std::optional<double>> values;

    std::optional<double> at(std::uint32_t community, const std::string& specialty_key) const;
};

RcaTable rca(const TradeMatrix& matrix, TradeDirection direction);

struct FlowEdge {
    std::uint32_t from = 0;  // exporting community
    std::uint32_t to = 0;    // importing community
    std::string specialty_key;
    std::uint64_t count = 0;
    double share = 0.0;  // of the specialty's total cross-community volume
};

struct FlowReport {
    std::vector<std::string> top_specialties;  // by total traded volume, descending
    std::vector<FlowEdge> edges;               // shares below min_share suppressed
};

FlowReport trade_flow_report(const TradeMatrix& matrix, int top_k = 4, double min_share = 0.05);

struct InternalizationOpportunity {
    std::uint32_t community = 0;
    std::string specialty_key;
    std::uint64_t import_count = 0;
    std::uint64_t export_count = 0;
    double imbalance = 0.0;  // |import - export| / max(import, export)
};

struct SpecialtyGap {
    std::uint32_t community = 0;
    std::string specialty_key;
    double import_rca = 0.0;
    std::uint64_t import_count = 0;
};

struct Findings {
    std::vector<InternalizationOpportunity> internalization;
    std::vector<SpecialtyGap> gaps;
};

/// Surfaces (a) balanced two-way trade a community could internalize and
/// (b) per community, the high-import-RCA specialties ranked by volume.
Findings self_sufficiency_gaps(const TradeMatrix& matrix, const RcaTable& import_rca,
                               double balance_tolerance = 0.25, int gap_top_k = 5);

std::string write_rca_csv(const RcaTable& imports, const RcaTable& exports);
std::string write_flow_edges_csv(const FlowReport& report);

}  // namespace netleak

#include "netleak/trade.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "netleak/csv.hpp"

namespace netleak {

std::string to_string(TradeDirection d) {
    return d == TradeDirection::imports ? "import" : "export";
}

std::vector<std::string> TradeMatrix::specialties(TradeDirection d) const {
    std::set<std::string> keys;
    for (const auto& [key, _] : counts(d)) keys.insert(key.second);
    return {keys.begin(), keys.end()};
}

std::uint64_t TradeMatrix::specialty_total(const std::string& specialty_key) const {
    std::uint64_t total = 0;
    for (const auto& [key, count] : import_counts)
        if (key.second == specialty_key) total += count;
    return total;
}

std::uint64_t TradeMatrix::cross_total() const {
    std::uint64_t total = 0;
    for (const auto& [_, count] : import_counts) total += count;
    return total;
}

TradeMatrix trade_counts(const std::vector<Visit>& visits, const AssignmentResult& assignment,
                         const CommunityIndex& index, const std::vector<ProviderInfo>& directory,
                         bool spend_weighted) {
    std::unordered_map<std::string, std::uint32_t> patient_community;
    for (const auto& pa : assignment.patients)
        if (pa.community) patient_community.emplace(pa.patient_id, *pa.community);

    TradeMatrix matrix;
    matrix.n_communities = index.n_major();
    matrix.spend_weighted = spend_weighted;
    for (const auto& v : visits) {
        auto pit = patient_community.find(v.patient_id);
        auto provider_community = index.community_of(v.npi);
        if (pit == patient_community.end() || !provider_community) {
            ++matrix.excluded_count;
            continue;
        }
        const std::uint32_t patient_c = pit->second;
        const std::uint32_t provider_c = *provider_community;
        if (patient_c == provider_c) {
            ++matrix.within_count;
            continue;
        }
        const ProviderInfo* provider = find_provider(directory, v.npi);
        const std::string& specialty = provider ? provider->specialty_key : v.specialty_key;
        const std::uint64_t amount =
            spend_weighted ? static_cast<std::uint64_t>(v.paid_cents) : 1u;
        matrix.import_counts[{patient_c, specialty}] += amount;
        matrix.export_counts[{provider_c, specialty}] += amount;
        matrix.pair_flows[{provider_c, patient_c, specialty}] += amount;
    }
    return matrix;
}

std::optional<double> RcaTable::at(std::uint32_t community, const std::string& specialty_key) const {
    auto it = values.find({community, specialty_key});
    if (it == values.end()) return std::nullopt;
    return it->second;
}

RcaTable rca(const TradeMatrix& matrix, TradeDirection direction) {
    const auto& counts = matrix.counts(direction);

    std::map<std::uint32_t, std::uint64_t> community_totals;
    std::map<std::string, std::uint64_t> specialty_totals;
    std::uint64_t grand_total = 0;
    for (const auto& [key, count] : counts) {
        community_totals[key.first] += count;
        specialty_totals[key.second] += count;
        grand_total += count;
    }

    RcaTable table;
    table.direction = direction;
    if (grand_total == 0) return table;

    std::set<std::uint32_t> communities;
    for (std::uint32_t c = 0; c < matrix.n_communities; ++c) communities.insert(c);
    for (const auto& [key, _] : counts) communities.insert(key.first);

    const auto specialties = matrix.specialties(direction);
    for (std::uint32_t c : communities) {
        for (const auto& specialty : specialties) {
            auto& slot = table.values[{c, specialty}];
            auto ct = community_totals.find(c);
            if (ct == community_totals.end() || ct->second == 0) {
                slot = std::nullopt;  // community with no trade in this direction
                continue;
            }
            std::uint64_t x = 0;
            if (auto it = counts.find({c, specialty}); it != counts.end()) x = it->second;
            const double community_share =
                static_cast<double>(x) / static_cast<double>(ct->second);
            const double global_share = static_cast<double>(specialty_totals.at(specialty)) /
                                        static_cast<double>(grand_total);
            slot = community_share / global_share;
        }
    }
    return table;
}

FlowReport trade_flow_report(const TradeMatrix& matrix, int top_k, double min_share) {
    if (top_k < 0) throw std::invalid_argument("top_k must be >= 0");

    std::map<std::string, std::uint64_t> volume;  // total cross-community volume per specialty
    for (const auto& [key, count] : matrix.import_counts) volume[key.second] += count;

    std::vector<std::pair<std::string, std::uint64_t>> ranked(volume.begin(), volume.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (ranked.size() > static_cast<std::size_t>(top_k)) ranked.resize(top_k);

    FlowReport report;
    for (const auto& [specialty, _] : ranked) report.top_specialties.push_back(specialty);

    for (const auto& [specialty, total] : ranked) {
        for (const auto& [flow, count] : matrix.pair_flows) {
            if (std::get<2>(flow) != specialty) continue;
            const double share = static_cast<double>(count) / static_cast<double>(total);
            if (share < min_share) continue;
            report.edges.push_back({std::get<0>(flow), std::get<1>(flow), specialty, count, share});
        }
    }
    return report;
}

Findings self_sufficiency_gaps(const TradeMatrix& matrix, const RcaTable& import_rca,
                               double balance_tolerance, int gap_top_k) {
    Findings findings;

    // (a) two-way trade balanced within tolerance: candidates to internalize
    for (const auto& [key, import_count] : matrix.import_counts) {
        auto eit = matrix.export_counts.find(key);
        if (eit == matrix.export_counts.end() || eit->second == 0 || import_count == 0) continue;
        const std::uint64_t export_count = eit->second;
        const std::uint64_t hi = std::max(import_count, export_count);
        const std::uint64_t lo = std::min(import_count, export_count);
        const double imbalance = static_cast<double>(hi - lo) / static_cast<double>(hi);
        if (imbalance <= balance_tolerance)
            findings.internalization.push_back({key.first, key.second, import_count, export_count,
                                                imbalance});
    }

    // (b) per community: specialties in great need (import RCA > 1),
    // ranked by import volume
    std::map<std::uint32_t, std::vector<SpecialtyGap>> by_community;
    for (const auto& [key, import_count] : matrix.import_counts) {
        if (import_count == 0) continue;
        auto value = import_rca.at(key.first, key.second);
        if (!value || *value <= 1.0) continue;
        by_community[key.first].push_back({key.first, key.second, *value, import_count});
    }
    for (auto& [_, gaps] : by_community) {
        std::sort(gaps.begin(), gaps.end(), [](const SpecialtyGap& a, const SpecialtyGap& b) {
            if (a.import_count != b.import_count) return a.import_count > b.import_count;
            if (a.import_rca != b.import_rca) return a.import_rca > b.import_rca;
            return a.specialty_key < b.specialty_key;
        });
        if (gaps.size() > static_cast<std::size_t>(gap_top_k)) gaps.resize(gap_top_k);
        findings.gaps.insert(findings.gaps.end(), gaps.begin(), gaps.end());
    }
    return findings;
}

std::string write_rca_csv(const RcaTable& imports, const RcaTable& exports) {
    std::string out = "community,specialty,direction,rca\n";
    auto emit = [&out](const RcaTable& table) {
        for (const auto& [key, value] : table.values) {
            std::vector<std::string> row{std::to_string(key.first), key.second,
                                         to_string(table.direction),
                                         value ? format_double(*value, 6) : std::string{}};
            out += csv::join_row(row);
        }
    };
    emit(imports);
    emit(exports);
    return out;
}

std::string write_flow_edges_csv(const FlowReport& report) {
    std::string out = "from,to,specialty,count,share\n";
    for (const auto& e : report.edges) {
        std::vector<std::string> row{std::to_string(e.from), std::to_string(e.to), e.specialty_key,
                                     std::to_string(e.count), format_double(e.share, 6)};
        out += csv::join_row(row);
    }
    return out;
}

}  // namespace netleak

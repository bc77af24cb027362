#include "netleak/assignment.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace netleak {

std::string to_string(Scheme s) {
    return s == Scheme::plurality ? "plurality" : "pcp";
}

std::optional<Scheme> parse_scheme(std::string_view raw) {
    std::string v = to_lower_ascii(trim_copy(raw));
    if (v == "plurality") return Scheme::plurality;
    if (v == "pcp" || v == "imputed_pcp") return Scheme::imputed_pcp;
    return std::nullopt;
}

CommunityIndex::CommunityIndex(const ProviderGraph& graph, const PrunedPartition& pruned)
    : n_major_(pruned.n_major) {
    if (pruned.major_of.size() != graph.node_count())
        throw std::invalid_argument("partition does not cover the graph");
    for (std::size_t i = 0; i < graph.node_count(); ++i)
        if (pruned.major_of[i] != kNoCommunity)
            major_of_npi_.emplace(graph.nodes()[i].npi, pruned.major_of[i]);
}

CommunityIndex::CommunityIndex(std::unordered_map<std::string, std::uint32_t> major_of_npi,
                               std::uint32_t n_major)
    : major_of_npi_(std::move(major_of_npi)), n_major_(n_major) {}

std::optional<std::uint32_t> CommunityIndex::community_of(std::string_view npi) const {
    auto it = major_of_npi_.find(std::string(npi));
    if (it == major_of_npi_.end()) return std::nullopt;
    return it->second;
}

const PatientAssignment* AssignmentResult::find(std::string_view patient_id) const {
    auto it = std::lower_bound(
        patients.begin(), patients.end(), patient_id,
        [](const PatientAssignment& p, std::string_view key) { return p.patient_id < key; });
    if (it == patients.end() || it->patient_id != patient_id) return nullptr;
    return &*it;
}

namespace {

struct PatientTally {
    std::map<std::uint32_t, std::uint64_t> visits_by_community;
    std::map<std::uint32_t, std::int64_t> spend_by_community;
    std::uint64_t total_visits = 0;
    std::int64_t total_spend = 0;
};

std::map<std::string, PatientTally> tally_by_patient(const std::vector<Visit>& visits,
                                                     const CommunityIndex& index) {
    std::map<std::string, PatientTally> tallies;
    for (const auto& v : visits) {
        PatientTally& t = tallies[v.patient_id];
        ++t.total_visits;
        t.total_spend += v.paid_cents;
        if (auto community = index.community_of(v.npi)) {
            ++t.visits_by_community[*community];
            t.spend_by_community[*community] += v.paid_cents;
        }
    }
    return tallies;
}

PatientAssignment finalize(const std::string& patient_id, const PatientTally& tally,
                           std::optional<std::uint32_t> community) {
    PatientAssignment out;
    out.patient_id = patient_id;
    out.community = community;
    out.total_visits = tally.total_visits;
    out.total_spend_cents = tally.total_spend;
    if (community) {
        auto vit = tally.visits_by_community.find(*community);
        if (vit != tally.visits_by_community.end()) out.in_visits = vit->second;
        auto sit = tally.spend_by_community.find(*community);
        if (sit != tally.spend_by_community.end()) out.in_spend_cents = sit->second;
    }
    return out;
}

}  // namespace

AssignmentResult assign_by_plurality(const std::vector<Visit>& visits, const CommunityIndex& index) {
    AssignmentResult result;
    result.scheme = Scheme::plurality;
    for (const auto& [patient_id, tally] : tally_by_patient(visits, index)) {
        std::optional<std::uint32_t> best;
        std::uint64_t best_visits = 0;
        std::int64_t best_spend = 0;
        for (const auto& [community, count] : tally.visits_by_community) {
            const std::int64_t spend = tally.spend_by_community.at(community);
            // plurality of visits; ties to higher in-community spend, then
            // the smaller community id (map order supplies the id order)
            if (!best || count > best_visits || (count == best_visits && spend > best_spend)) {
                best = community;
                best_visits = count;
                best_spend = spend;
            }
        }
        result.patients.push_back(finalize(patient_id, tally, best));
    }
    return result;
}

std::vector<ImputedPcp> impute_pcp(const std::vector<Visit>& visits,
                                   const std::vector<ProviderInfo>& directory,
                                   const PcpSpecialtySet& pcp_set, Date window_end,
                                   int window_months) {
    if (window_months < 1) throw std::invalid_argument("window_months must be >= 1");
    const Date cutoff = window_end.minus_months(window_months);

    struct PcpTally {
        std::uint64_t count = 0;
        Date last_seen;
    };
    std::map<std::string, std::map<std::string, PcpTally>> by_patient;  // patient -> npi -> tally
    for (const auto& v : visits) {
        if (!(cutoff < v.service_date) || window_end < v.service_date) continue;
        const ProviderInfo* provider = find_provider(directory, v.npi);
        const std::string& key = provider ? provider->specialty_key : v.specialty_key;
        if (!pcp_set.contains(key)) continue;
        PcpTally& t = by_patient[v.patient_id][v.npi];
        ++t.count;
        if (t.count == 1 || t.last_seen < v.service_date) t.last_seen = v.service_date;
    }

    std::vector<ImputedPcp> result;
    result.reserve(by_patient.size());
    for (const auto& [patient_id, tallies] : by_patient) {
        const std::string* best_npi = nullptr;
        std::uint64_t best_count = 0;
        Date best_seen;
        // most visits; ties to the most recent visit, then lexicographic
        // npi (map order yields the smallest npi first)
        for (const auto& [npi, tally] : tallies) {
            if (best_npi == nullptr || tally.count > best_count ||
                (tally.count == best_count && best_seen < tally.last_seen)) {
                best_npi = &npi;
                best_count = tally.count;
                best_seen = tally.last_seen;
            }
        }
        result.push_back({patient_id, *best_npi});
    }
    return result;
}

AssignmentResult assign_by_pcp(const std::vector<Visit>& visits, const std::vector<ImputedPcp>& imputed,
                               const CommunityIndex& index) {
    std::unordered_map<std::string, std::string> pcp_of;
    pcp_of.reserve(imputed.size());
    for (const auto& entry : imputed) pcp_of.emplace(entry.patient_id, entry.npi);

    AssignmentResult result;
    result.scheme = Scheme::imputed_pcp;
    for (const auto& [patient_id, tally] : tally_by_patient(visits, index)) {
        std::optional<std::uint32_t> community;
        auto it = pcp_of.find(patient_id);
        if (it != pcp_of.end()) community = index.community_of(it->second);
        result.patients.push_back(finalize(patient_id, tally, community));
    }
    return result;
}

std::vector<CommunityUtilization> in_community_fractions(const AssignmentResult& assignment,
                                                         std::uint32_t n_major) {
    struct Pool {
        std::uint64_t n_patients = 0;
        std::uint64_t in_visits = 0, total_visits = 0;
        std::int64_t in_spend = 0, total_spend = 0;
        double sum_visit_fraction = 0.0, sum_spend_fraction = 0.0;
    };
    std::vector<Pool> pools(n_major);
    for (const auto& p : assignment.patients) {
        if (!p.community || p.total_visits == 0) continue;  // zero-visit patients excluded
        Pool& pool = pools.at(*p.community);
        ++pool.n_patients;
        pool.in_visits += p.in_visits;
        pool.total_visits += p.total_visits;
        pool.in_spend += p.in_spend_cents;
        pool.total_spend += p.total_spend_cents;
        pool.sum_visit_fraction += p.visit_fraction();
        pool.sum_spend_fraction += p.spend_fraction();
    }

    std::vector<CommunityUtilization> result;
    result.reserve(n_major);
    for (std::uint32_t c = 0; c < n_major; ++c) {
        const Pool& pool = pools[c];
        CommunityUtilization u;
        u.community = c;
        u.n_patients = pool.n_patients;
        if (pool.total_visits > 0)
            u.pct_within_utilization =
                static_cast<double>(pool.in_visits) / static_cast<double>(pool.total_visits);
        if (pool.total_spend > 0)
            u.pct_within_spend =
                static_cast<double>(pool.in_spend) / static_cast<double>(pool.total_spend);
        if (pool.n_patients > 0) {
            u.mean_visit_fraction = pool.sum_visit_fraction / static_cast<double>(pool.n_patients);
            u.mean_spend_fraction = pool.sum_spend_fraction / static_cast<double>(pool.n_patients);
        }
        result.push_back(u);
    }
    return result;
}

}  // namespace netleak

#include "netleak/profile.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>
#include <unordered_map>

#include "netleak/csv.hpp"

namespace netleak {

const std::string& CommunityProfile::anchor_county() const {
    static const std::string empty;
    return county_distribution.empty() ? empty : county_distribution.front().first;
}

double pcp_specialist_ratio(const std::vector<const ProviderNode*>& members) {
    if (members.empty()) throw std::invalid_argument("empty community");
    std::size_t pcp = 0;
    for (const ProviderNode* node : members)
        if (node->is_pcp) ++pcp;
    return static_cast<double>(pcp) / static_cast<double>(members.size());
}

double herfindahl(const std::vector<std::string>& member_org_ids) {
    if (member_org_ids.empty()) throw std::invalid_argument("empty community");
    std::map<std::string, std::size_t> counts;
    std::size_t singletons = 0;  // providers without affiliation
    for (const auto& org : member_org_ids) {
        if (org.empty())
            ++singletons;
        else
            ++counts[org];
    }
    const double total = static_cast<double>(member_org_ids.size());
    double h = 0.0;
    for (const auto& [_, n] : counts) {
        const double share = static_cast<double>(n) / total;
        h += share * share;
    }
    h += static_cast<double>(singletons) * (1.0 / total) * (1.0 / total);
    return h;
}

double pmpm(std::int64_t total_paid_cents, std::int64_t total_member_months) {
    if (total_member_months <= 0) throw std::invalid_argument("zero member-months");
    return static_cast<double>(total_paid_cents) / 100.0 / static_cast<double>(total_member_months);
}

double risk_adjusted_pmpm(double pmpm_value, double mean_risk) {
    if (!(mean_risk > 0.0)) throw std::invalid_argument("non-positive mean risk");
    return pmpm_value / mean_risk;
}

std::vector<std::pair<std::string, double>> county_distribution(
    const std::vector<const PatientRecord*>& patients) {
    std::map<std::string, std::size_t> counts;
    for (const PatientRecord* p : patients) ++counts[p->county];
    std::vector<std::pair<std::string, double>> shares;
    shares.reserve(counts.size());
    const double total = static_cast<double>(patients.size());
    for (const auto& [county, n] : counts)
        shares.emplace_back(county, static_cast<double>(n) / total);
    std::sort(shares.begin(), shares.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    return shares;
}

std::vector<CommunityProfile> build_profiles(const ProviderGraph& graph,
                                             const PrunedPartition& pruned,
                                             const AssignmentResult& assignment,
                                             const std::vector<Visit>& visits,
                                             const std::vector<PatientRecord>& patients) {
    const std::uint32_t n_major = pruned.n_major;

    std::vector<std::vector<const ProviderNode*>> members(n_major);
    for (std::size_t i = 0; i < graph.node_count(); ++i)
        if (pruned.major_of[i] != kNoCommunity)
            members[pruned.major_of[i]].push_back(&graph.nodes()[i]);

    std::unordered_map<std::string, const PatientRecord*> patient_by_id;
    patient_by_id.reserve(patients.size());
    for (const auto& p : patients) patient_by_id.emplace(p.patient_id, &p);

    // total spend over every visit of each assigned patient
    std::unordered_map<std::string, std::uint32_t> patient_community;
    for (const auto& pa : assignment.patients)
        if (pa.community) patient_community.emplace(pa.patient_id, *pa.community);

    std::vector<std::int64_t> spend_cents(n_major, 0);
    for (const auto& v : visits) {
        auto it = patient_community.find(v.patient_id);
        if (it != patient_community.end()) spend_cents[it->second] += v.paid_cents;
    }

    std::vector<std::vector<const PatientRecord*>> assigned(n_major);
    std::vector<std::int64_t> member_months(n_major, 0);
    std::vector<double> risk_sum(n_major, 0.0);
    for (const auto& pa : assignment.patients) {
        if (!pa.community) continue;
        auto it = patient_by_id.find(pa.patient_id);
        if (it == patient_by_id.end()) continue;
        assigned[*pa.community].push_back(it->second);
        member_months[*pa.community] += it->second->enrollment_months;
        risk_sum[*pa.community] += it->second->risk_score;
    }

    const auto utilization = in_community_fractions(assignment, n_major);

    std::vector<CommunityProfile> profiles;
    profiles.reserve(n_major);
    for (std::uint32_t c = 0; c < n_major; ++c) {
        CommunityProfile profile;
        profile.community = c;
        profile.n_providers = members[c].size();
        profile.n_patients = assigned[c].size();
        if (!members[c].empty()) {
            profile.pcp_specialist_ratio = pcp_specialist_ratio(members[c]);
            std::vector<std::string> orgs;
            orgs.reserve(members[c].size());
            for (const ProviderNode* node : members[c]) orgs.push_back(node->org_id);
            profile.herfindahl = herfindahl(orgs);
        }
        profile.pct_within_utilization = utilization[c].pct_within_utilization;
        profile.pct_within_spend = utilization[c].pct_within_spend;
        if (!assigned[c].empty()) {
            profile.mean_risk = risk_sum[c] / static_cast<double>(assigned[c].size());
            if (member_months[c] > 0) profile.pmpm = pmpm(spend_cents[c], member_months[c]);
            profile.risk_adjusted_pmpm = risk_adjusted_pmpm(profile.pmpm, profile.mean_risk);
            profile.county_distribution = county_distribution(assigned[c]);
        }
        profiles.push_back(std::move(profile));
    }
    return profiles;
}

std::string write_profiles_csv(const std::vector<CommunityProfile>& profiles) {
    std::string out =
        "community_id,n_providers,n_patients,pcp_specialist_ratio,pct_within_utilization,"
        "pct_within_spend,herfindahl,pmpm,mean_risk,risk_adjusted_pmpm,anchor_county\n";
    for (const auto& p : profiles) {
        std::vector<std::string> row{
            std::to_string(p.community),
            std::to_string(p.n_providers),
            std::to_string(p.n_patients),
            format_double(p.pcp_specialist_ratio, 6),
            format_double(p.pct_within_utilization, 6),
            format_double(p.pct_within_spend, 6),
            format_double(p.herfindahl, 6),
            format_double(p.pmpm, 2),
            format_double(p.mean_risk, 4),
            format_double(p.risk_adjusted_pmpm, 2),
            p.anchor_county()};
        out += csv::join_row(row);
    }
    return out;
}

}  // namespace netleak

#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "netleak/assignment.hpp"
#include "netleak/claims.hpp"
#include "netleak/community.hpp"
#include "netleak/graph.hpp"

namespace netleak {

struct CommunityProfile {
    std::uint32_t community = 0;
    std::size_t n_providers = 0;
    std::size_t n_patients = 0;
    double pcp_specialist_ratio = 0.0;  // PCP providers / all providers
    double pct_within_utilization = 0.0;
    double pct_within_spend = 0.0;
    double herfindahl = 0.0;
    double pmpm = 0.0;  // dollars per member-month
    double mean_risk = 0.0;
    double risk_adjusted_pmpm = 0.0;
    std::vector<std::pair<std::string, double>> county_distribution;  // share desc, county asc

    const std::string& anchor_county() const;
};

/// Share of a community's providers that are PCPs. Throws on an empty
/// member list.
double pcp_specialist_ratio(const std::vector<const ProviderNode*>& members);

/// Herfindahl index over organizational market share (provider counts).
/// Providers without an org_id count as singleton one-provider
/// organizations. Throws on an empty member list.
double herfindahl(const std::vector<std::string>& member_org_ids);

/// Total spend of the assigned patients' visits divided by their total
/// member-months, in dollars. Throws when member-months are zero.
double pmpm(std::int64_t total_paid_cents, std::int64_t total_member_months);

/// PMPM divided by the mean risk score. Throws on non-positive risk.
double risk_adjusted_pmpm(double pmpm_value, double mean_risk);

/// County -> share over the given patients; shares sum to 1. Sorted by
/// descending share, county ascending on ties.
std::vector<std::pair<std::string, double>> county_distribution(
    const std::vector<const PatientRecord*>& patients);

/// Assembles one profile per major community.
std::vector<CommunityProfile> build_profiles(const ProviderGraph& graph,
                                             const PrunedPartition& pruned,
                                             const AssignmentResult& assignment,
                                             const std::vector<Visit>& visits,
                                             const std::vector<PatientRecord>& patients);

std::string write_profiles_csv(const std::vector<CommunityProfile>& profiles);

}  // namespace netleak

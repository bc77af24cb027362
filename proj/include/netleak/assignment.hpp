#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "netleak/claims.hpp"
#include "netleak/community.hpp"
#include "netleak/graph.hpp"

namespace netleak {

enum class Scheme { plurality, imputed_pcp };

std::string to_string(Scheme s);
std::optional<Scheme> parse_scheme(std::string_view raw);

/// npi -> major community lookup derived from a graph + pruned partition.
/// Providers in excluded communities (or outside the graph) resolve to
/// nothing and count as "outside" every major community.
class CommunityIndex {
  public:
    CommunityIndex() = default;
    CommunityIndex(const ProviderGraph& graph, const PrunedPartition& pruned);
    CommunityIndex(std::unordered_map<std::string, std::uint32_t> major_of_npi,
                   std::uint32_t n_major);

    std::optional<std::uint32_t> community_of(std::string_view npi) const;
    std::uint32_t n_major() const { return n_major_; }

  private:
    std::unordered_map<std::string, std::uint32_t> major_of_npi_;
    std::uint32_t n_major_ = 0;
};

/// Per-patient assignment with in-community tallies. Denominators count
/// every visit the patient made, including visits to excluded-community or
/// unpartitioned providers; numerators count only assigned-community visits.
struct PatientAssignment {
    std::string patient_id;
    std::optional<std::uint32_t> community;
    std::uint64_t in_visits = 0;
    std::uint64_t total_visits = 0;
    std::int64_t in_spend_cents = 0;
    std::int64_t total_spend_cents = 0;

    double visit_fraction() const {
        return total_visits == 0 ? 0.0 : static_cast<double>(in_visits) / static_cast<double>(total_visits);
    }
    double spend_fraction() const {
        return total_spend_cents == 0
                   ? 0.0
                   : static_cast<double>(in_spend_cents) / static_cast<double>(total_spend_cents);
    }
};

struct AssignmentResult {
    Scheme scheme = Scheme::plurality;
    std::vector<PatientAssignment> patients;  // sorted by patient_id

    const PatientAssignment* find(std::string_view patient_id) const;
};

/// Plurality scheme: each patient goes to the major community receiving
/// the most of their visits; ties break to higher in-community spend, then
/// the smaller community id. Patients with no major-community visits stay
/// unassigned.
AssignmentResult assign_by_plurality(const std::vector<Visit>& visits, const CommunityIndex& index);

struct ImputedPcp {
    std::string patient_id;
    std::string npi;
};

/// Plurality of primary-care visits over the trailing window: the PCP seen
/// most often; ties break to the most recently seen, then lexicographic npi.
std::vector<ImputedPcp> impute_pcp(const std::vector<Visit>& visits,
                                   const std::vector<ProviderInfo>& directory,
                                   const PcpSpecialtySet& pcp_set, Date window_end,
                                   int window_months = 12);

/// Imputed-PCP scheme: patient community = imputed PCP's major community;
/// patients without an imputed PCP (or whose PCP is outside the major
/// partition) stay unassigned.
AssignmentResult assign_by_pcp(const std::vector<Visit>& visits, const std::vector<ImputedPcp>& imputed,
                               const CommunityIndex& index);

/// Community-level within-community utilization/spend. Pooled ratios are
/// canonical; per-patient means are also reported.
struct CommunityUtilization {
    std::uint32_t community = 0;
    std::uint64_t n_patients = 0;
    double pct_within_utilization = 0.0;  // pooled visits
    double pct_within_spend = 0.0;        // pooled spend
    double mean_visit_fraction = 0.0;     // unweighted mean of patient fractions
    double mean_spend_fraction = 0.0;
};

std::vector<CommunityUtilization> in_community_fractions(const AssignmentResult& assignment,
                                                         std::uint32_t n_major);

}  // namespace netleak

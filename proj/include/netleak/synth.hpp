#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "netleak/common.hpp"

namespace netleak {

/// Planted-community claims generator. The pseudo-random source is
/// mt19937_64 with documented samplers, so a (config, seed) pair always
/// produces byte-identical files.
struct SynthConfig {
    std::uint64_t seed = 1;
    int n_communities = 6;
    std::pair<int, int> providers_per_community{50, 60};
    std::pair<int, int> patients_per_community{60, 80};
    std::vector<double> pcp_share;  // per community; default fills with 0.4
    double p_in = 0.85;
    /// Row-stochastic visit routing matrix; row c = home community c.
    /// Empty -> diagonal p_in, off-diagonal (1 - p_in) / (k - 1).
    std::vector<std::vector<double>> cross;
    std::pair<int, int> visits_per_patient{8, 14};

    struct SpecialtySpec {
        std::string name;
        double weight = 1.0;    // draw weight within its pool
        double cost_log_mu = 4.5;
        double cost_log_sigma = 0.6;
        bool pcp = false;
    };
    std::vector<SpecialtySpec> specialties;  // default list when empty

    int orgs_per_community = 3;
    double org_size_skew = 1.0;   // weight of org r is 1 / (r + 1)^skew
    double no_org_prob = 0.05;    // provider has no affiliation
    std::vector<std::string> counties;  // one per community; default names
    double home_county_share = 0.9;

    struct RiskSpec {
        double log_mu = 1.6;
        double log_sigma = 0.35;
    };
    std::vector<RiskSpec> risk;  // per community; default fills

    Date window_start{2014, 1, 1};
    Date window_end{2014, 12, 31};
    int max_lines_per_visit = 3;
    double diabetic_share = 1.0;
    std::vector<std::string> comorbidity_pool{"htn", "cad", "ckd", "copd"};
    double comorbidity_prob = 0.15;

    void validate() const;  // throws std::invalid_argument on infeasible configs

    static SynthConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

struct SynthOutput {
    std::string claims_csv;
    std::string patients_csv;
    std::string provider_truth_csv;  // npi,true_community
    std::string patient_truth_csv;   // patient_id,true_community
};

SynthOutput generate(const SynthConfig& config);

/// Writes the four CSVs into a directory (claims.csv, patients.csv,
/// truth_providers.csv, truth_patients.csv) and returns their paths.
std::vector<std::string> write_synth_output(const SynthOutput& output, const std::string& dir);

}  // namespace netleak

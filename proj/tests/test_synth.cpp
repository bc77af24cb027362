#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "netleak/claims.hpp"
#include "netleak/synth.hpp"

using namespace netleak;

namespace {

SynthConfig small_config(std::uint64_t seed) {
    SynthConfig config;
    config.seed = seed;
    config.n_communities = 3;
    config.providers_per_community = {10, 14};
    config.patients_per_community = {15, 20};
    config.visits_per_patient = {4, 8};
    return config;
}

std::map<std::string, int> truth_map(const std::string& csv) {
    std::map<std::string, int> truth;
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        auto comma = line.find(',');
        truth[line.substr(0, comma)] = std::stoi(line.substr(comma + 1));
    }
    return truth;
}

}  // namespace

TEST_CASE("same seed produces byte-identical outputs") {
    auto a = generate(small_config(99));
    auto b = generate(small_config(99));
    CHECK(a.claims_csv == b.claims_csv);
    CHECK(a.patients_csv == b.patients_csv);
    CHECK(a.provider_truth_csv == b.provider_truth_csv);
    CHECK(a.patient_truth_csv == b.patient_truth_csv);

    auto c = generate(small_config(100));
    CHECK(a.claims_csv != c.claims_csv);
}

TEST_CASE("generated files honor the claims and patients schemas (100% accepted)") {
    auto output = generate(small_config(7));
    std::istringstream claims_in(output.claims_csv);
    auto claims = parse_claims(claims_in, ClaimsParseOptions{});
    CHECK(claims.rejects.empty());
    CHECK_FALSE(claims.claims.empty());

    std::istringstream patients_in(output.patients_csv);
    auto patients = parse_patients(patients_in, PatientsParseOptions{});
    CHECK(patients.rejects.empty());
    CHECK_FALSE(patients.patients.empty());

    // referential integrity: every claim's patient exists
    std::set<std::string> ids;
    for (const auto& p : patients.patients) ids.insert(p.patient_id);
    for (const auto& c : claims.claims) CHECK(ids.count(c.patient_id) == 1);

    // every provider in the truth file, every patient labeled
    auto provider_truth = truth_map(output.provider_truth_csv);
    for (const auto& c : claims.claims) CHECK(provider_truth.count(c.npi) == 1);
    auto patient_truth = truth_map(output.patient_truth_csv);
    for (const auto& p : patients.patients) CHECK(patient_truth.count(p.patient_id) == 1);
}

TEST_CASE("visit counts per patient respect the configured range") {
    auto config = small_config(21);
    auto output = generate(config);
    std::istringstream claims_in(output.claims_csv);
    auto claims = parse_claims(claims_in, ClaimsParseOptions{});
    auto visits = derive_visits(claims.claims);

    std::map<std::string, std::set<std::string>> visit_keys;  // patient -> (npi|date)
    for (const auto& v : visits)
        visit_keys[v.patient_id].insert(v.npi + "|" + v.service_date.to_string());
    for (const auto& [_, keys] : visit_keys) {
        // collisions can merge same-day same-provider visits, so only the
        // upper bound is exact
        CHECK(keys.size() <= static_cast<std::size_t>(config.visits_per_patient.second));
        CHECK(keys.size() >= 1);
    }
}

TEST_CASE("p_in = 1 keeps every visit inside the home community") {
    auto config = small_config(33);
    config.p_in = 1.0;
    auto output = generate(config);

    auto provider_truth = truth_map(output.provider_truth_csv);
    auto patient_truth = truth_map(output.patient_truth_csv);
    std::istringstream claims_in(output.claims_csv);
    auto claims = parse_claims(claims_in, ClaimsParseOptions{});
    REQUIRE_FALSE(claims.claims.empty());
    for (const auto& c : claims.claims)
        CHECK(provider_truth.at(c.npi) == patient_truth.at(c.patient_id));
}

TEST_CASE("in-community visit share approaches p_in at scale") {
    SynthConfig config;
    config.seed = 55;
    config.n_communities = 6;
    config.providers_per_community = {40, 50};
    config.patients_per_community = {150, 180};
    config.visits_per_patient = {10, 14};
    config.p_in = 0.85;
    auto output = generate(config);

    auto provider_truth = truth_map(output.provider_truth_csv);
    auto patient_truth = truth_map(output.patient_truth_csv);
    std::istringstream claims_in(output.claims_csv);
    auto claims = parse_claims(claims_in, ClaimsParseOptions{});
    auto visits = derive_visits(claims.claims);
    REQUIRE(visits.size() >= 10000);

    std::size_t inside = 0;
    for (const auto& v : visits)
        if (provider_truth.at(v.npi) == patient_truth.at(v.patient_id)) ++inside;
    const double share = static_cast<double>(inside) / static_cast<double>(visits.size());
    CHECK(share > 0.83);
    CHECK(share < 0.87);
}

TEST_CASE("infeasible configurations are rejected") {
    auto config = small_config(1);
    config.n_communities = 0;
    CHECK_THROWS_AS(generate(config), std::invalid_argument);

    config = small_config(1);
    config.providers_per_community = {0, 5};
    CHECK_THROWS_AS(generate(config), std::invalid_argument);

    config = small_config(1);
    config.providers_per_community = {8, 4};
    CHECK_THROWS_AS(generate(config), std::invalid_argument);

    config = small_config(1);
    config.p_in = 0.2;  // with k=3, cross = 0.4 each > p_in
    CHECK_THROWS_AS(generate(config), std::invalid_argument);

    config = small_config(1);
    config.cross = {{0.5, 0.5}, {0.5, 0.5}};  // wrong size and diag not dominant
    CHECK_THROWS_AS(generate(config), std::invalid_argument);
}

TEST_CASE("json round trip preserves the configuration") {
    auto config = small_config(77);
    config.counties = {"Albany", "Rensselaer", "Saratoga"};
    config.pcp_share = {0.3, 0.5, 0.7};
    config.p_in = 0.9;
    auto j = config.to_json();
    auto back = SynthConfig::from_json(j);
    CHECK(back.seed == config.seed);
    CHECK(back.n_communities == config.n_communities);
    CHECK(back.counties == config.counties);
    CHECK(back.pcp_share == config.pcp_share);
    CHECK(back.p_in == config.p_in);
    CHECK(back.providers_per_community == config.providers_per_community);
    CHECK(generate(back).claims_csv == generate(config).claims_csv);
}

TEST_CASE("scalar ranges in json broadcast to fixed counts") {
    nlohmann::json j{{"seed", 5}, {"n_communities", 2}, {"providers_per_community", 8},
                     {"patients_per_community", 10}, {"visits_per_patient", 3}};
    auto config = SynthConfig::from_json(j);
    CHECK(config.providers_per_community == std::pair<int, int>{8, 8});
    auto output = generate(config);
    auto provider_truth = truth_map(output.provider_truth_csv);
    CHECK(provider_truth.size() == 16);
}

#include "netleak/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "netleak/csv.hpp"

namespace netleak {

namespace {

/// Deterministic samplers over mt19937_64. The standard distributions are
/// implementation-defined, so everything is derived from raw draws here.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next() { return gen_(); }

    double uniform01() {  // [0, 1) with 53 bits
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

    /// Uniform integer in [lo, hi], rejection-sampled to avoid modulo bias.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        if (span == 0) return lo + static_cast<std::int64_t>(next());
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
        std::uint64_t draw;
        do {
            draw = next();
        } while (draw >= limit);
        return lo + static_cast<std::int64_t>(draw % span);
    }

    double normal() {  // Box-Muller, cos branch only
        double u1 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    double lognormal(double mu, double sigma) { return std::exp(mu + sigma * normal()); }

    /// Index into cumulative weights (strictly increasing, last = total).
    std::size_t weighted(const std::vector<double>& cumulative) {
        const double x = uniform01() * cumulative.back();
        return static_cast<std::size_t>(
            std::upper_bound(cumulative.begin(), cumulative.end(), x) - cumulative.begin());
    }

  private:
    std::mt19937_64 gen_;
};

std::vector<double> cumulative(const std::vector<double>& weights) {
    std::vector<double> cum(weights.size());
    double total = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        total += weights[i];
        cum[i] = total;
    }
    return cum;
}

std::vector<SynthConfig::SpecialtySpec> default_specialties() {
    return {
        {"Family Medicine", 3.0, 4.2, 0.5, true},
        {"Internal Medicine", 2.0, 4.3, 0.5, true},
        {"Pediatrics", 1.0, 4.1, 0.5, true},
        {"Cardiovascular Disease", 2.0, 5.3, 0.7, false},
        {"Endocrinology", 2.0, 4.9, 0.6, false},
        {"Ophthalmology", 1.5, 4.7, 0.6, false},
        {"Dermatology", 1.0, 4.6, 0.6, false},
        {"Gastroenterology", 1.0, 5.1, 0.7, false},
        {"Orthopedic Surgery", 1.0, 5.5, 0.8, false},
        {"Podiatry", 1.0, 4.4, 0.5, false},
    };
}

std::string zero_pad(std::uint64_t value, int width) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%0*llu", width, static_cast<unsigned long long>(value));
    return buf;
}

}  // namespace

void SynthConfig::validate() const {
    const int k = n_communities;
    if (k < 1) throw std::invalid_argument("n_communities must be >= 1");
    auto check_range = [](std::pair<int, int> r, const char* what) {
        if (r.first < 1 || r.second < r.first)
            throw std::invalid_argument(std::string(what) + ": invalid range");
    };
    check_range(providers_per_community, "providers_per_community");
    check_range(patients_per_community, "patients_per_community");
    check_range(visits_per_patient, "visits_per_patient");
    if (!(p_in > 0.0 && p_in <= 1.0)) throw std::invalid_argument("p_in must be in (0, 1]");
    if (!pcp_share.empty() && static_cast<int>(pcp_share.size()) != k)
        throw std::invalid_argument("pcp_share must have one entry per community");
    for (double share : pcp_share)
        if (share < 0.0 || share > 1.0) throw std::invalid_argument("pcp_share outside [0, 1]");
    if (!counties.empty() && static_cast<int>(counties.size()) != k)
        throw std::invalid_argument("counties must have one entry per community");
    if (!risk.empty() && static_cast<int>(risk.size()) != k)
        throw std::invalid_argument("risk must have one entry per community");
    if (!cross.empty()) {
        if (static_cast<int>(cross.size()) != k)
            throw std::invalid_argument("cross matrix must be k x k");
        for (int c = 0; c < k; ++c) {
            if (static_cast<int>(cross[c].size()) != k)
                throw std::invalid_argument("cross matrix must be k x k");
            double row = 0.0;
            double max_off = 0.0;
            for (int d = 0; d < k; ++d) {
                if (cross[c][d] < 0.0 || cross[c][d] > 1.0)
                    throw std::invalid_argument("cross probabilities outside [0, 1]");
                row += cross[c][d];
                if (d != c) max_off = std::max(max_off, cross[c][d]);
            }
            if (std::abs(row - 1.0) > 1e-9)
                throw std::invalid_argument("cross matrix rows must sum to 1");
            // planted structure must be recoverable
            if (k > 1 && cross[c][c] <= max_off)
                throw std::invalid_argument("in-community probability must exceed cross probability");
        }
    } else if (k > 1 && p_in <= (1.0 - p_in) / (k - 1)) {
        throw std::invalid_argument("in-community probability must exceed cross probability");
    }
    if (orgs_per_community < 1) throw std::invalid_argument("orgs_per_community must be >= 1");
    if (max_lines_per_visit < 1) throw std::invalid_argument("max_lines_per_visit must be >= 1");
    if (window_end < window_start) throw std::invalid_argument("window_end precedes window_start");
    if (!specialties.empty()) {
        bool has_pcp = false, has_specialist = false;
        for (const auto& s : specialties) {
            if (s.pcp) has_pcp = true;
            else has_specialist = true;
        }
        const bool needs_pcp =
            pcp_share.empty() || std::any_of(pcp_share.begin(), pcp_share.end(),
                                             [](double x) { return x > 0.0; });
        if (needs_pcp && !has_pcp) throw std::invalid_argument("no PCP specialty configured");
        if (!has_specialist &&
            (pcp_share.empty() || std::any_of(pcp_share.begin(), pcp_share.end(),
                                              [](double x) { return x < 1.0; })))
            throw std::invalid_argument("no specialist specialty configured");
    }
}

SynthOutput generate(const SynthConfig& config) {
    config.validate();
    const int k = config.n_communities;

    const auto specialties = config.specialties.empty() ? default_specialties() : config.specialties;
    std::vector<double> pcp_weights, specialist_weights;
    std::vector<std::size_t> pcp_pool, specialist_pool;
    for (std::size_t i = 0; i < specialties.size(); ++i) {
        if (specialties[i].pcp) {
            pcp_pool.push_back(i);
            pcp_weights.push_back(specialties[i].weight);
        } else {
            specialist_pool.push_back(i);
            specialist_weights.push_back(specialties[i].weight);
        }
    }
    const auto pcp_cum = cumulative(pcp_weights);
    const auto specialist_cum = cumulative(specialist_weights);

    std::vector<std::string> counties = config.counties;
    if (counties.empty())
        for (int c = 0; c < k; ++c) counties.push_back("County" + zero_pad(c + 1, 2));

    std::vector<double> pcp_share = config.pcp_share;
    if (pcp_share.empty()) pcp_share.assign(k, 0.4);
    std::vector<SynthConfig::RiskSpec> risk = config.risk;
    if (risk.empty()) risk.assign(k, SynthConfig::RiskSpec{});

    std::vector<std::vector<double>> cross = config.cross;
    if (cross.empty()) {
        cross.assign(k, std::vector<double>(k, k > 1 ? (1.0 - config.p_in) / (k - 1) : 0.0));
        for (int c = 0; c < k; ++c) cross[c][c] = k > 1 ? config.p_in : 1.0;
    }
    std::vector<std::vector<double>> cross_cum(k);
    for (int c = 0; c < k; ++c) cross_cum[c] = cumulative(cross[c]);

    Rng rng(config.seed);

    // providers
    struct Provider {
        std::string npi;
        int community;
        std::size_t specialty;
        std::string org_id;
    };
    std::vector<Provider> providers;
    std::vector<std::vector<std::uint32_t>> providers_of_community(k);
    for (int c = 0; c < k; ++c) {
        const int count = static_cast<int>(
            rng.uniform_int(config.providers_per_community.first, config.providers_per_community.second));
        std::vector<double> org_weights(config.orgs_per_community);
        for (int r = 0; r < config.orgs_per_community; ++r)
            org_weights[r] = 1.0 / std::pow(r + 1.0, config.org_size_skew);
        const auto org_cum = cumulative(org_weights);
        for (int j = 0; j < count; ++j) {
            Provider p;
            p.npi = "1" + zero_pad(providers.size() + 1, 9);
            p.community = c;
            const bool is_pcp = rng.uniform01() < pcp_share[c];
            if (is_pcp && !pcp_pool.empty())
                p.specialty = pcp_pool[rng.weighted(pcp_cum)];
            else if (!specialist_pool.empty())
                p.specialty = specialist_pool[rng.weighted(specialist_cum)];
            else
                p.specialty = pcp_pool[rng.weighted(pcp_cum)];
            if (rng.uniform01() >= config.no_org_prob)
                p.org_id = "ORG-" + zero_pad(c + 1, 2) + "-" + zero_pad(rng.weighted(org_cum) + 1, 2);
            providers_of_community[c].push_back(static_cast<std::uint32_t>(providers.size()));
            providers.push_back(std::move(p));
        }
    }

    const std::int64_t window_days =
        (config.window_end.days() - config.window_start.days()).count();
    const int window_months = months_in_window(config.window_start, config.window_end);

    std::string claims = "patient_id,npi,service_date,paid_amount,specialty,org_id,entity_type\n";
    std::string patients = "patient_id,county,risk_score,enrollment_months,diabetic,comorbidities\n";
    std::string patient_truth = "patient_id,true_community\n";

    std::uint64_t patient_seq = 0;
    for (int c = 0; c < k; ++c) {
        const int count = static_cast<int>(
            rng.uniform_int(config.patients_per_community.first, config.patients_per_community.second));
        for (int j = 0; j < count; ++j) {
            const std::string patient_id = "S" + zero_pad(++patient_seq, 6);

            std::string county = counties[c];
            if (k > 1 && rng.uniform01() >= config.home_county_share) {
                int other = static_cast<int>(rng.uniform_int(0, k - 2));
                if (other >= c) ++other;
                county = counties[other];
            }
            const double risk_score = std::max(0.05, rng.lognormal(risk[c].log_mu, risk[c].log_sigma));
            const bool diabetic = rng.uniform01() < config.diabetic_share;
            std::string comorbidities;
            for (const auto& item : config.comorbidity_pool) {
                if (rng.uniform01() < config.comorbidity_prob) {
                    if (!comorbidities.empty()) comorbidities += ';';
                    comorbidities += item;
                }
            }

            {
                std::vector<std::string> row{patient_id,
                                             county,
                                             format_double(risk_score, 4),
                                             std::to_string(window_months),
                                             diabetic ? "1" : "0",
                                             comorbidities};
                patients += csv::join_row(row);
            }
            {
                std::vector<std::string> row{patient_id, std::to_string(c)};
                patient_truth += csv::join_row(row);
            }

            const int n_visits = static_cast<int>(
                rng.uniform_int(config.visits_per_patient.first, config.visits_per_patient.second));
            for (int visit = 0; visit < n_visits; ++visit) {
                const int target = static_cast<int>(rng.weighted(cross_cum[c]));
                const auto& pool = providers_of_community[target];
                const Provider& provider =
                    providers[pool[rng.uniform_int(0, static_cast<std::int64_t>(pool.size()) - 1)]];
                const Date date(std::chrono::year_month_day(
                    config.window_start.days() +
                    std::chrono::days(rng.uniform_int(0, window_days))));
                const auto& spec = specialties[provider.specialty];
                const std::int64_t cents = std::max<std::int64_t>(
                    100, static_cast<std::int64_t>(
                             std::llround(rng.lognormal(spec.cost_log_mu, spec.cost_log_sigma) * 100)));

                // a visit becomes one or more claim lines with the amount split
                const int n_lines =
                    static_cast<int>(rng.uniform_int(1, config.max_lines_per_visit));
                std::vector<double> cuts(n_lines);
                double cut_total = 0.0;
                for (int l = 0; l < n_lines; ++l) {
                    cuts[l] = rng.uniform01() + 0.1;
                    cut_total += cuts[l];
                }
                std::int64_t remaining = cents;
                for (int l = 0; l < n_lines; ++l) {
                    std::int64_t line_cents =
                        l + 1 == n_lines
                            ? remaining
                            : std::min(remaining,
                                       static_cast<std::int64_t>(cents * (cuts[l] / cut_total)));
                    remaining -= line_cents;
                    std::vector<std::string> row{patient_id,
                                                 provider.npi,
                                                 date.to_string(),
                                                 format_cents(line_cents),
                                                 spec.name,
                                                 provider.org_id,
                                                 "individual"};
                    claims += csv::join_row(row);
                }
            }
        }
    }

    std::string provider_truth = "npi,true_community\n";
    for (const auto& p : providers) {
        std::vector<std::string> row{p.npi, std::to_string(p.community)};
        provider_truth += csv::join_row(row);
    }

    return SynthOutput{std::move(claims), std::move(patients), std::move(provider_truth),
                       std::move(patient_truth)};
}

std::vector<std::string> write_synth_output(const SynthOutput& output, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const std::vector<std::pair<std::string, const std::string*>> files{
        {"claims.csv", &output.claims_csv},
        {"patients.csv", &output.patients_csv},
        {"truth_providers.csv", &output.provider_truth_csv},
        {"truth_patients.csv", &output.patient_truth_csv},
    };
    std::vector<std::string> paths;
    for (const auto& [name, content] : files) {
        const fs::path path = fs::path(dir) / name;
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + path.string());
        out << *content;
        paths.push_back(path.string());
    }
    return paths;
}

namespace {

template <typename T>
void read_if(const nlohmann::json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

void read_range(const nlohmann::json& j, const char* key, std::pair<int, int>& out) {
    if (!j.contains(key)) return;
    const auto& v = j.at(key);
    if (v.is_array() && v.size() == 2) {
        out = {v[0].get<int>(), v[1].get<int>()};
    } else if (v.is_number()) {
        out = {v.get<int>(), v.get<int>()};
    } else {
        throw std::invalid_argument(std::string("bad range for ") + key);
    }
}

}  // namespace

SynthConfig SynthConfig::from_json(const nlohmann::json& j) {
    SynthConfig config;
    read_if(j, "seed", config.seed);
    read_if(j, "n_communities", config.n_communities);
    read_range(j, "providers_per_community", config.providers_per_community);
    read_range(j, "patients_per_community", config.patients_per_community);
    read_if(j, "pcp_share", config.pcp_share);
    read_if(j, "p_in", config.p_in);
    read_if(j, "cross", config.cross);
    read_range(j, "visits_per_patient", config.visits_per_patient);
    if (j.contains("specialties")) {
        config.specialties.clear();
        for (const auto& s : j.at("specialties")) {
            SpecialtySpec spec;
            spec.name = s.at("name").get<std::string>();
            read_if(s, "weight", spec.weight);
            read_if(s, "cost_log_mu", spec.cost_log_mu);
            read_if(s, "cost_log_sigma", spec.cost_log_sigma);
            read_if(s, "pcp", spec.pcp);
            config.specialties.push_back(std::move(spec));
        }
    }
    read_if(j, "orgs_per_community", config.orgs_per_community);
    read_if(j, "org_size_skew", config.org_size_skew);
    read_if(j, "no_org_prob", config.no_org_prob);
    read_if(j, "counties", config.counties);
    read_if(j, "home_county_share", config.home_county_share);
    if (j.contains("risk")) {
        config.risk.clear();
        for (const auto& r : j.at("risk")) {
            RiskSpec spec;
            read_if(r, "log_mu", spec.log_mu);
            read_if(r, "log_sigma", spec.log_sigma);
            config.risk.push_back(spec);
        }
    }
    if (j.contains("window_start")) {
        auto date = Date::parse(j.at("window_start").get<std::string>());
        if (!date) throw std::invalid_argument("bad window_start");
        config.window_start = *date;
    }
    if (j.contains("window_end")) {
        auto date = Date::parse(j.at("window_end").get<std::string>());
        if (!date) throw std::invalid_argument("bad window_end");
        config.window_end = *date;
    }
    read_if(j, "max_lines_per_visit", config.max_lines_per_visit);
    read_if(j, "diabetic_share", config.diabetic_share);
    read_if(j, "comorbidity_pool", config.comorbidity_pool);
    read_if(j, "comorbidity_prob", config.comorbidity_prob);
    return config;
}

nlohmann::json SynthConfig::to_json() const {
    nlohmann::json j;
    j["seed"] = seed;
    j["n_communities"] = n_communities;
    j["providers_per_community"] = {providers_per_community.first, providers_per_community.second};
    j["patients_per_community"] = {patients_per_community.first, patients_per_community.second};
    if (!pcp_share.empty()) j["pcp_share"] = pcp_share;
    j["p_in"] = p_in;
    if (!cross.empty()) j["cross"] = cross;
    j["visits_per_patient"] = {visits_per_patient.first, visits_per_patient.second};
    if (!specialties.empty()) {
        nlohmann::json list = nlohmann::json::array();
        for (const auto& s : specialties) {
            list.push_back({{"name", s.name},
                            {"weight", s.weight},
                            {"cost_log_mu", s.cost_log_mu},
                            {"cost_log_sigma", s.cost_log_sigma},
                            {"pcp", s.pcp}});
        }
        j["specialties"] = list;
    }
    j["orgs_per_community"] = orgs_per_community;
    j["org_size_skew"] = org_size_skew;
    j["no_org_prob"] = no_org_prob;
    if (!counties.empty()) j["counties"] = counties;
    j["home_county_share"] = home_county_share;
    if (!risk.empty()) {
        nlohmann::json list = nlohmann::json::array();
        for (const auto& r : risk) list.push_back({{"log_mu", r.log_mu}, {"log_sigma", r.log_sigma}});
        j["risk"] = list;
    }
    j["window_start"] = window_start.to_string();
    j["window_end"] = window_end.to_string();
    j["max_lines_per_visit"] = max_lines_per_visit;
    j["diabetic_share"] = diabetic_share;
    j["comorbidity_pool"] = comorbidity_pool;
    j["comorbidity_prob"] = comorbidity_prob;
    return j;
}

}  // namespace netleak

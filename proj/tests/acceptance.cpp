// Acceptance suite: runs every release criterion at its pinned tolerance
// and prints one PASS/FAIL line per criterion. Exit status is the number
// of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "netleak/assignment.hpp"
#include "netleak/claims.hpp"
#include "netleak/community.hpp"
#include "netleak/graph.hpp"
#include "netleak/pipeline.hpp"
#include "netleak/profile.hpp"
#include "netleak/synth.hpp"
#include "netleak/trade.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;
using namespace netleak;

namespace {

int g_failures = 0;

void report(const std::string& name, bool pass, const std::string& detail) {
    std::printf("[%s] %s: %s\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
    if (!pass) ++g_failures;
}

std::string format(const char* fmt, ...) {
    char buf[512];
    va_list args;
    va_start(args, fmt);
    std::vsnprintf(buf, sizeof buf, fmt, args);
    va_end(args);
    return buf;
}

// ---------------------------------------------------------------------------
// Criterion 1: published risk-adjusted PMPM arithmetic within $0.01

void check_table1_arithmetic() {
    struct Row {
        double pmpm, risk, published;
    };
    const Row rows[] = {
        {1536.0, 5.4, 284.44}, {1359.0, 5.9, 230.34}, {1216.0, 4.7, 258.72},
        {3586.0, 10.2, 351.57}, {1364.0, 4.6, 296.52}, {1008.0, 3.2, 315.00},
    };
    int ok = 0;
    double worst = 0.0;
    for (const auto& row : rows) {
        const double computed = risk_adjusted_pmpm(row.pmpm, row.risk);
        const double diff = std::abs(computed - row.published);
        worst = std::max(worst, diff);
        if (diff <= 0.01) ++ok;
    }
    report("table1-arithmetic", ok == 6,
           format("%d/6 published risk-adjusted PMPM values within $0.01 (worst diff $%.4f)", ok,
                  worst));
}

// ---------------------------------------------------------------------------
// Criterion 2: modularity oracle over a graph corpus, 1e-9

void check_modularity_oracle() {
    double worst_eval = 0.0;
    double worst_greedy = 0.0;
    std::size_t graphs = 0, evaluations = 0;

    auto check_graph = [&](const ProviderGraph& g) {
        ++graphs;
        testutil::enumerate_partitions(
            static_cast<std::uint32_t>(g.node_count()), [&](const std::vector<std::uint32_t>& labels) {
                const double lib = modularity(g, labels);
                const double oracle = testutil::modularity_reference(g, labels);
                worst_eval = std::max(worst_eval, std::abs(lib - oracle));
                ++evaluations;
            });
        const auto partition = fast_greedy(g);
        worst_greedy = std::max(
            worst_greedy, std::abs(partition.modularity - modularity(g, partition.community_of)));
    };

    // all connected labeled graphs on 2..6 nodes, exhaustively
    for (std::uint32_t n = 2; n <= 6; ++n) testutil::all_connected_graphs(n, check_graph);

    // deterministic samples of connected graphs on 7 and 8 nodes
    std::mt19937_64 rng(20140101);
    for (int i = 0; i < 40; ++i) check_graph(testutil::random_connected_graph(rng, 7, 0.4, 1));
    for (int i = 0; i < 40; ++i) check_graph(testutil::random_connected_graph(rng, 8, 0.35, 1));

    // 100 random weighted graphs up to 8 nodes
    for (int i = 0; i < 100; ++i) {
        const std::uint32_t n = 3 + static_cast<std::uint32_t>(rng() % 6);
        check_graph(testutil::random_connected_graph(rng, n, 0.5, 9));
    }

    const bool pass = worst_eval <= 1e-9 && worst_greedy <= 1e-9;
    report("modularity-oracle", pass,
           format("%zu graphs, %zu partition evaluations; max |Q - oracle| = %.2e, "
                  "max |greedy Q - recomputed| = %.2e (tolerance 1e-9)",
                  graphs, evaluations, worst_eval, worst_greedy));
}

// ---------------------------------------------------------------------------
// Criterion 3: planted-partition recovery, ARI >= 0.95 over 10 seeds

SynthConfig planted_config(std::uint64_t seed) {
    SynthConfig config;
    config.seed = seed;
    config.n_communities = 6;
    config.providers_per_community = {48, 55};
    config.patients_per_community = {70, 90};
    config.visits_per_patient = {10, 14};
    config.p_in = 0.85;  // cross = 0.03 per foreign community, below the 0.05 cap
    return config;
}

double planted_ari(std::uint64_t seed) {
    const auto output = generate(planted_config(seed));
    std::istringstream claims_in(output.claims_csv);
    const auto parsed = parse_claims(claims_in, ClaimsParseOptions{});
    const auto visits = derive_visits(parsed.claims);
    const auto directory = build_provider_directory(parsed.claims);
    const auto graph = apply_thresholds(
        shared_patient_counts(visits, directory, PcpSpecialtySet::defaults()), 5, 2);
    const auto partition = fast_greedy(graph);

    std::map<std::string, std::uint32_t> truth;
    std::istringstream truth_in(output.provider_truth_csv);
    std::string line;
    std::getline(truth_in, line);
    while (std::getline(truth_in, line)) {
        const auto comma = line.find(',');
        truth[line.substr(0, comma)] =
            static_cast<std::uint32_t>(std::stoul(line.substr(comma + 1)));
    }
    std::vector<std::uint32_t> detected, planted;
    for (std::size_t i = 0; i < graph.node_count(); ++i) {
        detected.push_back(partition.community_of[i]);
        planted.push_back(truth.at(graph.nodes()[i].npi));
    }
    return adjusted_rand_index(detected, planted);
}

void check_planted_recovery() {
    double min_ari = 1.0, sum = 0.0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const double ari = planted_ari(seed);
        min_ari = std::min(min_ari, ari);
        sum += ari;
    }
    const bool pass = min_ari >= 0.95;
    report("planted-partition-recovery", pass,
           format("10 seeds, 6 planted blocks of ~50 providers: min ARI = %.4f, mean = %.4f "
                  "(threshold 0.95)",
                  min_ari, sum / 10.0));
}

// ---------------------------------------------------------------------------
// Criterion 4: leakage calibration, measured utilization in [83%, 87%]

void check_leakage_calibration() {
    SynthConfig synth = planted_config(20140601);
    synth.providers_per_community = {55, 60};
    synth.patients_per_community = {90, 110};
    const auto output = generate(synth);

    std::istringstream claims_in(output.claims_csv);
    const auto parsed = parse_claims(claims_in, ClaimsParseOptions{});
    const auto visits = derive_visits(parsed.claims);
    const auto directory = build_provider_directory(parsed.claims);
    const auto graph = apply_thresholds(
        shared_patient_counts(visits, directory, PcpSpecialtySet::defaults()), 5, 2);
    const auto pruned = prune_small(fast_greedy(graph), 50);
    const CommunityIndex index(graph, pruned);
    const auto assignment = assign_by_plurality(visits, index);

    std::uint64_t in_visits = 0, total_visits = 0;
    for (const auto& pa : assignment.patients) {
        if (!pa.community) continue;
        in_visits += pa.in_visits;
        total_visits += pa.total_visits;
    }
    const double mean_utilization =
        total_visits == 0 ? 0.0 : static_cast<double>(in_visits) / static_cast<double>(total_visits);
    const bool pass = mean_utilization >= 0.83 && mean_utilization <= 0.87;
    report("leakage-calibration", pass,
           format("p_in = 0.85 synthetic run: mean within-community utilization = %.2f%% "
                  "(window [83%%, 87%%], %u major communities)",
                  100.0 * mean_utilization, pruned.n_major));
}

// ---------------------------------------------------------------------------
// Criterion 5: RCA identities on 1,000 random trade matrices

void check_rca_identities() {
    std::mt19937_64 rng(5150);
    std::size_t matrices = 0;
    bool conservation_ok = true;
    double worst_mean = 0.0;

    for (int trial = 0; trial < 1000; ++trial) {
        // random visits, partition, and assignment through the real
        // accounting path
        const std::uint32_t n_major = 2 + static_cast<std::uint32_t>(rng() % 5);
        const int n_providers = 6 + static_cast<int>(rng() % 12);
        const int n_patients = 5 + static_cast<int>(rng() % 20);
        const char* specialties[] = {"cardiology", "dermatology", "endocrinology", "family medicine"};

        std::unordered_map<std::string, std::uint32_t> table;
        std::vector<ProviderInfo> directory;
        for (int i = 0; i < n_providers; ++i) {
            const std::string npi = "N" + std::to_string(i);
            if (rng() % 8 != 0) table.emplace(npi, rng() % n_major);
            ProviderInfo info;
            info.npi = npi;
            auto label = normalize_specialty(specialties[rng() % 4]);
            info.specialty = label.display;
            info.specialty_key = label.key;
            directory.push_back(std::move(info));
        }
        std::sort(directory.begin(), directory.end(),
                  [](const ProviderInfo& a, const ProviderInfo& b) { return a.npi < b.npi; });
        const CommunityIndex index(table, n_major);

        AssignmentResult assignment;
        for (int p = 0; p < n_patients; ++p) {
            PatientAssignment pa;
            pa.patient_id = "P" + std::to_string(p);
            if (rng() % 6 != 0) pa.community = static_cast<std::uint32_t>(rng() % n_major);
            assignment.patients.push_back(std::move(pa));
        }
        std::sort(assignment.patients.begin(), assignment.patients.end(),
                  [](const PatientAssignment& a, const PatientAssignment& b) {
                      return a.patient_id < b.patient_id;
                  });

        std::vector<Visit> visits;
        const int n_visits = 20 + static_cast<int>(rng() % 120);
        for (int i = 0; i < n_visits; ++i)
            visits.push_back(testutil::make_visit("P" + std::to_string(rng() % n_patients),
                                                  "N" + std::to_string(rng() % n_providers),
                                                  static_cast<int>(rng() % 300), 100));
        const auto matrix = trade_counts(visits, assignment, index, directory);
        ++matrices;

        // conservation: exact equality per specialty
        std::map<std::string, std::int64_t> balance;
        for (const auto& [key, count] : matrix.import_counts)
            balance[key.second] += static_cast<std::int64_t>(count);
        for (const auto& [key, count] : matrix.export_counts)
            balance[key.second] -= static_cast<std::int64_t>(count);
        for (const auto& [_, diff] : balance)
            if (diff != 0) conservation_ok = false;

        // share-weighted mean RCA = 1 per traded specialty
        for (auto direction : {TradeDirection::imports, TradeDirection::exports}) {
            const auto& counts = matrix.counts(direction);
            std::map<std::uint32_t, std::uint64_t> community_totals;
            std::uint64_t grand = 0;
            for (const auto& [key, count] : counts) {
                community_totals[key.first] += count;
                grand += count;
            }
            if (grand == 0) continue;
            const auto rca_table = rca(matrix, direction);
            for (const auto& specialty : matrix.specialties(direction)) {
                double weighted_mean = 0.0;
                for (const auto& [community, total] : community_totals) {
                    const auto value = rca_table.at(community, specialty);
                    if (value) weighted_mean += (static_cast<double>(total) / grand) * *value;
                }
                worst_mean = std::max(worst_mean, std::abs(weighted_mean - 1.0));
            }
        }
    }
    const bool pass = conservation_ok && worst_mean <= 1e-9;
    report("rca-identities", pass,
           format("%zu random trade matrices: conservation %s, max |weighted mean RCA - 1| = %.2e "
                  "(tolerance 1e-9)",
                  matrices, conservation_ok ? "exact" : "VIOLATED", worst_mean));
}

// ---------------------------------------------------------------------------
// Criterion 6: plurality maximality and scheme dominance on 10^3 patients

void check_plurality_maximality() {
    std::mt19937_64 rng(8086);
    const std::uint32_t n_major = 5;
    const int n_providers = 60;

    std::unordered_map<std::string, std::uint32_t> table;
    std::vector<ProviderInfo> directory;
    for (int i = 0; i < n_providers; ++i) {
        const std::string npi = "N" + std::to_string(i);
        if (i % 10 != 0) table.emplace(npi, rng() % n_major);
        ProviderInfo info;
        info.npi = npi;
        auto label = normalize_specialty(i % 3 == 0 ? "Family Medicine" : "Cardiology");
        info.specialty = label.display;
        info.specialty_key = label.key;
        directory.push_back(std::move(info));
    }
    std::sort(directory.begin(), directory.end(),
              [](const ProviderInfo& a, const ProviderInfo& b) { return a.npi < b.npi; });
    const CommunityIndex index(table, n_major);

    std::vector<Visit> visits;
    for (int p = 0; p < 1000; ++p)
        for (int k = 0, n = 2 + static_cast<int>(rng() % 10); k < n; ++k)
            visits.push_back(testutil::make_visit("P" + std::to_string(p),
                                                  "N" + std::to_string(rng() % n_providers),
                                                  static_cast<int>(rng() % 300),
                                                  static_cast<std::int64_t>(rng() % 9000)));

    const auto plurality = assign_by_plurality(visits, index);
    const auto imputed = impute_pcp(visits, directory, PcpSpecialtySet::defaults(), Date(2014, 12, 31));
    const auto pcp = assign_by_pcp(visits, imputed, index);

    // brute-force per-patient counts
    std::map<std::string, std::map<std::uint32_t, std::uint64_t>> counts;
    for (const auto& v : visits)
        if (auto c = index.community_of(v.npi)) ++counts[v.patient_id][*c];

    bool maximal = true;
    std::size_t checked = 0;
    for (const auto& pa : plurality.patients) {
        if (!pa.community) {
            if (counts.count(pa.patient_id) && !counts[pa.patient_id].empty()) maximal = false;
            continue;
        }
        const auto& c = counts.at(pa.patient_id);
        const std::uint64_t chosen = c.at(*pa.community);
        for (const auto& [community, count] : c)
            if (count > chosen) maximal = false;  // a strictly better community existed
        ++checked;
    }

    // pooled dominance over patients assigned under both schemes
    std::uint64_t plurality_pool = 0, pcp_pool = 0, denominator = 0;
    bool per_patient_dominance = true;
    for (const auto& pa : pcp.patients) {
        if (!pa.community) continue;
        const auto* pl = plurality.find(pa.patient_id);
        if (pl == nullptr || !pl->community) {
            per_patient_dominance = false;
            continue;
        }
        if (pl->in_visits < pa.in_visits) per_patient_dominance = false;
        plurality_pool += pl->in_visits;
        pcp_pool += pa.in_visits;
        denominator += pa.total_visits;
    }
    const double plurality_mean =
        denominator == 0 ? 0.0 : static_cast<double>(plurality_pool) / denominator;
    const double pcp_mean = denominator == 0 ? 0.0 : static_cast<double>(pcp_pool) / denominator;

    const bool pass = maximal && per_patient_dominance && plurality_mean >= pcp_mean;
    report("plurality-maximality", pass,
           format("%zu assigned patients: no single-patient reassignment improves in-community "
                  "visits; plurality pooled utilization %.4f >= imputed-PCP %.4f",
                  checked, plurality_mean, pcp_mean));
}

// ---------------------------------------------------------------------------
// Criterion 7: determinism across reruns and thread counts

void check_determinism() {
    const fs::path base = fs::temp_directory_path() / "netleak_acceptance_determinism";
    fs::remove_all(base);
    fs::create_directories(base);

    SynthConfig synth;
    synth.seed = 99;
    synth.n_communities = 4;
    synth.providers_per_community = {16, 20};
    synth.patients_per_community = {40, 50};
    synth.p_in = 0.88;
    write_synth_output(generate(synth), (base / "data").string());

    auto make_config = [&](const std::string& out, unsigned threads) {
        RunConfig config;
        config.claims_path = (base / "data" / "claims.csv").string();
        config.patients_path = (base / "data" / "patients.csv").string();
        config.out_dir = (base / out).string();
        config.min_community_size = 10;
        config.export_formats = {"gexf", "dot"};
        config.threads = threads;
        return config;
    };

    const std::vector<std::string> artifacts{
        "visits.csv",     "patients_clean.csv", "provider_directory.csv", "graph_nodes.csv",
        "graph_edges.csv", "partition.csv",     "excluded.csv",           "assignment.csv",
        "profiles.csv",   "profiles.json",      "pair_flows.csv",         "rca.csv",
        "flow_edges.csv", "findings.json",      "graph.gexf",             "graph.dot",
        "detect_meta.json", "ingest_meta.json", "run_metadata.json"};

    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream buffer;
        buffer << in.rdbuf();
        return buffer.str();
    };

    const auto config = make_config("out", 1);
    run_pipeline(config);
    std::map<std::string, std::string> first;
    for (const auto& name : artifacts) first[name] = slurp(base / "out" / name);
    run_pipeline(config);
    bool rerun_identical = true;
    for (const auto& name : artifacts)
        if (first.at(name) != slurp(base / "out" / name)) rerun_identical = false;

    run_pipeline(make_config("out4", 4));
    bool threads_identical = true;
    for (const auto& name : artifacts) {
        if (name == "run_metadata.json") continue;  // echoes out_dir and thread count
        if (first.at(name) != slurp(base / "out4" / name)) threads_identical = false;
    }

    fs::remove_all(base);
    const bool pass = rerun_identical && threads_identical;
    report("determinism", pass,
           format("rerun identical: %s; 1-thread vs 4-thread canonical artifacts identical: %s",
                  rerun_identical ? "yes" : "NO", threads_identical ? "yes" : "NO"));
}

// ---------------------------------------------------------------------------
// Criterion 8: 10^6 claim lines through graph build + detection < 60 s

void check_performance() {
    SynthConfig synth;
    synth.seed = 86;
    synth.n_communities = 6;
    synth.providers_per_community = {290, 310};
    synth.patients_per_community = {6900, 7100};
    synth.visits_per_patient = {10, 14};
    synth.p_in = 0.85;
    synth.max_lines_per_visit = 3;

    const auto output = generate(synth);
    std::istringstream claims_in(output.claims_csv);
    const auto parsed = parse_claims(claims_in, ClaimsParseOptions{});
    const std::size_t n_lines = parsed.claims.size();

    const auto start = std::chrono::steady_clock::now();
    const auto visits = derive_visits(parsed.claims);
    const auto directory = build_provider_directory(parsed.claims);
    const auto graph = apply_thresholds(
        shared_patient_counts(visits, directory, PcpSpecialtySet::defaults(), 4), 5, 2);
    const auto partition = fast_greedy(graph);
    const auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start);

    const bool pass = n_lines >= 1000000 && elapsed.count() < 60.0;
    report("performance", pass,
           format("%zu claim lines -> %zu visits -> %zu nodes / %zu edges -> %u communities "
                  "in %.1f s (budget 60 s)",
                  n_lines, visits.size(), graph.node_count(), graph.edge_count(),
                  partition.n_communities, elapsed.count()));
}

}  // namespace

int main() {
    std::printf("netleak acceptance suite\n------------------------\n");
    check_table1_arithmetic();
    check_modularity_oracle();
    check_planted_recovery();
    check_leakage_calibration();
    check_rca_identities();
    check_plurality_maximality();
    check_determinism();
    check_performance();
    std::printf("------------------------\n%s (%d failure%s)\n",
                g_failures == 0 ? "ALL CRITERIA PASS" : "CRITERIA FAILED", g_failures,
                g_failures == 1 ? "" : "s");
    return g_failures;
}

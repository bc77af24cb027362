#include <exception>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include <nlohmann/json.hpp>

#include "netleak/pipeline.hpp"

namespace {

struct CliOverrides {
    std::string config_path;
    std::string claims, patients, out;
    std::string window_start, window_end;
    std::vector<std::string> counties;
    int min_patients = -1;
    int min_edge_weight = -1;
    int min_community_size = -1;
    std::string scheme;
    std::vector<std::string> pcp_specialties;
    std::vector<std::string> export_formats;
    int display_min_weight = -1;
    long long seed = -1;
    int threads = -1;
    bool require_diabetic = false, no_require_diabetic = false;
    bool individual_only = false, no_individual_only = false;
    bool spend_weighted_trade = false;
    std::string synth_config_path;
};

void add_common_options(CLI::App* cmd, CliOverrides& o) {
    cmd->add_option("--config", o.config_path, "Run configuration JSON file");
    cmd->add_option("--claims", o.claims, "Claims CSV path");
    cmd->add_option("--patients", o.patients, "Patients CSV path");
    cmd->add_option("--out", o.out, "Output directory for artifacts");
    cmd->add_option("--window-start", o.window_start, "Study window start (YYYY-MM-DD)");
    cmd->add_option("--window-end", o.window_end, "Study window end (YYYY-MM-DD)");
    cmd->add_option("--counties", o.counties, "Counties to keep (empty keeps all)")->delimiter(',');
    cmd->add_option("--min-patients", o.min_patients,
                    "Minimum unique patients per provider (default 5)");
    cmd->add_option("--min-edge-weight", o.min_edge_weight,
                    "Minimum shared patients per edge (default 2)");
    cmd->add_option("--min-community-size", o.min_community_size,
                    "Minimum providers per major community (default 50)");
    cmd->add_option("--scheme", o.scheme, "Patient assignment scheme: plurality|pcp");
    cmd->add_option("--pcp-specialties", o.pcp_specialties, "PCP specialty labels")->delimiter(',');
    cmd->add_option("--export", o.export_formats, "Graph export formats: gexf,dot,csv")
        ->delimiter(',');
    cmd->add_option("--display-min-weight", o.display_min_weight,
                    "Minimum edge weight shown in graph exports (default 5)");
    cmd->add_option("--seed", o.seed, "Random seed for synthetic data");
    cmd->add_option("--threads", o.threads, "Worker threads for graph construction");
    cmd->add_flag("--require-diabetic", o.require_diabetic, "Keep diabetic patients only");
    cmd->add_flag("--no-require-diabetic", o.no_require_diabetic, "Keep all patients");
    cmd->add_flag("--individual-only", o.individual_only, "Keep individual-entity providers only");
    cmd->add_flag("--no-individual-only", o.no_individual_only, "Keep all provider entity types");
    cmd->add_flag("--spend-weighted-trade", o.spend_weighted_trade,
                  "Weight trade counts by paid amount instead of visits");
    cmd->add_option("--synth-config", o.synth_config_path, "Synthetic generator JSON config");
}

netleak::RunConfig build_config(const CliOverrides& o) {
    netleak::RunConfig config;
    if (!o.config_path.empty()) config = netleak::RunConfig::from_file(o.config_path);
    if (!o.claims.empty()) config.claims_path = o.claims;
    if (!o.patients.empty()) config.patients_path = o.patients;
    if (!o.out.empty()) config.out_dir = o.out;
    if (!o.window_start.empty()) {
        auto date = netleak::Date::parse(o.window_start);
        if (!date) throw std::runtime_error("bad --window-start");
        config.window_start = *date;
    }
    if (!o.window_end.empty()) {
        auto date = netleak::Date::parse(o.window_end);
        if (!date) throw std::runtime_error("bad --window-end");
        config.window_end = *date;
    }
    if (!o.counties.empty()) config.counties = o.counties;
    if (o.min_patients >= 0) config.min_patients_per_provider = o.min_patients;
    if (o.min_edge_weight >= 0) config.min_edge_weight = o.min_edge_weight;
    if (o.min_community_size >= 0) config.min_community_size = o.min_community_size;
    if (!o.scheme.empty()) {
        auto scheme = netleak::parse_scheme(o.scheme);
        if (!scheme) throw std::runtime_error("unknown --scheme (use plurality or pcp)");
        config.scheme = *scheme;
    }
    if (!o.pcp_specialties.empty()) config.pcp_specialties = o.pcp_specialties;
    if (!o.export_formats.empty()) config.export_formats = o.export_formats;
    if (o.display_min_weight >= 0) config.display_min_weight = o.display_min_weight;
    if (o.seed >= 0) {
        config.seed = static_cast<std::uint64_t>(o.seed);
        config.synth.seed = config.seed;
    }
    if (o.threads > 0) config.threads = static_cast<unsigned>(o.threads);
    if (o.require_diabetic) config.require_diabetic = true;
    if (o.no_require_diabetic) config.require_diabetic = false;
    if (o.individual_only) config.individual_only = true;
    if (o.no_individual_only) config.individual_only = false;
    if (o.spend_weighted_trade) config.spend_weighted_trade = true;
    if (!o.synth_config_path.empty()) {
        std::ifstream in(o.synth_config_path);
        if (!in) throw std::runtime_error("cannot read " + o.synth_config_path);
        nlohmann::json j;
        in >> j;
        config.synth = netleak::SynthConfig::from_json(j);
        if (o.seed >= 0) config.synth.seed = static_cast<std::uint64_t>(o.seed);
    }
    if (config.out_dir.empty()) throw std::runtime_error("an output directory is required (--out)");
    config.validate();
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"netleak: provider patient-sharing networks, community detection, and "
                 "service-leakage analysis from claims data"};
    app.require_subcommand(1);

    CliOverrides o;
    struct Stage {
        const char* name;
        const char* help;
        void (*run)(const netleak::RunConfig&);
    };
    const std::vector<Stage> stages{
        {"synth", "Generate synthetic claims/patients with planted communities", netleak::run_synth},
        {"ingest", "Parse, validate, and filter claims and patients", netleak::run_ingest},
        {"graph", "Build the thresholded patient-sharing provider graph", netleak::run_graph},
        {"detect", "Detect provider communities by modularity maximization", netleak::run_detect},
        {"assign", "Assign patients to communities", netleak::run_assign},
        {"profile", "Build per-community profiles", netleak::run_profile},
        {"trade", "Import/export accounting, RCA, flows, and findings", netleak::run_trade},
        {"report", "Graph exports and run metadata", netleak::run_report},
    };
    for (const auto& stage : stages) {
        CLI::App* cmd = app.add_subcommand(stage.name, stage.help);
        add_common_options(cmd, o);
        cmd->callback([&o, run = stage.run]() { run(build_config(o)); });
    }
    CLI::App* run_cmd = app.add_subcommand("run", "Run the whole pipeline end to end");
    add_common_options(run_cmd, o);
    run_cmd->callback([&o]() {
        const auto summary = netleak::run_pipeline(build_config(o));
        std::cout << "communities=" << summary.n_communities << " q=" << summary.q
                  << " providers=" << summary.n_providers << " patients=" << summary.n_patients
                  << " visits=" << summary.n_visits << "\n"
                  << "artifacts written to " << summary.out_dir << "\n";
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "netleak/assignment.hpp"
#include "netleak/common.hpp"
#include "netleak/synth.hpp"

namespace netleak {

inline constexpr const char* kVersion = "0.1.0";

/// Effective run configuration: a declarative JSON file plus CLI
/// overrides; the result is echoed into run metadata.
struct RunConfig {
    std::string claims_path;
    std::string patients_path;
    std::string out_dir;

    Date window_start{2014, 1, 1};
    Date window_end{2014, 12, 31};
    std::vector<std::string> counties;  // empty keeps all
    bool require_diabetic = true;
    bool individual_only = true;
    std::string unknown_patient_policy = "reject";  // or "fatal"

    int min_patients_per_provider = 5;
    int min_edge_weight = 2;
    int min_community_size = 50;

    Scheme scheme = Scheme::plurality;
    std::vector<std::string> pcp_specialties;  // empty -> built-in defaults
    int pcp_window_months = 12;

    std::vector<std::string> export_formats;  // subset of gexf, dot, csv
    int display_min_weight = 5;

    int trade_top_k = 4;
    double trade_min_share = 0.05;
    double balance_tolerance = 0.25;
    int gap_top_k = 5;
    bool spend_weighted_trade = false;

    unsigned threads = 1;
    std::uint64_t seed = 1;
    SynthConfig synth;  // used by the synth stage

    void validate() const;
    PcpSpecialtySet pcp_set() const;

    static RunConfig from_json(const nlohmann::json& j);
    static RunConfig from_file(const std::string& path);
    nlohmann::json to_json() const;
    std::string config_hash() const;  // FNV-1a of the canonical dump
};

/// Pipeline stages. Each reads the prior stage's canonical artifacts from
/// out_dir and writes its own, so stages are independently runnable and
/// their outputs diffable. A missing dependency raises an error naming the
/// required artifact.
void run_synth(const RunConfig& config);
void run_ingest(const RunConfig& config);
void run_graph(const RunConfig& config);
void run_detect(const RunConfig& config);
void run_assign(const RunConfig& config);
void run_profile(const RunConfig& config);
void run_trade(const RunConfig& config);
void run_report(const RunConfig& config);

struct RunSummary {
    double q = 0.0;
    std::uint32_t n_communities = 0;
    std::size_t n_providers = 0;
    std::size_t n_patients = 0;
    std::size_t n_visits = 0;
    std::string out_dir;
};

/// Composes every stage in order: ingest, graph, detect, assign, profile,
/// trade, report. Byte-identical to running the stages one at a time.
RunSummary run_pipeline(const RunConfig& config);

}  // namespace netleak

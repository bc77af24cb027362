#include "netleak/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "netleak/claims.hpp"
#include "netleak/community.hpp"
#include "netleak/csv.hpp"
#include "netleak/graph.hpp"
#include "netleak/profile.hpp"
#include "netleak/trade.hpp"

namespace netleak {

namespace fs = std::filesystem;

namespace {

void write_file(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

fs::path require_artifact(const RunConfig& config, const std::string& name,
                          const std::string& producing_stage) {
    const fs::path path = fs::path(config.out_dir) / name;
    if (!fs::exists(path))
        throw std::runtime_error("missing artifact " + name + " (run the '" + producing_stage +
                                 "' stage first)");
    return path;
}

std::string rejects_csv(const std::vector<RejectedRow>& rejects) {
    std::string out = "row,reason\n";
    for (const auto& r : rejects) {
        std::vector<std::string> row{std::to_string(r.row), r.reason};
        out += csv::join_row(row);
    }
    return out;
}

std::string visits_csv(const std::vector<Visit>& visits) {
    std::string out = "patient_id,npi,service_date,paid_amount,specialty\n";
    for (const auto& v : visits) {
        std::vector<std::string> row{v.patient_id, v.npi, v.service_date.to_string(),
                                     format_cents(v.paid_cents), v.specialty};
        out += csv::join_row(row);
    }
    return out;
}

std::vector<Visit> read_visits(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    csv::Reader reader(in);
    auto header = reader.next();
    if (!header || header->size() < 5) throw std::runtime_error("visits csv: bad header");
    std::vector<Visit> visits;
    while (auto row = reader.next()) {
        if (row->size() < 5) throw std::runtime_error("visits csv: malformed row");
        Visit v;
        v.patient_id = (*row)[0];
        v.npi = (*row)[1];
        auto date = Date::parse((*row)[2]);
        if (!date) throw std::runtime_error("visits csv: bad date");
        v.service_date = *date;
        auto cents = parse_money_cents((*row)[3]);
        if (!cents) throw std::runtime_error("visits csv: bad amount");
        v.paid_cents = *cents;
        auto label = normalize_specialty((*row)[4]);
        v.specialty = label.display;
        v.specialty_key = label.key;
        visits.push_back(std::move(v));
    }
    return visits;
}

std::string patients_csv(const std::vector<PatientRecord>& patients) {
    std::string out = "patient_id,county,risk_score,enrollment_months,diabetic,comorbidities\n";
    for (const auto& p : patients) {
        std::string comorbidities;
        for (const auto& item : p.comorbidities) {
            if (!comorbidities.empty()) comorbidities += ';';
            comorbidities += item;
        }
        std::vector<std::string> row{p.patient_id,
                                     p.county,
                                     format_double(p.risk_score, 4),
                                     std::to_string(p.enrollment_months),
                                     p.diabetic ? "1" : "0",
                                     comorbidities};
        out += csv::join_row(row);
    }
    return out;
}

std::vector<PatientRecord> read_patients(const fs::path& path, int window_months) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    PatientsParseOptions options;
    options.window_months = window_months;
    auto result = parse_patients(in, options);
    if (!result.rejects.empty())
        throw std::runtime_error("patients artifact failed to re-parse cleanly: row " +
                                 std::to_string(result.rejects.front().row) + ": " +
                                 result.rejects.front().reason);
    return result.patients;
}

std::string directory_csv(const std::vector<ProviderInfo>& directory) {
    std::string out = "npi,specialty,org_id,entity_type\n";
    for (const auto& p : directory) {
        std::vector<std::string> row{p.npi, p.specialty, p.org_id, to_string(p.entity_type)};
        out += csv::join_row(row);
    }
    return out;
}

std::vector<ProviderInfo> read_directory(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    csv::Reader reader(in);
    auto header = reader.next();
    if (!header || header->size() < 4) throw std::runtime_error("provider directory csv: bad header");
    std::vector<ProviderInfo> directory;
    while (auto row = reader.next()) {
        if (row->size() < 4) throw std::runtime_error("provider directory csv: malformed row");
        ProviderInfo info;
        info.npi = (*row)[0];
        auto label = normalize_specialty((*row)[1]);
        info.specialty = label.display;
        info.specialty_key = label.key;
        info.org_id = (*row)[2];
        auto entity = parse_entity_type((*row)[3]);
        if (!entity) throw std::runtime_error("provider directory csv: bad entity_type");
        info.entity_type = *entity;
        directory.push_back(std::move(info));
    }
    return directory;
}

std::string partition_csv(const ProviderGraph& graph, const PrunedPartition& pruned) {
    std::string out = "npi,community_id\n";
    for (std::size_t i = 0; i < graph.node_count(); ++i) {
        if (pruned.major_of[i] == kNoCommunity) continue;
        std::vector<std::string> row{graph.nodes()[i].npi, std::to_string(pruned.major_of[i])};
        out += csv::join_row(row);
    }
    return out;
}

std::string excluded_csv(const ProviderGraph& graph, const PrunedPartition& pruned) {
    std::string out = "community_id,npi\n";
    for (const auto& community : pruned.excluded) {
        for (std::uint32_t member : community.members) {
            std::vector<std::string> row{std::to_string(community.original_id),
                                         graph.nodes()[member].npi};
            out += csv::join_row(row);
        }
    }
    return out;
}

CommunityIndex read_partition(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    csv::Reader reader(in);
    auto header = reader.next();
    if (!header || header->size() < 2) throw std::runtime_error("partition csv: bad header");
    std::unordered_map<std::string, std::uint32_t> major_of;
    std::uint32_t n_major = 0;
    while (auto row = reader.next()) {
        if (row->size() < 2) throw std::runtime_error("partition csv: malformed row");
        const auto community = static_cast<std::uint32_t>(std::stoul((*row)[1]));
        major_of.emplace((*row)[0], community);
        n_major = std::max(n_major, community + 1);
    }
    return CommunityIndex(std::move(major_of), n_major);
}

std::string assignment_csv(const AssignmentResult& assignment) {
    std::string out = "patient_id,scheme,community_id,visit_fraction,spend_fraction\n";
    for (const auto& p : assignment.patients) {
        std::vector<std::string> row{p.patient_id, to_string(assignment.scheme),
                                     p.community ? std::to_string(*p.community) : std::string{},
                                     format_double(p.visit_fraction(), 6),
                                     format_double(p.spend_fraction(), 6)};
        out += csv::join_row(row);
    }
    return out;
}

std::string pair_flows_csv(const TradeMatrix& matrix) {
    std::string out = "from,to,specialty,count\n";
    for (const auto& [flow, count] : matrix.pair_flows) {
        std::vector<std::string> row{std::to_string(std::get<0>(flow)),
                                     std::to_string(std::get<1>(flow)), std::get<2>(flow),
                                     std::to_string(count)};
        out += csv::join_row(row);
    }
    return out;
}

nlohmann::json findings_json(const Findings& findings, const TradeMatrix& matrix) {
    nlohmann::json internal = nlohmann::json::array();
    for (const auto& f : findings.internalization) {
        internal.push_back({{"community", f.community},
                            {"specialty", f.specialty_key},
                            {"import", f.import_count},
                            {"export", f.export_count},
                            {"imbalance", f.imbalance}});
    }
    nlohmann::json gaps = nlohmann::json::array();
    for (const auto& g : findings.gaps) {
        gaps.push_back({{"community", g.community},
                        {"specialty", g.specialty_key},
                        {"import_rca", g.import_rca},
                        {"import", g.import_count}});
    }
    return nlohmann::json{{"internalization_opportunities", internal},
                          {"specialty_gaps", gaps},
                          {"visit_totals",
                           {{"within_community", matrix.within_count},
                            {"cross_community", matrix.cross_total()},
                            {"excluded", matrix.excluded_count}}}};
}

/// Recomputes the configured assignment from canonical artifacts; pure,
/// so stage replays agree with the monolithic run.
AssignmentResult compute_assignment(const RunConfig& config, const std::vector<Visit>& visits,
                                    const CommunityIndex& index,
                                    const std::vector<ProviderInfo>& directory) {
    if (config.scheme == Scheme::plurality) return assign_by_plurality(visits, index);
    auto imputed = impute_pcp(visits, directory, config.pcp_set(), config.window_end,
                              config.pcp_window_months);
    return assign_by_pcp(visits, imputed, index);
}

std::string json_dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

}  // namespace

void RunConfig::validate() const {
    if (min_patients_per_provider < 1 || min_edge_weight < 1 || min_community_size < 1)
        throw std::invalid_argument("thresholds must be >= 1");
    if (pcp_window_months < 1) throw std::invalid_argument("pcp_window_months must be >= 1");
    if (window_end < window_start) throw std::invalid_argument("window_end precedes window_start");
    if (threads < 1) throw std::invalid_argument("threads must be >= 1");
    if (trade_min_share < 0.0 || trade_min_share > 1.0)
        throw std::invalid_argument("trade_min_share outside [0, 1]");
    if (balance_tolerance < 0.0 || balance_tolerance > 1.0)
        throw std::invalid_argument("balance_tolerance outside [0, 1]");
    if (unknown_patient_policy != "reject" && unknown_patient_policy != "fatal")
        throw std::invalid_argument("unknown_patient_policy must be reject or fatal");
    if (!out_dir.empty() && (out_dir == claims_path || out_dir == patients_path))
        throw std::invalid_argument("out_dir must be distinct from the input paths");
    for (const auto& format : export_formats)
        if (!parse_graph_format(format))
            throw std::invalid_argument("unknown export format: " + format);
}

PcpSpecialtySet RunConfig::pcp_set() const {
    return pcp_specialties.empty() ? PcpSpecialtySet::defaults() : PcpSpecialtySet(pcp_specialties);
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
    RunConfig config;
    auto read_string = [&](const char* key, std::string& out) {
        if (j.contains(key)) out = j.at(key).get<std::string>();
    };
    read_string("claims", config.claims_path);
    read_string("patients", config.patients_path);
    read_string("out", config.out_dir);
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
    if (j.contains("counties")) config.counties = j.at("counties").get<std::vector<std::string>>();
    if (j.contains("require_diabetic")) config.require_diabetic = j.at("require_diabetic").get<bool>();
    if (j.contains("individual_only")) config.individual_only = j.at("individual_only").get<bool>();
    read_string("unknown_patient_policy", config.unknown_patient_policy);
    if (j.contains("min_patients_per_provider"))
        config.min_patients_per_provider = j.at("min_patients_per_provider").get<int>();
    if (j.contains("min_edge_weight")) config.min_edge_weight = j.at("min_edge_weight").get<int>();
    if (j.contains("min_community_size"))
        config.min_community_size = j.at("min_community_size").get<int>();
    if (j.contains("scheme")) {
        auto scheme = parse_scheme(j.at("scheme").get<std::string>());
        if (!scheme) throw std::invalid_argument("unknown scheme");
        config.scheme = *scheme;
    }
    if (j.contains("pcp_specialties"))
        config.pcp_specialties = j.at("pcp_specialties").get<std::vector<std::string>>();
    if (j.contains("pcp_window_months")) config.pcp_window_months = j.at("pcp_window_months").get<int>();
    if (j.contains("export"))
        config.export_formats = j.at("export").get<std::vector<std::string>>();
    if (j.contains("display_min_weight"))
        config.display_min_weight = j.at("display_min_weight").get<int>();
    if (j.contains("trade_top_k")) config.trade_top_k = j.at("trade_top_k").get<int>();
    if (j.contains("trade_min_share")) config.trade_min_share = j.at("trade_min_share").get<double>();
    if (j.contains("balance_tolerance"))
        config.balance_tolerance = j.at("balance_tolerance").get<double>();
    if (j.contains("gap_top_k")) config.gap_top_k = j.at("gap_top_k").get<int>();
    if (j.contains("spend_weighted_trade"))
        config.spend_weighted_trade = j.at("spend_weighted_trade").get<bool>();
    if (j.contains("threads")) config.threads = j.at("threads").get<unsigned>();
    if (j.contains("seed")) config.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("synth")) config.synth = SynthConfig::from_json(j.at("synth"));
    config.synth.seed = config.seed;
    return config;
}

RunConfig RunConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read config file " + path);
    nlohmann::json j;
    in >> j;
    return from_json(j);
}

nlohmann::json RunConfig::to_json() const {
    nlohmann::json j;
    j["claims"] = claims_path;
    j["patients"] = patients_path;
    j["out"] = out_dir;
    j["window_start"] = window_start.to_string();
    j["window_end"] = window_end.to_string();
    j["counties"] = counties;
    j["require_diabetic"] = require_diabetic;
    j["individual_only"] = individual_only;
    j["unknown_patient_policy"] = unknown_patient_policy;
    j["min_patients_per_provider"] = min_patients_per_provider;
    j["min_edge_weight"] = min_edge_weight;
    j["min_community_size"] = min_community_size;
    j["scheme"] = to_string(scheme);
    j["pcp_specialties"] = pcp_specialties.empty() ? pcp_set().labels() : pcp_specialties;
    j["pcp_window_months"] = pcp_window_months;
    j["export"] = export_formats;
    j["display_min_weight"] = display_min_weight;
    j["trade_top_k"] = trade_top_k;
    j["trade_min_share"] = trade_min_share;
    j["balance_tolerance"] = balance_tolerance;
    j["gap_top_k"] = gap_top_k;
    j["spend_weighted_trade"] = spend_weighted_trade;
    j["threads"] = threads;
    j["seed"] = seed;
    j["synth"] = synth.to_json();
    return j;
}

std::string RunConfig::config_hash() const {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(to_json().dump())));
    return buf;
}

void run_synth(const RunConfig& config) {
    SynthConfig synth = config.synth;
    synth.seed = config.seed;
    const auto output = generate(synth);
    write_synth_output(output, config.out_dir);
}

void run_ingest(const RunConfig& config) {
    if (config.claims_path.empty() || config.patients_path.empty())
        throw std::runtime_error("ingest requires --claims and --patients");
    std::ifstream claims_in(config.claims_path, std::ios::binary);
    if (!claims_in) throw std::runtime_error("cannot read claims file " + config.claims_path);
    std::ifstream patients_in(config.patients_path, std::ios::binary);
    if (!patients_in) throw std::runtime_error("cannot read patients file " + config.patients_path);

    ClaimsParseOptions claim_options;
    claim_options.window_start = config.window_start;
    claim_options.window_end = config.window_end;
    const auto parsed_claims = parse_claims(claims_in, claim_options);

    PatientsParseOptions patient_options;
    patient_options.window_months = months_in_window(config.window_start, config.window_end);
    const auto parsed_patients = parse_patients(patients_in, patient_options);

    const auto directory = build_provider_directory(parsed_claims.claims);
    const auto visits = derive_visits(parsed_claims.claims);

    StudyFilterConfig filter;
    filter.counties = config.counties;
    filter.require_diabetic = config.require_diabetic;
    filter.individual_only = config.individual_only;
    filter.unknown_patient = config.unknown_patient_policy == "fatal"
                                 ? StudyFilterConfig::UnknownPatientPolicy::fatal
                                 : StudyFilterConfig::UnknownPatientPolicy::reject;
    const auto filtered = study_filter(visits, parsed_patients.patients, directory, filter);

    const fs::path out(config.out_dir);
    write_file(out / "visits.csv", visits_csv(filtered.visits));
    write_file(out / "patients_clean.csv", patients_csv(filtered.patients));
    write_file(out / "provider_directory.csv", directory_csv(directory));
    write_file(out / "rejects_claims.csv", rejects_csv(parsed_claims.rejects));
    write_file(out / "rejects_patients.csv", rejects_csv(parsed_patients.rejects));

    nlohmann::json meta{
        {"claims_accepted", parsed_claims.claims.size()},
        {"claims_rejected", parsed_claims.rejects.size()},
        {"patients_accepted", parsed_patients.patients.size()},
        {"patients_rejected", parsed_patients.rejects.size()},
        {"visits_derived", visits.size()},
        {"visits_retained", filtered.visits.size()},
        {"patients_retained", filtered.patients.size()},
        {"visits_dropped_patient_filter", filtered.visits_dropped_patient},
        {"visits_dropped_provider_filter", filtered.visits_dropped_provider},
        {"visits_unknown_patient", filtered.visits_unknown_patient},
    };
    write_file(out / "ingest_meta.json", json_dump(meta));
}

void run_graph(const RunConfig& config) {
    const auto visits = read_visits(require_artifact(config, "visits.csv", "ingest"));
    const auto directory =
        read_directory(require_artifact(config, "provider_directory.csv", "ingest"));

    const auto unfiltered = shared_patient_counts(visits, directory, config.pcp_set(), config.threads);
    const auto graph =
        apply_thresholds(unfiltered, config.min_patients_per_provider, config.min_edge_weight);

    if (graph.node_count() == 0)
        throw std::runtime_error(
            "empty graph after filtering: provider filter (min_patients_per_provider=" +
            std::to_string(config.min_patients_per_provider) + ") removed every provider");
    if (graph.edge_count() == 0)
        throw std::runtime_error("empty graph after filtering: edge filter (min_edge_weight=" +
                                 std::to_string(config.min_edge_weight) + ") removed every edge");

    const fs::path out(config.out_dir);
    write_file(out / "graph_nodes.csv", write_nodes_csv(graph));
    write_file(out / "graph_edges.csv", write_edges_csv(graph));
}

namespace {

ProviderGraph load_graph(const RunConfig& config) {
    const auto nodes_path = require_artifact(config, "graph_nodes.csv", "graph");
    const auto edges_path = require_artifact(config, "graph_edges.csv", "graph");
    std::ifstream nodes_in(nodes_path, std::ios::binary);
    std::ifstream edges_in(edges_path, std::ios::binary);
    return read_graph_csv(nodes_in, edges_in);
}

PrunedPartition load_pruned(const RunConfig& config, const ProviderGraph& graph) {
    const auto index = read_partition(require_artifact(config, "partition.csv", "detect"));
    PrunedPartition pruned;
    pruned.n_major = index.n_major();
    pruned.major_of.assign(graph.node_count(), kNoCommunity);
    for (std::size_t i = 0; i < graph.node_count(); ++i)
        if (auto community = index.community_of(graph.nodes()[i].npi))
            pruned.major_of[i] = *community;
    return pruned;
}

}  // namespace

void run_detect(const RunConfig& config) {
    const auto graph = load_graph(config);
    const auto partition = fast_greedy(graph);
    const auto pruned = prune_small(partition, static_cast<std::uint32_t>(config.min_community_size));

    if (pruned.n_major == 0) {
        std::uint32_t largest = 0;
        for (std::uint32_t size : partition.community_sizes()) largest = std::max(largest, size);
        throw std::runtime_error("no community reaches min_community_size=" +
                                 std::to_string(config.min_community_size) + " (largest is " +
                                 std::to_string(largest) + " providers)");
    }

    const fs::path out(config.out_dir);
    write_file(out / "partition.csv", partition_csv(graph, pruned));
    write_file(out / "excluded.csv", excluded_csv(graph, pruned));

    nlohmann::json meta{
        {"q", partition.modularity},
        {"n_communities", pruned.n_major},
        {"merge_count", partition.merge_log.size()},
        {"min_size", config.min_community_size},
        {"excluded_summary",
         {{"communities", pruned.excluded.size()},
          {"providers", pruned.excluded_provider_count()},
          {"mean_size", pruned.excluded_mean_size()}}},
    };
    write_file(out / "detect_meta.json", json_dump(meta));
}

void run_assign(const RunConfig& config) {
    const auto visits = read_visits(require_artifact(config, "visits.csv", "ingest"));
    const auto directory =
        read_directory(require_artifact(config, "provider_directory.csv", "ingest"));
    const auto index = read_partition(require_artifact(config, "partition.csv", "detect"));

    const auto assignment = compute_assignment(config, visits, index, directory);
    write_file(fs::path(config.out_dir) / "assignment.csv", assignment_csv(assignment));
}

void run_profile(const RunConfig& config) {
    const auto graph = load_graph(config);
    const auto pruned = load_pruned(config, graph);
    const auto visits = read_visits(require_artifact(config, "visits.csv", "ingest"));
    const auto directory =
        read_directory(require_artifact(config, "provider_directory.csv", "ingest"));
    const auto patients =
        read_patients(require_artifact(config, "patients_clean.csv", "ingest"),
                      months_in_window(config.window_start, config.window_end));
    require_artifact(config, "assignment.csv", "assign");

    const CommunityIndex index(graph, pruned);
    const auto assignment = compute_assignment(config, visits, index, directory);
    const auto profiles = build_profiles(graph, pruned, assignment, visits, patients);

    const fs::path out(config.out_dir);
    write_file(out / "profiles.csv", write_profiles_csv(profiles));

    nlohmann::json list = nlohmann::json::array();
    for (const auto& p : profiles) {
        nlohmann::json counties = nlohmann::json::object();
        for (const auto& [county, share] : p.county_distribution) counties[county] = share;
        list.push_back({{"community_id", p.community},
                        {"n_providers", p.n_providers},
                        {"n_patients", p.n_patients},
                        {"pcp_specialist_ratio", p.pcp_specialist_ratio},
                        {"pct_within_utilization", p.pct_within_utilization},
                        {"pct_within_spend", p.pct_within_spend},
                        {"herfindahl", p.herfindahl},
                        {"pmpm", p.pmpm},
                        {"mean_risk", p.mean_risk},
                        {"risk_adjusted_pmpm", p.risk_adjusted_pmpm},
                        {"county_distribution", counties}});
    }
    write_file(out / "profiles.json", json_dump(nlohmann::json{{"profiles", list}}));
}

void run_trade(const RunConfig& config) {
    const auto visits = read_visits(require_artifact(config, "visits.csv", "ingest"));
    const auto directory =
        read_directory(require_artifact(config, "provider_directory.csv", "ingest"));
    const auto index = read_partition(require_artifact(config, "partition.csv", "detect"));
    require_artifact(config, "assignment.csv", "assign");

    const auto assignment = compute_assignment(config, visits, index, directory);
    const auto matrix =
        trade_counts(visits, assignment, index, directory, config.spend_weighted_trade);
    const auto import_rca = rca(matrix, TradeDirection::imports);
    const auto export_rca = rca(matrix, TradeDirection::exports);
    const auto flows = trade_flow_report(matrix, config.trade_top_k, config.trade_min_share);
    const auto findings =
        self_sufficiency_gaps(matrix, import_rca, config.balance_tolerance, config.gap_top_k);

    const fs::path out(config.out_dir);
    write_file(out / "pair_flows.csv", pair_flows_csv(matrix));
    write_file(out / "rca.csv", write_rca_csv(import_rca, export_rca));
    write_file(out / "flow_edges.csv", write_flow_edges_csv(flows));
    write_file(out / "findings.json", json_dump(findings_json(findings, matrix)));
}

void run_report(const RunConfig& config) {
    const auto graph = load_graph(config);
    const auto pruned = load_pruned(config, graph);
    require_artifact(config, "profiles.csv", "profile");
    require_artifact(config, "rca.csv", "trade");

    const fs::path out(config.out_dir);

    // graph exports carry the community labeling; members of excluded
    // communities are tagged with the sentinel id
    std::vector<std::uint32_t> labels = pruned.major_of;
    for (const auto& format_name : config.export_formats) {
        const auto format = parse_graph_format(format_name);
        if (!format) throw std::runtime_error("unknown export format: " + format_name);
        if (*format == GraphFormat::edge_csv) continue;  // canonical graph_edges.csv already exists
        const std::string content =
            export_graph(graph, *format, labels,
                         static_cast<std::uint32_t>(std::max(config.display_min_weight, 0)));
        const char* extension = *format == GraphFormat::gexf ? "graph.gexf" : "graph.dot";
        write_file(out / extension, content);
    }

    nlohmann::json detect_meta =
        nlohmann::json::parse(read_file(require_artifact(config, "detect_meta.json", "detect")));
    nlohmann::json ingest_meta =
        nlohmann::json::parse(read_file(require_artifact(config, "ingest_meta.json", "ingest")));

    nlohmann::json metadata{
        {"tool", "netleak"},
        {"version", kVersion},
        {"config", config.to_json()},
        {"config_hash", config.config_hash()},
        {"ingest", ingest_meta},
        {"detect", detect_meta},
    };
    write_file(out / "run_metadata.json", json_dump(metadata));
}

RunSummary run_pipeline(const RunConfig& config) {
    config.validate();
    run_ingest(config);
    run_graph(config);
    run_detect(config);
    run_assign(config);
    run_profile(config);
    run_trade(config);
    run_report(config);

    RunSummary summary;
    summary.out_dir = config.out_dir;
    const nlohmann::json detect_meta =
        nlohmann::json::parse(read_file(fs::path(config.out_dir) / "detect_meta.json"));
    const nlohmann::json ingest_meta =
        nlohmann::json::parse(read_file(fs::path(config.out_dir) / "ingest_meta.json"));
    summary.q = detect_meta.at("q").get<double>();
    summary.n_communities = detect_meta.at("n_communities").get<std::uint32_t>();
    summary.n_visits = ingest_meta.at("visits_retained").get<std::size_t>();
    summary.n_patients = ingest_meta.at("patients_retained").get<std::size_t>();

    std::ifstream nodes_in(fs::path(config.out_dir) / "graph_nodes.csv", std::ios::binary);
    csv::Reader reader(nodes_in);
    reader.next();  // header
    while (reader.next()) ++summary.n_providers;
    return summary;
}

}  // namespace netleak

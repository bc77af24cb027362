#include "netleak/claims.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "netleak/csv.hpp"

namespace netleak {

std::string to_string(EntityType t) {
    return t == EntityType::individual ? "individual" : "organization";
}

std::optional<EntityType> parse_entity_type(std::string_view raw) {
    std::string v = to_lower_ascii(trim_copy(raw));
    if (v == "individual" || v == "1") return EntityType::individual;
    if (v == "organization" || v == "2") return EntityType::organization;
    return std::nullopt;
}

namespace {

struct HeaderIndex {
    std::unordered_map<std::string, std::size_t> by_name;

    static HeaderIndex from(const std::vector<std::string>& header) {
        HeaderIndex idx;
        for (std::size_t i = 0; i < header.size(); ++i)
            idx.by_name.emplace(trim_copy(header[i]), i);
        return idx;
    }

    std::size_t require(const std::string& column) const {
        auto it = by_name.find(column);
        if (it == by_name.end())
            throw std::runtime_error("missing required column: " + column);
        return it->second;
    }

    std::optional<std::size_t> optional(const std::string& column) const {
        if (column.empty()) return std::nullopt;
        auto it = by_name.find(column);
        if (it == by_name.end()) return std::nullopt;
        return it->second;
    }
};

std::string field_at(const std::vector<std::string>& row, std::size_t i) {
    return i < row.size() ? row[i] : std::string{};
}

}  // namespace

ClaimsParseResult parse_claims(std::istream& source, const ClaimsParseOptions& options) {
    if (!source.good()) throw std::runtime_error("claims source is not readable");
    csv::Reader reader(source);
    auto header = reader.next();
    if (!header) throw std::runtime_error("claims source is empty (no header row)");

    const auto idx = HeaderIndex::from(*header);
    const auto& cols = options.columns;
    const std::size_t c_patient = idx.require(cols.patient_id);
    const std::size_t c_npi = idx.require(cols.npi);
    const std::size_t c_date = idx.require(cols.service_date);
    const std::size_t c_amount = idx.require(cols.paid_amount);
    const std::size_t c_specialty = idx.require(cols.specialty);
    const auto c_org = idx.optional(cols.org_id);
    const auto c_entity = idx.optional(cols.entity_type);

    ClaimsParseResult result;
    while (auto row = reader.next()) {
        const std::size_t line = reader.line_number();
        auto reject = [&](std::string reason) {
            result.rejects.push_back({line, std::move(reason)});
        };

        ClaimLine claim;
        claim.patient_id = trim_copy(field_at(*row, c_patient));
        if (claim.patient_id.empty()) {
            reject("empty patient_id");
            continue;
        }
        claim.npi = trim_copy(field_at(*row, c_npi));
        if (claim.npi.empty()) {
            reject("empty npi");
            continue;
        }
        auto date = Date::parse(trim_copy(field_at(*row, c_date)));
        if (!date) {
            reject("bad date");
            continue;
        }
        if (*date < options.window_start || options.window_end < *date) {
            reject("date outside window");
            continue;
        }
        claim.service_date = *date;
        auto cents = parse_money_cents(field_at(*row, c_amount));
        if (!cents) {
            reject("bad amount");
            continue;
        }
        if (*cents < 0) {
            reject("negative amount");
            continue;
        }
        claim.paid_cents = *cents;
        auto label = normalize_specialty(field_at(*row, c_specialty));
        if (label.display.empty()) {
            reject("empty specialty");
            continue;
        }
        claim.specialty = std::move(label.display);
        claim.specialty_key = std::move(label.key);
        if (c_org) claim.org_id = trim_copy(field_at(*row, *c_org));
        if (c_entity) {
            auto entity = parse_entity_type(field_at(*row, *c_entity));
            if (!entity) {
                reject("bad entity_type");
                continue;
            }
            claim.entity_type = *entity;
        }
        result.claims.push_back(std::move(claim));
    }
    return result;
}

PatientsParseResult parse_patients(std::istream& source, const PatientsParseOptions& options) {
    if (!source.good()) throw std::runtime_error("patients source is not readable");
    csv::Reader reader(source);
    auto header = reader.next();
    if (!header) throw std::runtime_error("patients source is empty (no header row)");

    const auto idx = HeaderIndex::from(*header);
    const auto& cols = options.columns;
    const std::size_t c_patient = idx.require(cols.patient_id);
    const std::size_t c_county = idx.require(cols.county);
    const std::size_t c_risk = idx.require(cols.risk_score);
    const auto c_months = idx.optional(cols.enrollment_months);
    const auto c_diabetic = idx.optional(cols.diabetic);
    const auto c_comorbid = idx.optional(cols.comorbidities);

    PatientsParseResult result;
    std::unordered_set<std::string> seen;
    while (auto row = reader.next()) {
        const std::size_t line = reader.line_number();
        auto reject = [&](std::string reason) {
            result.rejects.push_back({line, std::move(reason)});
        };

        PatientRecord rec;
        rec.patient_id = trim_copy(field_at(*row, c_patient));
        if (rec.patient_id.empty()) {
            reject("empty patient_id");
            continue;
        }
        if (!seen.insert(rec.patient_id).second) {
            reject("duplicate patient_id");
            continue;
        }
        rec.county = trim_copy(field_at(*row, c_county));
        try {
            rec.risk_score = std::stod(trim_copy(field_at(*row, c_risk)));
        } catch (const std::exception&) {
            reject("bad risk_score");
            continue;
        }
        if (!(rec.risk_score > 0.0)) {
            reject("non-positive risk_score");
            continue;
        }
        rec.enrollment_months = options.window_months;
        if (c_months) {
            std::string raw = trim_copy(field_at(*row, *c_months));
            if (!raw.empty()) {
                try {
                    rec.enrollment_months = std::stoi(raw);
                } catch (const std::exception&) {
                    reject("bad enrollment_months");
                    continue;
                }
                if (rec.enrollment_months < 1 || rec.enrollment_months > options.window_months) {
                    reject("enrollment_months outside window");
                    continue;
                }
            }
        }
        rec.diabetic = true;
        if (c_diabetic) {
            std::string raw = to_lower_ascii(trim_copy(field_at(*row, *c_diabetic)));
            if (raw == "1" || raw == "true") {
                rec.diabetic = true;
            } else if (raw == "0" || raw == "false") {
                rec.diabetic = false;
            } else {
                reject("bad diabetic flag");
                continue;
            }
        }
        if (c_comorbid) {
            std::string raw = field_at(*row, *c_comorbid);
            std::size_t pos = 0;
            while (pos <= raw.size()) {
                std::size_t next = raw.find(';', pos);
                std::string item = trim_copy(raw.substr(pos, next == std::string::npos ? std::string::npos : next - pos));
                if (!item.empty()) rec.comorbidities.push_back(std::move(item));
                if (next == std::string::npos) break;
                pos = next + 1;
            }
            std::sort(rec.comorbidities.begin(), rec.comorbidities.end());
            rec.comorbidities.erase(std::unique(rec.comorbidities.begin(), rec.comorbidities.end()),
                                    rec.comorbidities.end());
        }
        result.patients.push_back(std::move(rec));
    }
    return result;
}

std::vector<Visit> derive_visits(const std::vector<ClaimLine>& claims) {
    std::vector<const ClaimLine*> sorted;
    sorted.reserve(claims.size());
    for (const auto& c : claims) sorted.push_back(&c);
    std::sort(sorted.begin(), sorted.end(), [](const ClaimLine* a, const ClaimLine* b) {
        if (a->patient_id != b->patient_id) return a->patient_id < b->patient_id;
        if (a->npi != b->npi) return a->npi < b->npi;
        return a->service_date < b->service_date;
    });

    std::vector<Visit> visits;
    std::size_t i = 0;
    while (i < sorted.size()) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j]->patient_id == sorted[i]->patient_id &&
               sorted[j]->npi == sorted[i]->npi && sorted[j]->service_date == sorted[i]->service_date)
            ++j;

        Visit v;
        v.patient_id = sorted[i]->patient_id;
        v.npi = sorted[i]->npi;
        v.service_date = sorted[i]->service_date;
        // specialty of the highest-amount constituent line, lexicographic tie-break
        const ClaimLine* pick = sorted[i];
        for (std::size_t k = i; k < j; ++k) {
            const ClaimLine* line = sorted[k];
            v.paid_cents += line->paid_cents;
            if (line->paid_cents > pick->paid_cents ||
                (line->paid_cents == pick->paid_cents &&
                 std::tie(line->specialty_key, line->specialty) <
                     std::tie(pick->specialty_key, pick->specialty)))
                pick = line;
        }
        v.specialty = pick->specialty;
        v.specialty_key = pick->specialty_key;
        visits.push_back(std::move(v));
        i = j;
    }
    return visits;
}

std::vector<ProviderInfo> build_provider_directory(const std::vector<ClaimLine>& claims) {
    struct Agg {
        std::map<std::pair<std::string, std::string>, std::int64_t> paid_by_specialty;  // (key, display)
        std::map<std::string, std::size_t> org_counts;
        std::size_t individual_lines = 0;
        std::size_t organization_lines = 0;
    };
    std::map<std::string, Agg> by_npi;
    for (const auto& c : claims) {
        Agg& agg = by_npi[c.npi];
        agg.paid_by_specialty[{c.specialty_key, c.specialty}] += c.paid_cents;
        if (!c.org_id.empty()) ++agg.org_counts[c.org_id];
        if (c.entity_type == EntityType::individual)
            ++agg.individual_lines;
        else
            ++agg.organization_lines;
    }

    std::vector<ProviderInfo> directory;
    directory.reserve(by_npi.size());
    for (const auto& [npi, agg] : by_npi) {
        ProviderInfo info;
        info.npi = npi;
        std::int64_t best_paid = -1;
        for (const auto& [label, paid] : agg.paid_by_specialty) {
            if (paid > best_paid) {
                best_paid = paid;
                info.specialty_key = label.first;
                info.specialty = label.second;
            }
        }
        std::size_t best_count = 0;
        for (const auto& [org, count] : agg.org_counts) {
            if (count > best_count) {
                best_count = count;
                info.org_id = org;
            }
        }
        info.entity_type = agg.organization_lines > agg.individual_lines
                               ? EntityType::organization
                               : EntityType::individual;
        directory.push_back(std::move(info));
    }
    return directory;
}

const ProviderInfo* find_provider(const std::vector<ProviderInfo>& directory, std::string_view npi) {
    auto it = std::lower_bound(directory.begin(), directory.end(), npi,
                               [](const ProviderInfo& p, std::string_view key) { return p.npi < key; });
    if (it == directory.end() || it->npi != npi) return nullptr;
    return &*it;
}

StudyFilterResult study_filter(const std::vector<Visit>& visits,
                               const std::vector<PatientRecord>& patients,
                               const std::vector<ProviderInfo>& directory,
                               const StudyFilterConfig& config) {
    std::unordered_set<std::string> county_set(config.counties.begin(), config.counties.end());

    StudyFilterResult result;
    std::unordered_map<std::string, const PatientRecord*> retained;
    for (const auto& p : patients) {
        if (!county_set.empty() && !county_set.contains(p.county)) continue;
        if (config.require_diabetic && !p.diabetic) continue;
        result.patients.push_back(p);
        retained.emplace(p.patient_id, &p);
    }

    std::unordered_map<std::string, const PatientRecord*> known;
    for (const auto& p : patients) known.emplace(p.patient_id, &p);

    for (const auto& v : visits) {
        if (!known.contains(v.patient_id)) {
            if (config.unknown_patient == StudyFilterConfig::UnknownPatientPolicy::fatal)
                throw std::runtime_error("visit references unknown patient: " + v.patient_id);
            ++result.visits_unknown_patient;
            continue;
        }
        if (!retained.contains(v.patient_id)) {
            ++result.visits_dropped_patient;
            continue;
        }
        if (config.individual_only) {
            const ProviderInfo* provider = find_provider(directory, v.npi);
            if (provider == nullptr || provider->entity_type != EntityType::individual) {
                ++result.visits_dropped_provider;
                continue;
            }
        }
        result.visits.push_back(v);
    }
    return result;
}

}  // namespace netleak

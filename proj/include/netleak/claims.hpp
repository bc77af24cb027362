#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "netleak/common.hpp"

namespace netleak {

enum class EntityType { individual, organization };

std::string to_string(EntityType t);
std::optional<EntityType> parse_entity_type(std::string_view raw);

/// One row of the claims extract. A provider visit usually spans several
/// of these; derive_visits() collapses them.
struct ClaimLine {
    std::string patient_id;
    std::string npi;
    Date service_date;
    std::int64_t paid_cents = 0;
    std::string specialty;      // display form
    std::string specialty_key;  // case-folded matching key
    std::string org_id;         // billing tax code affiliation; may be empty
    EntityType entity_type = EntityType::individual;
};

struct PatientRecord {
    std::string patient_id;
    std::string county;
    double risk_score = 0.0;
    int enrollment_months = 0;
    bool diabetic = false;
    std::vector<std::string> comorbidities;
};

/// Deduplicated visit: unique on (patient_id, npi, service_date),
/// paid_cents summed over the merged claim lines.
struct Visit {
    std::string patient_id;
    std::string npi;
    Date service_date;
    std::int64_t paid_cents = 0;
    std::string specialty;
    std::string specialty_key;
};

struct RejectedRow {
    std::size_t row;  // 1-based physical line number in the source
    std::string reason;
};

/// Maps logical fields to column headers; empty string marks an optional
/// column as absent from the file.
struct ClaimsColumnMap {
    std::string patient_id = "patient_id";
    std::string npi = "npi";
    std::string service_date = "service_date";
    std::string paid_amount = "paid_amount";
    std::string specialty = "specialty";
    std::string org_id = "org_id";          // optional
    std::string entity_type = "entity_type";  // optional
};

struct ClaimsParseOptions {
    ClaimsColumnMap columns;
    Date window_start{2014, 1, 1};
    Date window_end{2014, 12, 31};
};

struct ClaimsParseResult {
    std::vector<ClaimLine> claims;
    std::vector<RejectedRow> rejects;
};

/// Parses the claims CSV. Malformed rows become rejects; a missing
/// required column or unreadable source throws std::runtime_error.
ClaimsParseResult parse_claims(std::istream& source, const ClaimsParseOptions& options);

struct PatientsColumnMap {
    std::string patient_id = "patient_id";
    std::string county = "county";
    std::string risk_score = "risk_score";
    std::string enrollment_months = "enrollment_months";  // optional
    std::string diabetic = "diabetic";                    // optional
    std::string comorbidities = "comorbidities";          // optional
};

struct PatientsParseOptions {
    PatientsColumnMap columns;
    int window_months = 12;  // default for absent enrollment_months
};

struct PatientsParseResult {
    std::vector<PatientRecord> patients;
    std::vector<RejectedRow> rejects;
};

PatientsParseResult parse_patients(std::istream& source, const PatientsParseOptions& options);

/// One Visit per distinct (patient_id, npi, service_date); amounts summed.
/// Visit specialty comes from the highest-amount line, ties broken
/// lexicographically. Output is sorted by (patient_id, npi, date).
std::vector<Visit> derive_visits(const std::vector<ClaimLine>& claims);

/// Per-provider attributes aggregated over claim lines: specialty by
/// highest total paid, org by most frequent non-empty value, entity by
/// majority. Sorted by npi.
struct ProviderInfo {
    std::string npi;
    std::string specialty;
    std::string specialty_key;
    std::string org_id;
    EntityType entity_type = EntityType::individual;
};

std::vector<ProviderInfo> build_provider_directory(const std::vector<ClaimLine>& claims);

struct StudyFilterConfig {
    std::vector<std::string> counties;  // empty keeps every county
    bool require_diabetic = true;
    bool individual_only = true;
    enum class UnknownPatientPolicy { reject, fatal };
    UnknownPatientPolicy unknown_patient = UnknownPatientPolicy::reject;
};

struct StudyFilterResult {
    std::vector<Visit> visits;
    std::vector<PatientRecord> patients;
    std::size_t visits_dropped_patient = 0;   // patient filtered out
    std::size_t visits_dropped_provider = 0;  // entity-type filter
    std::size_t visits_unknown_patient = 0;   // no matching patient record
};

/// Applies the study-population filters. Retained visits always belong to
/// retained patients; under individual_only only individual-entity
/// providers keep their visits.
StudyFilterResult study_filter(const std::vector<Visit>& visits,
                               const std::vector<PatientRecord>& patients,
                               const std::vector<ProviderInfo>& directory,
                               const StudyFilterConfig& config);

const ProviderInfo* find_provider(const std::vector<ProviderInfo>& directory, std::string_view npi);

}  // namespace netleak

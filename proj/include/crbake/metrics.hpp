#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "crbake/model.hpp"

namespace crbake {

enum class NumericFamily { None, Integer, Float };

/// A data-type spelling reduced to one canonical form. Prefixed names and
/// both schema.org URI schemes collapse to the same canonical URI; spellings
/// outside the vocabulary are preserved verbatim with family None.
struct NormalizedType {
    std::string canonical;
    NumericFamily family = NumericFamily::None;
};

NormalizedType normalize_type(std::string_view raw);

bool operator==(const NormalizedType& a, const NormalizedType& b);

struct Disagreement {
    std::string record_set;
    std::string field;
    std::string generated_type;  // canonical
    std::string reference_type;  // canonical
    bool same_family = false;
};

/// Field-level agreement between a generated and a reference document.
/// Ratios are absent ("n/a") when their denominator is zero.
struct ComparisonReport {
    std::size_t matched_fields = 0;
    std::size_t generated_fields = 0;
    std::size_t reference_fields = 0;
    std::size_t strict_matches = 0;
    std::size_t semantic_matches = 0;
    std::size_t matched_record_sets = 0;
    std::size_t reference_record_sets = 0;
    std::optional<double> field_recovery;
    std::optional<double> strict_agreement;
    std::optional<double> semantic_agreement;
    std::optional<double> recordset_recovery;
    std::vector<Disagreement> disagreements;  // strict mismatches over the match set
    std::vector<std::pair<std::string, std::string>> unmatched_reference;
    std::vector<std::pair<std::string, std::string>> unmatched_generated;
};

/// Matches fields by (record set name, field name) and scores type
/// agreement over the matched set. Pure; order-insensitive.
ComparisonReport compare_documents(const CroissantDocument& generated,
                                   const CroissantDocument& reference);

struct PackagingViolation {
    std::string code;  // missing-file | size-mismatch | checksum-mismatch | schema-drift
    std::string path;  // file path or record set locus
    std::string message;
};

/// Checks every FileObject against the directory (existence, size, digest)
/// and re-extracts the directory's schema to detect drifted field names.
/// A missing file whose digest reappears under another name is reported as
/// schema drift (a rename), not as a missing file.
std::vector<PackagingViolation> verify_packaging(const CroissantDocument& document,
                                                 const std::filesystem::path& root);

struct FieldTypeChange {
    std::string record_set;
    std::string field;
    std::string type_a;  // canonical
    std::string type_b;
};

struct SchemaDiff {
    std::vector<std::string> record_sets_only_in_a;
    std::vector<std::string> record_sets_only_in_b;
    std::vector<std::pair<std::string, std::string>> fields_only_in_a;
    std::vector<std::pair<std::string, std::string>> fields_only_in_b;
    std::vector<FieldTypeChange> type_changes;

    bool empty() const {
        return record_sets_only_in_a.empty() && record_sets_only_in_b.empty() &&
               fields_only_in_a.empty() && fields_only_in_b.empty() && type_changes.empty();
    }
};

/// Set diff over record set names, shared-record-set field names, and
/// normalized types of shared fields.
SchemaDiff schema_diff(const CroissantDocument& a, const CroissantDocument& b);

}  // namespace crbake

#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "crbake/datatype.hpp"

namespace crbake {

using ordered_json = nlohmann::ordered_json;

inline constexpr std::string_view kCroissant11Uri = "http://mlcommons.org/croissant/1.1";
inline constexpr std::string_view kRai10Uri = "http://mlcommons.org/croissant/RAI/1.0";

/// Responsible-AI attributes, serialized under the `rai:` prefix verbatim.
struct RaiMetadata {
    std::string data_use_cases;
    std::string data_limitations;
    std::string personal_sensitive_information;
    /// Additional rai attribute keys, passed through untouched.
    std::vector<std::pair<std::string, std::string>> extra;

    bool empty() const {
        return data_use_cases.empty() && data_limitations.empty() &&
               personal_sensitive_information.empty() && extra.empty();
    }
};

/// Dataset-level semantics. Every value here comes from an explicit user
/// input, never from file contents.
struct SemanticMetadata {
    std::string name;  // required
    std::string description;
    std::string license;
    std::string citation;
    std::vector<std::string> creators;
    std::string publisher;
    std::string version;
    std::string date_published;
    std::string url;
    std::vector<std::string> same_as;
    std::vector<std::string> alternate_names;
    std::string temporal_coverage;
    std::string usage_info;
    RaiMetadata rai;
};

struct FileObjectDesc {
    std::string id;            // e.g. "file_13"
    std::string name;          // filename
    std::string content_url;   // relative, '/'-separated
    std::string content_size;  // byte count as decimal string
    std::string encoding_format;
    std::string sha256;  // 64 lowercase hex chars
};

struct FileSetDesc {
    std::string id;
    std::string name;
    std::string encoding_format;
    std::vector<std::string> includes;  // glob patterns / exact relative paths
};

/// Where a field's values come from: a distribution entry plus an extract
/// locator (a column name, or a '.'-joined path for nested records).
struct SourceRef {
    std::string reference_id;
    bool is_file_set = false;
    std::string column;     // tabular-style locator
    std::string json_path;  // nested-record locator; segments join with '.'
};

struct FieldDesc {
    std::string id;  // "{file_id}_{field_name}", sanitized
    std::string name;
    std::string description;
    DataType data_type = DataType::Text;
    /// Set by parse_jsonld when the primary dataType spelling is outside the
    /// vocabulary; validate_document reports it.
    std::string unknown_data_type;
    SourceRef source;
    std::vector<std::string> equivalent_property;
    std::vector<std::string> extra_data_types;
};

struct RecordSetDesc {
    std::string id;  // e.g. "recordset_13"
    std::string name;
    std::string description;  // carries row counts and handler annotations
    std::vector<FieldDesc> fields;
};

using DistributionEntry = std::variant<FileObjectDesc, FileSetDesc>;

/// The complete in-memory metadata document.
struct CroissantDocument {
    ordered_json context = canonical_context();
    std::vector<std::string> conforms_to = {std::string(kCroissant11Uri)};
    SemanticMetadata semantic;
    std::vector<DistributionEntry> distribution;
    std::vector<RecordSetDesc> record_sets;

    static ordered_json canonical_context();
};

struct Violation {
    std::string id;    // offending @id (or dataset-level marker)
    std::string code;  // stable rule code
    std::string message;
};

/// Copies CLI-supplied semantics onto a structural skeleton. Appends the
/// RAI conformsTo URI iff any RAI attribute is present.
/// Throws std::invalid_argument when the required name is missing.
CroissantDocument merge_semantic(CroissantDocument skeleton, const SemanticMetadata& semantic);

/// Structural validation: context shape, conformsTo, id uniqueness,
/// reference resolution, type vocabulary, field-name uniqueness, contentUrl
/// and sha256 form. Empty result means the document is valid.
std::vector<Violation> validate_document(const CroissantDocument& document);

/// UTF-8 JSON-LD with a fixed key order and a trailing newline. Two
/// serializations of equal documents are byte-identical.
std::string serialize_jsonld(const CroissantDocument& document);
ordered_json to_jsonld(const CroissantDocument& document);

/// Tolerant loader for documents produced by this tool or by third parties:
/// accepts full-URI or prefixed dataType spellings, FileSet distributions,
/// and subField nesting (flattened on load with '.'-joined names).
/// Throws std::runtime_error on structurally unusable input.
CroissantDocument parse_jsonld(const ordered_json& json);
CroissantDocument parse_jsonld_file(const std::string& path);

}  // namespace crbake

#include "crbake/metrics.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "crbake/datatype.hpp"
#include "crbake/discovery.hpp"
#include "crbake/pipeline.hpp"

namespace crbake {

namespace {

NumericFamily family_of(DataType t) {
    switch (t) {
        case DataType::Integer:
        case DataType::Int8:
        case DataType::Int16:
        case DataType::Int32:
        case DataType::Int64:
        case DataType::UInt8:
        case DataType::UInt16:
        case DataType::UInt32:
        case DataType::UInt64:
            return NumericFamily::Integer;
        case DataType::Float:
        case DataType::Float16:
        case DataType::Float32:
        case DataType::Float64:
            return NumericFamily::Float;
        default:
            return NumericFamily::None;
    }
}

std::string field_type_spelling(const FieldDesc& field) {
    if (!field.unknown_data_type.empty()) return field.unknown_data_type;
    return std::string(datatype_name(field.data_type));
}

using FieldKey = std::pair<std::string, std::string>;  // (record set name, field name)

std::map<FieldKey, NormalizedType> field_table(const CroissantDocument& doc) {
    std::map<FieldKey, NormalizedType> table;
    for (const auto& rs : doc.record_sets) {
        for (const auto& field : rs.fields) {
            table.emplace(FieldKey{rs.name, field.name}, normalize_type(field_type_spelling(field)));
        }
    }
    return table;
}

std::set<std::string> record_set_names(const CroissantDocument& doc) {
    std::set<std::string> names;
    for (const auto& rs : doc.record_sets) names.insert(rs.name);
    return names;
}

}  // namespace

bool operator==(const NormalizedType& a, const NormalizedType& b) {
    return a.canonical == b.canonical;
}

NormalizedType normalize_type(std::string_view raw) {
    NormalizedType out;
    if (auto parsed = parse_datatype(raw)) {
        out.canonical = datatype_uri(*parsed);
        out.family = family_of(*parsed);
        return out;
    }
    out.canonical = std::string(raw);
    return out;
}

ComparisonReport compare_documents(const CroissantDocument& generated,
                                   const CroissantDocument& reference) {
    ComparisonReport report;
    auto gen = field_table(generated);
    auto ref = field_table(reference);
    report.generated_fields = gen.size();
    report.reference_fields = ref.size();

    for (const auto& [key, ref_type] : ref) {
        auto it = gen.find(key);
        if (it == gen.end()) {
            report.unmatched_reference.push_back(key);
            continue;
        }
        ++report.matched_fields;
        const NormalizedType& gen_type = it->second;
        bool strict = gen_type == ref_type;
        bool same_family =
            gen_type.family == ref_type.family && gen_type.family != NumericFamily::None;
        if (strict) {
            ++report.strict_matches;
            ++report.semantic_matches;
        } else {
            if (same_family) ++report.semantic_matches;
            report.disagreements.push_back(
                {key.first, key.second, gen_type.canonical, ref_type.canonical, same_family});
        }
    }
    for (const auto& [key, type] : gen) {
        if (!ref.count(key)) report.unmatched_generated.push_back(key);
    }

    auto ref_names = record_set_names(reference);
    auto gen_names = record_set_names(generated);
    report.reference_record_sets = ref_names.size();
    for (const auto& name : ref_names) {
        if (gen_names.count(name)) ++report.matched_record_sets;
    }

    if (report.reference_fields > 0) {
        report.field_recovery = double(report.matched_fields) / double(report.reference_fields);
    }
    if (report.matched_fields > 0) {
        report.strict_agreement = double(report.strict_matches) / double(report.matched_fields);
        report.semantic_agreement = double(report.semantic_matches) / double(report.matched_fields);
    }
    if (report.reference_record_sets > 0) {
        report.recordset_recovery =
            double(report.matched_record_sets) / double(report.reference_record_sets);
    }
    return report;
}

namespace {

std::vector<std::string> record_sets_sourcing(const CroissantDocument& doc,
                                              const std::string& file_id) {
    std::vector<std::string> names;
    for (const auto& rs : doc.record_sets) {
        bool hits = std::any_of(rs.fields.begin(), rs.fields.end(), [&](const FieldDesc& f) {
            return !f.source.is_file_set && f.source.reference_id == file_id;
        });
        if (hits) names.push_back(rs.name);
    }
    return names;
}

std::string join_names(const std::vector<std::string>& names) {
    std::string out;
    for (const auto& name : names) {
        if (!out.empty()) out += ", ";
        out += "'" + name + "'";
    }
    return out;
}

}  // namespace

std::vector<PackagingViolation> verify_packaging(const CroissantDocument& document,
                                                 const std::filesystem::path& root) {
    std::vector<PackagingViolation> violations;
    WarningSink scratch;
    auto disk = discover_files(root, scratch);
    std::map<std::string, const DiscoveredFile*> by_path;
    for (const auto& file : disk) by_path.emplace(file.relative_path, &file);

    std::set<std::string> referenced;
    for (const auto& entry : document.distribution) {
        if (const auto* fo = std::get_if<FileObjectDesc>(&entry)) referenced.insert(fo->content_url);
    }

    for (const auto& entry : document.distribution) {
        const auto* fo = std::get_if<FileObjectDesc>(&entry);
        if (!fo) continue;
        auto it = by_path.find(fo->content_url);
        if (it == by_path.end()) {
            // A digest match under an unreferenced path is a rename, which
            // changes the schema contract rather than losing data.
            const DiscoveredFile* renamed = nullptr;
            if (!fo->sha256.empty()) {
                for (const auto& file : disk) {
                    if (file.sha256 == fo->sha256 && !referenced.count(file.relative_path)) {
                        renamed = &file;
                        break;
                    }
                }
            }
            if (renamed) {
                auto affected = record_sets_sourcing(document, fo->id);
                std::string message = "file renamed to '" + renamed->relative_path + "'";
                if (!affected.empty()) message += "; affects record set " + join_names(affected);
                violations.push_back({"schema-drift", fo->content_url, std::move(message)});
            } else {
                violations.push_back({"missing-file", fo->content_url, "referenced file missing"});
            }
            continue;
        }
        const DiscoveredFile& actual = *it->second;
        if (!fo->content_size.empty() && fo->content_size != std::to_string(actual.byte_size)) {
            violations.push_back({"size-mismatch", fo->content_url,
                                  "contentSize " + fo->content_size + " but found " +
                                      std::to_string(actual.byte_size)});
            continue;
        }
        if (!fo->sha256.empty() && fo->sha256 != actual.sha256) {
            violations.push_back({"checksum-mismatch", fo->content_url,
                                  "sha256 " + fo->sha256 + " but found " + actual.sha256});
        }
    }

    // Field-name drift: re-extract the directory and require every field the
    // document declares to reappear under the same record set name. Record
    // sets absent from the re-extraction are skipped; the file-level checks
    // above already explain them.
    std::map<std::string, std::set<std::string>> rebaked;
    try {
        SemanticMetadata semantic;
        semantic.name = "verification";
        BakeResult fresh = run_pipeline(root, semantic, BakeOptions{});
        for (const auto& rs : fresh.document.record_sets) {
            auto& fields = rebaked[rs.name];
            for (const auto& field : rs.fields) fields.insert(field.name);
        }
    } catch (const NoSupportedFilesError&) {
    }
    for (const auto& rs : document.record_sets) {
        auto it = rebaked.find(rs.name);
        if (it == rebaked.end()) continue;
        for (const auto& field : rs.fields) {
            if (!it->second.count(field.name)) {
                violations.push_back({"schema-drift", rs.name,
                                      "field '" + field.name +
                                          "' missing from re-extraction of record set '" + rs.name +
                                          "'"});
            }
        }
    }
    return violations;
}

SchemaDiff schema_diff(const CroissantDocument& a, const CroissantDocument& b) {
    SchemaDiff diff;
    auto table_a = field_table(a);
    auto table_b = field_table(b);
    auto names_a = record_set_names(a);
    auto names_b = record_set_names(b);

    for (const auto& name : names_a) {
        if (!names_b.count(name)) diff.record_sets_only_in_a.push_back(name);
    }
    for (const auto& name : names_b) {
        if (!names_a.count(name)) diff.record_sets_only_in_b.push_back(name);
    }

    std::set<std::string> shared;
    for (const auto& name : names_a) {
        if (names_b.count(name)) shared.insert(name);
    }
    for (const auto& [key, type_a] : table_a) {
        if (!shared.count(key.first)) continue;
        auto it = table_b.find(key);
        if (it == table_b.end()) {
            diff.fields_only_in_a.push_back(key);
        } else if (!(type_a == it->second)) {
            diff.type_changes.push_back({key.first, key.second, type_a.canonical, it->second.canonical});
        }
    }
    for (const auto& [key, type_b] : table_b) {
        if (!shared.count(key.first)) continue;
        if (!table_a.count(key)) diff.fields_only_in_b.push_back(key);
    }
    return diff;
}

}  // namespace crbake

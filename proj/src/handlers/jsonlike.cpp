#include "crbake/jsonlike.hpp"

#include <algorithm>
#include <regex>

#include "crbake/handlers.hpp"

namespace crbake {

using nlohmann::ordered_json;

namespace {

std::string_view ltrim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r' ||
                          s.front() == '\n'))
        s.remove_prefix(1);
    return s;
}

std::string resource_type_of(const ordered_json& value) {
    if (value.is_object() && value.contains("resourceType") && value.at("resourceType").is_string()) {
        return value.at("resourceType").get<std::string>();
    }
    return {};
}

std::string sniff_resource_type(std::string_view window) {
    static const std::regex pattern("\"resourceType\"\\s*:\\s*\"([^\"]+)\"");
    std::cmatch match;
    if (std::regex_search(window.data(), window.data() + window.size(), match, pattern)) {
        return match[1].str();
    }
    return {};
}

ValueClass classify_json_scalar(const ordered_json& value) {
    if (value.is_null()) return ValueClass::Null;
    if (value.is_boolean()) return ValueClass::Bool;
    if (value.is_number_integer() || value.is_number_unsigned()) return ValueClass::Int;
    if (value.is_number_float()) return ValueClass::Float;
    if (value.is_string()) return classify_value(value.get_ref<const std::string&>());
    return ValueClass::Text;
}

void note_leaf(NestedSchema& out, const std::string& path, ValueClass cls) {
    auto it = out.leaves.find(path);
    if (it == out.leaves.end()) {
        out.order.push_back(path);
        it = out.leaves.emplace(path, TypeLatticeState{}).first;
    }
    it->second = join_types(it->second, cls);
}

}  // namespace

void expand_nested(const ordered_json& record, const std::string& prefix, int depth,
                   NestedSchema& out) {
    if (depth > kMaxNestingDepth) {
        out.depth_truncated = true;
        return;
    }
    if (record.is_object()) {
        if (!prefix.empty()) out.internal.insert(prefix);
        for (auto it = record.begin(); it != record.end(); ++it) {
            std::string path = prefix.empty() ? it.key() : prefix + "." + it.key();
            expand_nested(it.value(), path, depth + 1, out);
        }
        return;
    }
    if (record.is_array()) {
        for (const auto& element : record) {
            if (element.is_object() || element.is_array()) {
                expand_nested(element, prefix, depth + 1, out);
            } else {
                note_leaf(out, prefix.empty() ? "value" : prefix, classify_json_scalar(element));
            }
        }
        return;
    }
    note_leaf(out, prefix.empty() ? "value" : prefix, classify_json_scalar(record));
}

DataType resolve_leaf(const NestedSchema& schema, const std::string& path) {
    if (schema.internal.count(path)) return DataType::Text;
    auto it = schema.leaves.find(path);
    return it == schema.leaves.end() ? DataType::Text : resolve_column(it->second);
}

JsonShape sniff_shape(std::string_view prefix) {
    std::string_view text = ltrim(prefix);
    if (text.empty()) return JsonShape::Unparseable;
    if (text.front() == '[') return JsonShape::ArrayOfObjects;
    if (text.front() != '{') return JsonShape::Unparseable;

    auto newline = text.find('\n');
    std::string_view first_line = newline == std::string_view::npos ? text : text.substr(0, newline);
    std::string_view rest = newline == std::string_view::npos
                                ? std::string_view()
                                : ltrim(text.substr(newline + 1));
    ordered_json first = ordered_json::parse(first_line, nullptr, false);
    if (!first.is_discarded() && first.is_object()) {
        std::string rt = resource_type_of(first);
        if (!rest.empty()) {
            return rt.empty() ? JsonShape::JsonLines : JsonShape::FhirNdjson;
        }
        if (rt == "Bundle") return JsonShape::FhirBundle;
        if (!rt.empty()) return JsonShape::FhirSingleResource;
        return JsonShape::SingleObject;
    }
    // Multi-line document (or a record longer than the window).
    std::string rt = sniff_resource_type(text);
    if (rt == "Bundle") return JsonShape::FhirBundle;
    if (!rt.empty()) return JsonShape::FhirSingleResource;
    return JsonShape::SingleObject;
}

namespace {

std::string filename_of(const std::string& path) {
    auto slash = path.rfind('/');
    return slash == std::string::npos ? path : path.substr(slash + 1);
}

void schema_to_fields(const NestedSchema& schema, PendingRecordSet& rs) {
    for (const auto& path : schema.order) {
        PendingField field;
        field.name = path;
        field.data_type = resolve_leaf(schema, path);
        field.json_path = path;
        rs.fields.push_back(std::move(field));
    }
}

// Reads non-empty lines, parsing the first `budget` as JSON records into
// the schema; returns the total non-empty line count.
std::uint64_t scan_lines(std::istream& in, std::size_t budget, NestedSchema& schema,
                         const std::string& path, const std::string& expect_type,
                         WarningSink& warnings) {
    std::uint64_t lines = 0;
    std::string line;
    bool type_warned = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        bool blank = line.find_first_not_of(" \t") == std::string::npos;
        if (blank) continue;
        ++lines;
        if (lines > budget) continue;
        ordered_json record = ordered_json::parse(line, nullptr, false);
        if (record.is_discarded()) {
            warn(warnings, path, "line " + std::to_string(lines) + " is not valid JSON; ignored");
            continue;
        }
        if (!expect_type.empty()) {
            std::string rt = resource_type_of(record);
            if (rt != expect_type) {
                if (!type_warned) {
                    warn(warnings, path,
                         "line " + std::to_string(lines) + " has resourceType '" + rt +
                             "', expected '" + expect_type + "'; line skipped");
                    type_warned = true;
                }
                continue;
            }
        }
        expand_nested(record, "", 0, schema);
    }
    return lines;
}

void warn_if_truncated(const NestedSchema& schema, const std::string& path,
                       WarningSink& warnings) {
    if (schema.depth_truncated) {
        warn(warnings, path,
             "nesting deeper than " + std::to_string(kMaxNestingDepth) + " levels truncated");
    }
}

class JsonHandler final : public FormatHandler {
public:
    JsonHandler() {
        descriptor_.name = "json";
        descriptor_.extension_patterns = {".json", ".jsonl", ".ndjson"};
        descriptor_.priority = 1;
    }

    const HandlerDescriptor& descriptor() const override { return descriptor_; }

    ExtractionResult extract(const std::filesystem::path& root,
                             const std::vector<DiscoveredFile>& files, const BakeOptions& options,
                             WarningSink& warnings) const override {
        ExtractionResult result;
        for (const auto& file : files) {
            try {
                extract_one(root, file, options, result, warnings);
            } catch (const std::exception& e) {
                warn(warnings, file.relative_path, std::string("unreadable: ") + e.what());
            }
        }
        return result;
    }

private:
    void extract_one(const std::filesystem::path& root, const DiscoveredFile& file,
                     const BakeOptions& options, ExtractionResult& result,
                     WarningSink& warnings) const {
        std::string window = logical_prefix(root / file.relative_path, kSniffWindowBytes);
        JsonShape shape = sniff_shape(window);
        auto in = open_decompressed(root / file.relative_path);
        if (!in) {
            warn(warnings, file.relative_path, "cannot open file; skipped");
            return;
        }

        NestedSchema schema;
        std::uint64_t rows = 0;
        std::string kind;
        switch (shape) {
            case JsonShape::ArrayOfObjects: {
                ordered_json doc = ordered_json::parse(*in, nullptr, false);
                if (doc.is_discarded() || !doc.is_array()) {
                    warn(warnings, file.relative_path, "malformed JSON array; skipped");
                    return;
                }
                rows = doc.size();
                std::size_t budget = std::min<std::size_t>(doc.size(), options.json_sample_budget);
                for (std::size_t i = 0; i < budget; ++i) expand_nested(doc[i], "", 0, schema);
                kind = "json array";
                break;
            }
            case JsonShape::JsonLines: {
                rows = scan_lines(*in, options.json_sample_budget, schema, file.relative_path, "",
                                  warnings);
                kind = "json lines";
                break;
            }
            case JsonShape::SingleObject:
            default: {
                ordered_json doc = ordered_json::parse(*in, nullptr, false);
                if (doc.is_discarded()) {
                    // A one-record window over a multi-record file sniffs as
                    // a document; fall back to line records.
                    in = open_decompressed(root / file.relative_path);
                    if (!in) {
                        warn(warnings, file.relative_path, "cannot open file; skipped");
                        return;
                    }
                    rows = scan_lines(*in, options.json_sample_budget, schema, file.relative_path,
                                      "", warnings);
                    if (rows == 0) {
                        warn(warnings, file.relative_path, "malformed JSON; skipped");
                        return;
                    }
                    kind = "json lines";
                    break;
                }
                rows = 1;
                expand_nested(doc, "", 0, schema);
                kind = "json object";
                break;
            }
        }
        if (schema.order.empty() && rows == 0) {
            warn(warnings, file.relative_path, "no records found; skipped");
            return;
        }
        warn_if_truncated(schema, file.relative_path, warnings);

        result.file_objects.push_back({file.relative_path, ""});
        PendingRecordSet rs;
        rs.name = record_set_stem(filename_of(file.relative_path));
        rs.primary_path = file.relative_path;
        rs.description = kind + "; rows=" + std::to_string(rows);
        schema_to_fields(schema, rs);
        result.record_sets.push_back(std::move(rs));
    }

    HandlerDescriptor descriptor_;
};

class FhirHandler final : public FormatHandler {
public:
    FhirHandler() {
        descriptor_.name = "fhir";
        descriptor_.extension_patterns = {".json", ".jsonl", ".ndjson"};
        descriptor_.priority = 0;
        descriptor_.sniff = [](const SniffWindow& window) {
            JsonShape shape = sniff_shape(window.logical);
            return shape == JsonShape::FhirNdjson || shape == JsonShape::FhirBundle ||
                   shape == JsonShape::FhirSingleResource;
        };
    }

    const HandlerDescriptor& descriptor() const override { return descriptor_; }

    ExtractionResult extract(const std::filesystem::path& root,
                             const std::vector<DiscoveredFile>& files, const BakeOptions& options,
                             WarningSink& warnings) const override {
        ExtractionResult result;

        // Insertion order tracks first appearance so output is stable.
        std::vector<std::string> chunk_type_order;
        std::map<std::string, TypeGroup> chunk_types;
        std::vector<std::string> bundle_type_order;
        std::map<std::string, TypeGroup> bundle_types;
        std::vector<std::string> bundle_paths;

        for (const auto& file : files) {
            std::string window = logical_prefix(root / file.relative_path, kSniffWindowBytes);
            JsonShape shape = sniff_shape(window);
            try {
                switch (shape) {
                    case JsonShape::FhirBundle:
                        extract_bundle(root, file, bundle_type_order, bundle_types, bundle_paths,
                                       result, warnings);
                        break;
                    case JsonShape::FhirSingleResource:
                        extract_single(root, file, options, chunk_type_order, chunk_types, result,
                                       warnings);
                        break;
                    case JsonShape::FhirNdjson:
                    default:
                        extract_chunk(root, file, options, chunk_type_order, chunk_types, result,
                                      warnings);
                        break;
                }
            } catch (const std::exception& e) {
                warn(warnings, file.relative_path, std::string("unreadable: ") + e.what());
            }
        }

        for (const auto& type : chunk_type_order) {
            TypeGroup& group = chunk_types[type];
            if (group.chunk_paths.empty()) continue;
            warn_if_truncated(group.schema, group.chunk_paths.front(), warnings);
            PendingRecordSet rs;
            rs.name = type;
            rs.primary_path = group.chunk_paths.front();
            rs.description = "fhir " + type + "; files=" + std::to_string(group.chunk_paths.size()) +
                             "; rows=" + std::to_string(group.rows);
            schema_to_fields(group.schema, rs);
            result.record_sets.push_back(std::move(rs));
        }

        if (!bundle_paths.empty()) {
            PendingFileSet set;
            set.name = "bundles";
            set.encoding_format = "application/json";
            std::vector<std::string> sorted = bundle_paths;
            std::sort(sorted.begin(), sorted.end());
            set.includes = sorted;
            set.member_paths = sorted;
            result.file_sets.push_back(std::move(set));
            int set_index = static_cast<int>(result.file_sets.size()) - 1;
            for (const auto& type : bundle_type_order) {
                TypeGroup& group = bundle_types[type];
                warn_if_truncated(group.schema, bundle_paths.front(), warnings);
                PendingRecordSet rs;
                rs.name = type;
                rs.file_set_index = set_index;
                rs.description = "fhir " + type + " from bundles; rows=" +
                                 std::to_string(group.rows);
                schema_to_fields(group.schema, rs);
                result.record_sets.push_back(std::move(rs));
            }
        }
        return result;
    }

private:
    struct TypeGroup {
        NestedSchema schema;
        std::uint64_t rows = 0;
        std::vector<std::string> chunk_paths;  // arrival order = path order
    };

    static TypeGroup& group_for(const std::string& type, std::vector<std::string>& order,
                                std::map<std::string, TypeGroup>& groups) {
        auto it = groups.find(type);
        if (it == groups.end()) {
            order.push_back(type);
            it = groups.emplace(type, TypeGroup{}).first;
        }
        return it->second;
    }

    void extract_chunk(const std::filesystem::path& root, const DiscoveredFile& file,
                       const BakeOptions& options, std::vector<std::string>& order,
                       std::map<std::string, TypeGroup>& groups, ExtractionResult& result,
                       WarningSink& warnings) const {
        auto in = open_decompressed(root / file.relative_path);
        if (!in) {
            warn(warnings, file.relative_path, "cannot open file; skipped");
            return;
        }
        // The file's type is its first record's resourceType.
        std::string window = logical_prefix(root / file.relative_path, kSniffWindowBytes);
        std::string type = sniff_resource_type(window);
        if (type.empty()) {
            warn(warnings, file.relative_path, "resourceType not found; skipped");
            return;
        }
        TypeGroup& group = group_for(type, order, groups);
        group.rows += scan_lines(*in, options.json_sample_budget, group.schema, file.relative_path,
                                 type, warnings);
        group.chunk_paths.push_back(file.relative_path);
        result.file_objects.push_back({file.relative_path, ""});
    }

    void extract_single(const std::filesystem::path& root, const DiscoveredFile& file,
                        const BakeOptions& options, std::vector<std::string>& order,
                        std::map<std::string, TypeGroup>& groups, ExtractionResult& result,
                        WarningSink& warnings) const {
        auto in = open_decompressed(root / file.relative_path);
        if (!in) {
            warn(warnings, file.relative_path, "cannot open file; skipped");
            return;
        }
        ordered_json doc = ordered_json::parse(*in, nullptr, false);
        if (doc.is_discarded()) {
            // Window looked like one resource; the file may actually be
            // line-delimited with an oversized first record.
            in = open_decompressed(root / file.relative_path);
            if (in) {
                extract_chunk_stream(*in, root, file, options, order, groups, result, warnings);
                return;
            }
            warn(warnings, file.relative_path, "malformed JSON; skipped");
            return;
        }
        std::string type = resource_type_of(doc);
        if (type.empty()) {
            warn(warnings, file.relative_path, "resourceType not found; skipped");
            return;
        }
        TypeGroup& group = group_for(type, order, groups);
        expand_nested(doc, "", 0, group.schema);
        group.rows += 1;
        group.chunk_paths.push_back(file.relative_path);
        result.file_objects.push_back({file.relative_path, ""});
    }

    void extract_chunk_stream(std::istream& in, const std::filesystem::path& root,
                              const DiscoveredFile& file, const BakeOptions& options,
                              std::vector<std::string>& order,
                              std::map<std::string, TypeGroup>& groups, ExtractionResult& result,
                              WarningSink& warnings) const {
        std::string window = logical_prefix(root / file.relative_path, kSniffWindowBytes);
        std::string type = sniff_resource_type(window);
        if (type.empty()) {
            warn(warnings, file.relative_path, "resourceType not found; skipped");
            return;
        }
        TypeGroup& group = group_for(type, order, groups);
        group.rows += scan_lines(in, options.json_sample_budget, group.schema, file.relative_path,
                                 type, warnings);
        group.chunk_paths.push_back(file.relative_path);
        result.file_objects.push_back({file.relative_path, ""});
    }

    void extract_bundle(const std::filesystem::path& root, const DiscoveredFile& file,
                        std::vector<std::string>& order, std::map<std::string, TypeGroup>& groups,
                        std::vector<std::string>& bundle_paths, ExtractionResult& result,
                        WarningSink& warnings) const {
        auto in = open_decompressed(root / file.relative_path);
        if (!in) {
            warn(warnings, file.relative_path, "cannot open file; skipped");
            return;
        }
        ordered_json doc = ordered_json::parse(*in, nullptr, false);
        if (doc.is_discarded() || !doc.is_object()) {
            warn(warnings, file.relative_path, "malformed bundle; skipped");
            return;
        }
        if (!doc.contains("entry") || !doc.at("entry").is_array()) {
            warn(warnings, file.relative_path, "bundle has no entry array; skipped");
            return;
        }
        for (const auto& entry : doc.at("entry")) {
            if (!entry.is_object() || !entry.contains("resource") ||
                !entry.at("resource").is_object()) {
                warn(warnings, file.relative_path, "bundle entry without resource; entry skipped");
                continue;
            }
            const auto& resource = entry.at("resource");
            std::string type = resource_type_of(resource);
            if (type.empty()) {
                warn(warnings, file.relative_path,
                     "bundle entry resource lacks resourceType; entry skipped");
                continue;
            }
            TypeGroup& group = group_for(type, order, groups);
            expand_nested(resource, "", 0, group.schema);
            group.rows += 1;
        }
        bundle_paths.push_back(file.relative_path);
        result.file_objects.push_back({file.relative_path, ""});
    }

    HandlerDescriptor descriptor_;
};

}  // namespace

std::shared_ptr<FormatHandler> make_json_handler() { return std::make_shared<JsonHandler>(); }

std::shared_ptr<FormatHandler> make_fhir_handler() { return std::make_shared<FhirHandler>(); }

}  // namespace crbake

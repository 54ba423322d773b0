#include "crbake/model.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace crbake {

namespace {

bool is_lower_hex64(const std::string& s) {
    if (s.size() != 64) return false;
    for (char c : s) {
        bool ok = (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
        if (!ok) return false;
    }
    return true;
}

bool has_dotdot_segment(const std::string& path) {
    size_t start = 0;
    while (start <= path.size()) {
        size_t end = path.find('/', start);
        if (end == std::string::npos) end = path.size();
        if (path.compare(start, end - start, "..") == 0) return true;
        if (end == path.size()) break;
        start = end + 1;
    }
    return false;
}

std::string rai_key(const std::string& key) {
    if (key.rfind("rai:", 0) == 0) return key;
    return "rai:" + key;
}

void put_string(ordered_json& obj, const char* key, const std::string& value) {
    if (!value.empty()) obj[key] = value;
}

void put_string_list(ordered_json& obj, const char* key, const std::vector<std::string>& values) {
    if (values.empty()) return;
    obj[key] = ordered_json(values);
}

ordered_json field_to_json(const FieldDesc& field) {
    ordered_json out = ordered_json::object();
    out["@type"] = "cr:Field";
    out["@id"] = field.id;
    out["name"] = field.name;
    put_string(out, "description", field.description);
    std::string primary = field.unknown_data_type.empty()
                              ? std::string(datatype_name(field.data_type))
                              : field.unknown_data_type;
    if (field.extra_data_types.empty()) {
        out["dataType"] = primary;
    } else {
        ordered_json types = ordered_json::array();
        types.push_back(primary);
        for (const auto& t : field.extra_data_types) types.push_back(t);
        out["dataType"] = std::move(types);
    }
    if (field.equivalent_property.size() == 1) {
        out["equivalentProperty"] = field.equivalent_property.front();
    } else if (!field.equivalent_property.empty()) {
        out["equivalentProperty"] = ordered_json(field.equivalent_property);
    }
    if (!field.source.reference_id.empty()) {
        ordered_json source = ordered_json::object();
        ordered_json ref = ordered_json::object();
        ref["@id"] = field.source.reference_id;
        source[field.source.is_file_set ? "fileSet" : "fileObject"] = std::move(ref);
        if (!field.source.column.empty() || !field.source.json_path.empty()) {
            ordered_json extract = ordered_json::object();
            if (!field.source.json_path.empty()) {
                extract["jsonPath"] = field.source.json_path;
            } else {
                extract["column"] = field.source.column;
            }
            source["extract"] = std::move(extract);
        }
        out["source"] = std::move(source);
    }
    return out;
}

std::vector<std::string> parse_string_or_list(const ordered_json& value) {
    std::vector<std::string> out;
    if (value.is_string()) {
        out.push_back(value.get<std::string>());
    } else if (value.is_array()) {
        for (const auto& item : value) {
            if (item.is_string()) out.push_back(item.get<std::string>());
        }
    }
    return out;
}

std::string json_to_size_string(const ordered_json& value) {
    if (value.is_string()) return value.get<std::string>();
    if (value.is_number_integer()) return std::to_string(value.get<long long>());
    if (value.is_number_unsigned()) return std::to_string(value.get<unsigned long long>());
    return {};
}

bool type_tag_is(const ordered_json& node, std::string_view suffix) {
    if (!node.contains("@type")) return false;
    const auto& t = node.at("@type");
    if (!t.is_string()) return false;
    std::string s = t.get<std::string>();
    if (s.size() < suffix.size()) return false;
    if (s.compare(s.size() - suffix.size(), suffix.size(), suffix) != 0) return false;
    // "FileSet" must not match via "FileObject"; suffix comparison already
    // distinguishes them, but reject longer identifiers like "MyFileSetish".
    size_t head = s.size() - suffix.size();
    if (head == 0) return true;
    char before = s[head - 1];
    return before == ':' || before == '/' || before == '#';
}

SourceRef parse_source(const ordered_json& node) {
    SourceRef ref;
    auto read_ref = [&](const char* key, bool is_set) {
        if (!node.contains(key)) return false;
        const auto& v = node.at(key);
        if (v.is_string()) {
            ref.reference_id = v.get<std::string>();
        } else if (v.is_object() && v.contains("@id") && v.at("@id").is_string()) {
            ref.reference_id = v.at("@id").get<std::string>();
        }
        ref.is_file_set = is_set;
        return !ref.reference_id.empty();
    };
    if (!read_ref("fileObject", false)) read_ref("fileSet", true);
    if (node.contains("extract") && node.at("extract").is_object()) {
        const auto& extract = node.at("extract");
        if (extract.contains("column") && extract.at("column").is_string()) {
            ref.column = extract.at("column").get<std::string>();
        }
        if (extract.contains("jsonPath") && extract.at("jsonPath").is_string()) {
            ref.json_path = extract.at("jsonPath").get<std::string>();
        }
    }
    return ref;
}

FieldDesc parse_field(const ordered_json& node) {
    FieldDesc field;
    if (node.contains("@id") && node.at("@id").is_string()) field.id = node.at("@id").get<std::string>();
    if (node.contains("name") && node.at("name").is_string()) field.name = node.at("name").get<std::string>();
    if (node.contains("description") && node.at("description").is_string()) {
        field.description = node.at("description").get<std::string>();
    }
    if (node.contains("dataType")) {
        std::vector<std::string> spellings = parse_string_or_list(node.at("dataType"));
        bool primary_set = false;
        for (const auto& spelling : spellings) {
            if (!primary_set) {
                if (auto parsed = parse_datatype(spelling)) {
                    field.data_type = *parsed;
                } else {
                    field.unknown_data_type = spelling;
                }
                primary_set = true;
            } else {
                // Extras kept verbatim so a re-serialization loses nothing.
                field.extra_data_types.push_back(spelling);
            }
        }
    }
    if (node.contains("equivalentProperty")) {
        field.equivalent_property = parse_string_or_list(node.at("equivalentProperty"));
    }
    if (node.contains("source") && node.at("source").is_object()) {
        field.source = parse_source(node.at("source"));
    }
    return field;
}

void flatten_fields(const ordered_json& node, const std::string& name_prefix,
                    std::vector<FieldDesc>& out) {
    FieldDesc field = parse_field(node);
    if (!name_prefix.empty()) field.name = name_prefix + "." + field.name;
    bool has_sub = node.contains("subField") && node.at("subField").is_array() &&
                   !node.at("subField").empty();
    if (!has_sub) {
        out.push_back(std::move(field));
        return;
    }
    for (const auto& sub : node.at("subField")) {
        if (sub.is_object()) flatten_fields(sub, field.name, out);
    }
}

}  // namespace

ordered_json CroissantDocument::canonical_context() {
    ordered_json ctx = ordered_json::object();
    ctx["@language"] = "en";
    ctx["@vocab"] = "https://schema.org/";
    ctx["cr"] = "http://mlcommons.org/croissant/";
    ctx["rai"] = "http://mlcommons.org/croissant/RAI/";
    ctx["sc"] = "https://schema.org/";
    return ctx;
}

CroissantDocument merge_semantic(CroissantDocument skeleton, const SemanticMetadata& semantic) {
    if (semantic.name.empty()) {
        throw std::invalid_argument("dataset name is required");
    }
    skeleton.semantic = semantic;
    skeleton.conforms_to = {std::string(kCroissant11Uri)};
    if (!semantic.rai.empty()) {
        skeleton.conforms_to.push_back(std::string(kRai10Uri));
    }
    return skeleton;
}

ordered_json to_jsonld(const CroissantDocument& document) {
    ordered_json out = ordered_json::object();
    out["@context"] = document.context;
    out["@type"] = "sc:Dataset";
    out["conformsTo"] = ordered_json(document.conforms_to);
    const SemanticMetadata& s = document.semantic;
    put_string(out, "name", s.name);
    put_string(out, "description", s.description);
    put_string_list(out, "alternateName", s.alternate_names);
    put_string(out, "license", s.license);
    put_string(out, "version", s.version);
    put_string(out, "datePublished", s.date_published);
    put_string(out, "url", s.url);
    put_string_list(out, "sameAs", s.same_as);
    put_string(out, "publisher", s.publisher);
    put_string(out, "temporalCoverage", s.temporal_coverage);
    put_string(out, "usageInfo", s.usage_info);
    if (!s.creators.empty()) {
        ordered_json creators = ordered_json::array();
        for (const auto& name : s.creators) {
            ordered_json person = ordered_json::object();
            person["@type"] = "sc:Person";
            person["name"] = name;
            creators.push_back(std::move(person));
        }
        out["creator"] = std::move(creators);
    }
    put_string(out, "citeAs", s.citation);
    put_string(out, "rai:dataUseCases", s.rai.data_use_cases);
    put_string(out, "rai:dataLimitations", s.rai.data_limitations);
    put_string(out, "rai:personalSensitiveInformation", s.rai.personal_sensitive_information);
    for (const auto& [key, value] : s.rai.extra) {
        out[rai_key(key)] = value;
    }

    ordered_json distribution = ordered_json::array();
    for (const auto& entry : document.distribution) {
        if (const auto* file = std::get_if<FileObjectDesc>(&entry)) {
            ordered_json node = ordered_json::object();
            node["@type"] = "cr:FileObject";
            node["@id"] = file->id;
            node["name"] = file->name;
            put_string(node, "contentSize", file->content_size);
            put_string(node, "contentUrl", file->content_url);
            put_string(node, "encodingFormat", file->encoding_format);
            put_string(node, "sha256", file->sha256);
            distribution.push_back(std::move(node));
        } else {
            const auto& set = std::get<FileSetDesc>(entry);
            ordered_json node = ordered_json::object();
            node["@type"] = "cr:FileSet";
            node["@id"] = set.id;
            node["name"] = set.name;
            put_string(node, "encodingFormat", set.encoding_format);
            put_string_list(node, "includes", set.includes);
            distribution.push_back(std::move(node));
        }
    }
    out["distribution"] = std::move(distribution);

    ordered_json record_sets = ordered_json::array();
    for (const auto& rs : document.record_sets) {
        ordered_json node = ordered_json::object();
        node["@type"] = "cr:RecordSet";
        node["@id"] = rs.id;
        node["name"] = rs.name;
        put_string(node, "description", rs.description);
        ordered_json fields = ordered_json::array();
        for (const auto& field : rs.fields) fields.push_back(field_to_json(field));
        node["field"] = std::move(fields);
        record_sets.push_back(std::move(node));
    }
    out["recordSet"] = std::move(record_sets);
    return out;
}

std::string serialize_jsonld(const CroissantDocument& document) {
    return to_jsonld(document).dump(2) + "\n";
}

CroissantDocument parse_jsonld(const ordered_json& json) {
    if (!json.is_object()) {
        throw std::runtime_error("document root is not a JSON object");
    }
    CroissantDocument doc;
    doc.context = json.contains("@context") ? json.at("@context") : ordered_json::object();
    doc.conforms_to.clear();
    if (json.contains("conformsTo")) {
        doc.conforms_to = parse_string_or_list(json.at("conformsTo"));
    }
    SemanticMetadata& s = doc.semantic;
    auto read_string = [&](const char* key, std::string& target) {
        if (json.contains(key) && json.at(key).is_string()) target = json.at(key).get<std::string>();
    };
    read_string("name", s.name);
    read_string("description", s.description);
    read_string("license", s.license);
    read_string("citeAs", s.citation);
    read_string("version", s.version);
    read_string("datePublished", s.date_published);
    read_string("url", s.url);
    read_string("publisher", s.publisher);
    read_string("temporalCoverage", s.temporal_coverage);
    read_string("usageInfo", s.usage_info);
    if (json.contains("sameAs")) s.same_as = parse_string_or_list(json.at("sameAs"));
    if (json.contains("alternateName")) s.alternate_names = parse_string_or_list(json.at("alternateName"));
    if (json.contains("creator")) {
        const auto& creator = json.at("creator");
        auto read_person = [&](const ordered_json& person) {
            if (person.is_string()) {
                s.creators.push_back(person.get<std::string>());
            } else if (person.is_object() && person.contains("name") && person.at("name").is_string()) {
                s.creators.push_back(person.at("name").get<std::string>());
            }
        };
        if (creator.is_array()) {
            for (const auto& person : creator) read_person(person);
        } else {
            read_person(creator);
        }
    }
    for (auto it = json.begin(); it != json.end(); ++it) {
        const std::string& key = it.key();
        if (key.rfind("rai:", 0) != 0 || !it.value().is_string()) continue;
        std::string value = it.value().get<std::string>();
        std::string bare = key.substr(4);
        if (bare == "dataUseCases") {
            s.rai.data_use_cases = value;
        } else if (bare == "dataLimitations") {
            s.rai.data_limitations = value;
        } else if (bare == "personalSensitiveInformation") {
            s.rai.personal_sensitive_information = value;
        } else {
            s.rai.extra.emplace_back(bare, value);
        }
    }

    if (json.contains("distribution") && json.at("distribution").is_array()) {
        for (const auto& node : json.at("distribution")) {
            if (!node.is_object()) continue;
            if (type_tag_is(node, "FileSet")) {
                FileSetDesc set;
                if (node.contains("@id") && node.at("@id").is_string()) set.id = node.at("@id");
                if (node.contains("name") && node.at("name").is_string()) set.name = node.at("name");
                if (node.contains("encodingFormat") && node.at("encodingFormat").is_string()) {
                    set.encoding_format = node.at("encodingFormat");
                }
                if (node.contains("includes")) set.includes = parse_string_or_list(node.at("includes"));
                doc.distribution.emplace_back(std::move(set));
            } else {
                FileObjectDesc file;
                if (node.contains("@id") && node.at("@id").is_string()) file.id = node.at("@id");
                if (node.contains("name") && node.at("name").is_string()) file.name = node.at("name");
                if (node.contains("contentUrl") && node.at("contentUrl").is_string()) {
                    file.content_url = node.at("contentUrl");
                }
                if (node.contains("contentSize")) {
                    file.content_size = json_to_size_string(node.at("contentSize"));
                }
                if (node.contains("encodingFormat") && node.at("encodingFormat").is_string()) {
                    file.encoding_format = node.at("encodingFormat");
                }
                if (node.contains("sha256") && node.at("sha256").is_string()) {
                    file.sha256 = node.at("sha256");
                }
                doc.distribution.emplace_back(std::move(file));
            }
        }
    }

    if (json.contains("recordSet") && json.at("recordSet").is_array()) {
        for (const auto& node : json.at("recordSet")) {
            if (!node.is_object()) continue;
            RecordSetDesc rs;
            if (node.contains("@id") && node.at("@id").is_string()) rs.id = node.at("@id");
            if (node.contains("name") && node.at("name").is_string()) rs.name = node.at("name");
            if (node.contains("description") && node.at("description").is_string()) {
                rs.description = node.at("description");
            }
            if (node.contains("field") && node.at("field").is_array()) {
                for (const auto& fnode : node.at("field")) {
                    if (fnode.is_object()) flatten_fields(fnode, "", rs.fields);
                }
            }
            doc.record_sets.push_back(std::move(rs));
        }
    }
    return doc;
}

CroissantDocument parse_jsonld_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open " + path);
    }
    ordered_json json;
    try {
        json = ordered_json::parse(in);
    } catch (const std::exception& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
    return parse_jsonld(json);
}

std::vector<Violation> validate_document(const CroissantDocument& document) {
    std::vector<Violation> violations;
    auto add = [&](std::string id, std::string code, std::string message) {
        violations.push_back({std::move(id), std::move(code), std::move(message)});
    };

    ordered_json expected = CroissantDocument::canonical_context();
    if (document.context != expected) {
        add("dataset", "context-shape", "@context does not match the required context block");
    }

    bool has_core = false;
    bool has_rai_uri = false;
    for (const auto& uri : document.conforms_to) {
        if (uri == kCroissant11Uri) has_core = true;
        if (uri == kRai10Uri) has_rai_uri = true;
    }
    if (!has_core) {
        add("dataset", "conforms-to", "conformsTo lacks the Croissant 1.1 URI");
    }
    if (has_rai_uri != !document.semantic.rai.empty()) {
        add("dataset", "conforms-to",
            has_rai_uri ? "conformsTo lists the RAI URI but no rai: attribute is present"
                        : "rai: attributes present without the RAI conformsTo URI");
    }

    if (document.semantic.name.empty()) {
        add("dataset", "missing-name", "dataset name is required");
    }

    std::set<std::string> ids;
    std::set<std::string> duplicates;
    std::set<std::string> file_object_ids;
    std::set<std::string> file_set_ids;
    auto track = [&](const std::string& id) {
        if (id.empty()) return;
        if (!ids.insert(id).second) duplicates.insert(id);
    };
    for (const auto& entry : document.distribution) {
        if (const auto* file = std::get_if<FileObjectDesc>(&entry)) {
            track(file->id);
            file_object_ids.insert(file->id);
            if (file->name.empty()) add(file->id, "missing-name", "FileObject has no name");
            if (file->content_url.empty() || file->content_url.front() == '/' ||
                file->content_url.find('\\') != std::string::npos ||
                has_dotdot_segment(file->content_url)) {
                add(file->id, "content-url-form",
                    "contentUrl must be a relative forward-slash path: '" + file->content_url + "'");
            }
            if (!is_lower_hex64(file->sha256)) {
                add(file->id, "sha256-form", "sha256 must be 64 lowercase hex characters");
            }
        } else {
            const auto& set = std::get<FileSetDesc>(entry);
            track(set.id);
            file_set_ids.insert(set.id);
            if (set.name.empty()) add(set.id, "missing-name", "FileSet has no name");
        }
    }
    for (const auto& rs : document.record_sets) {
        track(rs.id);
        if (rs.name.empty()) add(rs.id, "missing-name", "RecordSet has no name");
        std::set<std::string> field_names;
        for (const auto& field : rs.fields) {
            track(field.id);
            if (field.name.empty()) add(field.id, "missing-name", "Field has no name");
            if (!field_names.insert(field.name).second) {
                add(rs.id, "duplicate-field-name",
                    "field name '" + field.name + "' repeats within RecordSet");
            }
            if (!field.unknown_data_type.empty()) {
                add(field.id, "unknown-datatype",
                    "dataType '" + field.unknown_data_type + "' is outside the vocabulary");
            }
            if (!field.source.reference_id.empty()) {
                const auto& pool = field.source.is_file_set ? file_set_ids : file_object_ids;
                if (!pool.count(field.source.reference_id)) {
                    add(field.id, "dangling-reference",
                        "source references unknown id '" + field.source.reference_id + "'");
                }
            }
        }
    }
    for (const auto& id : duplicates) {
        add(id, "duplicate-id", "@id '" + id + "' appears more than once");
    }
    return violations;
}

}  // namespace crbake

#include "crbake/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>

#include "crbake/assemble.hpp"

namespace crbake {

namespace {

void count_stats(const BakeResult& result, std::size_t discovered, std::size_t matched,
                 BakeStats& stats) {
    stats.files_discovered = discovered;
    stats.files_matched = matched;
    for (const auto& entry : result.document.distribution) {
        if (std::holds_alternative<FileObjectDesc>(entry)) {
            ++stats.file_objects;
        } else {
            ++stats.file_sets;
        }
    }
    stats.record_sets = result.document.record_sets.size();
    for (const auto& rs : result.document.record_sets) stats.fields += rs.fields.size();
}

}  // namespace

void apply_field_mappings(CroissantDocument& document, const std::string& mappings_path,
                          WarningSink& warnings) {
    std::ifstream in(mappings_path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open field mappings: " + mappings_path);
    }
    ordered_json json;
    try {
        json = ordered_json::parse(in);
    } catch (const std::exception& e) {
        throw std::runtime_error(mappings_path + ": " + e.what());
    }
    if (!json.is_object()) {
        throw std::runtime_error(mappings_path + ": expected a JSON object keyed by field");
    }
    auto as_list = [](const ordered_json& v) {
        std::vector<std::string> out;
        if (v.is_string()) {
            out.push_back(v.get<std::string>());
        } else if (v.is_array()) {
            for (const auto& item : v) {
                if (item.is_string()) out.push_back(item.get<std::string>());
            }
        }
        return out;
    };
    for (auto it = json.begin(); it != json.end(); ++it) {
        const std::string& key = it.key();
        const ordered_json& spec = it.value();
        if (!spec.is_object()) {
            warn(warnings, key, "field mapping entry is not an object; ignored");
            continue;
        }
        bool applied = false;
        for (auto& rs : document.record_sets) {
            for (auto& field : rs.fields) {
                if (field.id != key && rs.name + "." + field.name != key) continue;
                applied = true;
                if (spec.contains("equivalentProperty")) {
                    for (auto& uri : as_list(spec.at("equivalentProperty"))) {
                        field.equivalent_property.push_back(std::move(uri));
                    }
                }
                if (spec.contains("dataType")) {
                    for (auto& uri : as_list(spec.at("dataType"))) {
                        field.extra_data_types.push_back(std::move(uri));
                    }
                }
            }
        }
        if (!applied) {
            warn(warnings, key, "field mapping matched no field in the baked document");
        }
    }
}

BakeResult run_pipeline(const std::filesystem::path& root, const SemanticMetadata& semantic,
                        const BakeOptions& options, const HandlerRegistry& registry) {
    BakeResult result;

    std::vector<DiscoveredFile> discovered = discover_files(root, result.warnings);

    // Dispatch each file; batch per handler preserving sorted order.
    std::map<const FormatHandler*, std::vector<DiscoveredFile>> batches;
    std::map<std::string, const FormatHandler*> dispatched;
    for (const auto& file : discovered) {
        SniffWindow window = read_sniff_window(root / file.relative_path, file.relative_path);
        const FormatHandler* handler = registry.dispatch(file, window);
        if (handler == nullptr) continue;
        batches[handler].push_back(file);
        dispatched[file.relative_path] = handler;
    }

    std::vector<ExtractionResult> extractions;
    std::set<std::string> consumed;
    for (const auto& handler : registry.handlers()) {
        auto it = batches.find(handler.get());
        if (it == batches.end()) continue;
        std::vector<DiscoveredFile> batch;
        for (const auto& file : it->second) {
            if (!consumed.count(file.relative_path)) batch.push_back(file);
        }
        if (batch.empty()) continue;
        ExtractionResult extraction;
        try {
            extraction = handler->extract(root, batch, options, result.warnings);
        } catch (const std::exception& e) {
            warn(result.warnings, handler->descriptor().name,
                 std::string("handler failed on its batch: ") + e.what());
            continue;
        }
        for (const auto& fo : extraction.file_objects) consumed.insert(fo.relative_path);
        for (const auto& path : extraction.consumed_paths) consumed.insert(path);
        extractions.push_back(std::move(extraction));
    }

    std::size_t matched = 0;
    for (const auto& file : discovered) {
        if (consumed.count(file.relative_path)) {
            ++matched;
        } else if (dispatched.count(file.relative_path)) {
            // The handler it was routed to already warned about it.
        } else {
            warn(result.warnings, file.relative_path, "no handler matched; file skipped");
        }
    }
    if (matched == 0) {
        throw NoSupportedFilesError();
    }

    CroissantDocument skeleton = assign_identifiers(discovered, extractions, result.warnings);
    if (!options.field_mappings_path.empty()) {
        apply_field_mappings(skeleton, options.field_mappings_path, result.warnings);
    }
    result.document = merge_semantic(std::move(skeleton), semantic);

    std::vector<Violation> violations = validate_document(result.document);
    if (!violations.empty()) {
        throw ValidationError(std::move(violations));
    }
    result.serialized = serialize_jsonld(result.document);
    count_stats(result, discovered.size(), matched, result.stats);
    return result;
}

BakeResult run_pipeline(const std::filesystem::path& root, const SemanticMetadata& semantic,
                        const BakeOptions& options) {
    static const HandlerRegistry registry = HandlerRegistry::builtin();
    return run_pipeline(root, semantic, options, registry);
}

}  // namespace crbake

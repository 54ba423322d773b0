#include "crbake/assemble.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace crbake {

namespace {

std::string filename_of(const std::string& relative_path) {
    auto slash = relative_path.rfind('/');
    return slash == std::string::npos ? relative_path : relative_path.substr(slash + 1);
}

}  // namespace

CroissantDocument assign_identifiers(const std::vector<DiscoveredFile>& discovered,
                                     const std::vector<ExtractionResult>& results,
                                     WarningSink& warnings) {
    std::map<std::string, std::size_t> index_of;
    for (std::size_t i = 0; i < discovered.size(); ++i) {
        auto [it, inserted] = index_of.emplace(discovered[i].relative_path, i);
        if (!inserted) {
            throw std::logic_error("duplicate relative path in discovery: " +
                                   discovered[i].relative_path);
        }
    }
    auto index_for = [&](const std::string& path) -> std::size_t {
        auto it = index_of.find(path);
        if (it == index_of.end()) {
            throw std::logic_error("handler referenced an undiscovered path: " + path);
        }
        return it->second;
    };

    // File objects keyed by discovery index so the distribution comes out
    // in path order no matter which handler emitted them.
    std::map<std::size_t, const PendingFileObject*> file_objects;
    for (const auto& result : results) {
        for (const auto& pending : result.file_objects) {
            std::size_t idx = index_for(pending.relative_path);
            auto [it, inserted] = file_objects.emplace(idx, &pending);
            if (!inserted) {
                warn(warnings, pending.relative_path, "claimed by more than one handler; keeping first");
            }
        }
    }

    CroissantDocument doc;
    std::map<std::string, std::string> file_id_of;  // path -> @id
    for (const auto& [idx, pending] : file_objects) {
        const DiscoveredFile& file = discovered[idx];
        FileObjectDesc desc;
        desc.id = "file_" + std::to_string(idx);
        desc.name = filename_of(file.relative_path);
        desc.content_url = file.relative_path;
        desc.content_size = std::to_string(file.byte_size);
        desc.encoding_format = pending->encoding_format.empty()
                                   ? media_type_for(file.relative_path)
                                   : pending->encoding_format;
        desc.sha256 = file.sha256;
        file_id_of[file.relative_path] = desc.id;
        doc.distribution.emplace_back(std::move(desc));
    }

    // File sets, ordered by their first member's discovery index.
    struct SetEntry {
        std::size_t first_index;
        const PendingFileSet* pending;
    };
    std::vector<SetEntry> set_entries;
    for (const auto& result : results) {
        for (const auto& pending : result.file_sets) {
            if (pending.member_paths.empty()) {
                warn(warnings, pending.name, "file set with no members dropped");
                continue;
            }
            std::size_t first = index_for(pending.member_paths.front());
            for (const auto& member : pending.member_paths) {
                first = std::min(first, index_for(member));
            }
            set_entries.push_back({first, &pending});
        }
    }
    std::sort(set_entries.begin(), set_entries.end(), [](const SetEntry& a, const SetEntry& b) {
        if (a.first_index != b.first_index) return a.first_index < b.first_index;
        return a.pending->name < b.pending->name;
    });
    // Maps an ExtractionResult-local file set to its assigned @id.
    std::map<const PendingFileSet*, std::string> set_id_of;
    for (const auto& entry : set_entries) {
        FileSetDesc desc;
        desc.id = "fileset_" + std::to_string(entry.first_index);
        desc.name = entry.pending->name;
        desc.encoding_format = entry.pending->encoding_format;
        desc.includes = entry.pending->includes;
        set_id_of[entry.pending] = desc.id;
        doc.distribution.emplace_back(std::move(desc));
    }

    // Record sets, ordered by (primary index, name); suffix on collision.
    struct RsEntry {
        std::size_t primary_index;
        const PendingRecordSet* pending;
        const ExtractionResult* owner;
    };
    std::vector<RsEntry> rs_entries;
    for (const auto& result : results) {
        for (const auto& pending : result.record_sets) {
            std::string primary = pending.primary_path;
            if (pending.file_set_index >= 0) {
                const auto& set = result.file_sets.at(static_cast<std::size_t>(pending.file_set_index));
                if (set.member_paths.empty()) continue;
                primary = set.member_paths.front();
                for (const auto& member : set.member_paths) {
                    if (index_for(member) < index_for(primary)) primary = member;
                }
            }
            rs_entries.push_back({index_for(primary), &pending, &result});
        }
    }
    std::sort(rs_entries.begin(), rs_entries.end(), [](const RsEntry& a, const RsEntry& b) {
        if (a.primary_index != b.primary_index) return a.primary_index < b.primary_index;
        return a.pending->name < b.pending->name;
    });
    std::size_t run_start = 0;
    for (std::size_t i = 0; i < rs_entries.size(); ++i) {
        if (i > 0 && rs_entries[i].primary_index != rs_entries[run_start].primary_index) {
            run_start = i;
        }
        const RsEntry& entry = rs_entries[i];
        const PendingRecordSet& pending = *entry.pending;
        RecordSetDesc desc;
        desc.id = "recordset_" + std::to_string(entry.primary_index);
        if (i != run_start) {
            desc.id += "_" + std::to_string(i - run_start);
        }
        desc.name = pending.name;
        desc.description = pending.description;

        std::string source_id;
        bool source_is_set = pending.file_set_index >= 0;
        if (source_is_set) {
            const auto& set =
                entry.owner->file_sets.at(static_cast<std::size_t>(pending.file_set_index));
            source_id = set_id_of.at(&set);
        } else {
            auto it = file_id_of.find(pending.primary_path);
            if (it == file_id_of.end()) {
                warn(warnings, pending.primary_path,
                     "record set '" + pending.name + "' has no backing file object; dropped");
                continue;
            }
            source_id = it->second;
        }
        std::string default_prefix = source_is_set ? desc.id : source_id;
        for (const auto& pf : pending.fields) {
            FieldDesc field;
            field.name = pf.name;
            field.description = pf.description;
            field.data_type = pf.data_type;
            std::string field_source = source_id;
            bool field_is_set = source_is_set;
            std::string prefix = default_prefix;
            if (!pf.source_path.empty()) {
                auto it = file_id_of.find(pf.source_path);
                if (it != file_id_of.end()) {
                    field_source = it->second;
                    field_is_set = false;
                    prefix = field_source;
                } else {
                    warn(warnings, pf.source_path,
                         "field '" + pf.name + "' names a missing source file; using record source");
                }
            }
            field.id = prefix + "_" + sanitize_id(pf.name);
            field.source.reference_id = field_source;
            field.source.is_file_set = field_is_set;
            field.source.column = pf.column;
            field.source.json_path = pf.json_path;
            desc.fields.push_back(std::move(field));
        }
        doc.record_sets.push_back(std::move(desc));
    }
    return doc;
}

}  // namespace crbake

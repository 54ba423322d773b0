#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "crbake/datatype.hpp"
#include "crbake/discovery.hpp"
#include "crbake/util.hpp"

namespace crbake {

/// Knobs threaded through the pipeline into handlers.
struct BakeOptions {
    /// Rows examined per tabular file for type inference (full scan still
    /// counts rows).
    std::size_t sample_budget = 1000;
    /// Records examined per JSON/NDJSON file for shape expansion.
    std::size_t json_sample_budget = 200;
    /// Inference reads every row instead of stopping at the budget.
    bool deep_sample = false;
    /// Merge same-schema Parquet files under one directory into a single
    /// RecordSet backed by a FileSet.
    bool group_partitions = false;
    /// Tabular files have no header row; columns become col_0, col_1, ...
    bool no_header = false;
    /// Optional JSON file mapping field names to equivalentProperty URIs or
    /// extra dataType URIs.
    std::string field_mappings_path;
};

/// First bytes of a file, both as stored and after undoing an outer
/// compression layer. Both views are capped at the sniff window size.
struct SniffWindow {
    std::string raw;
    std::string logical;
};

inline constexpr std::size_t kSniffWindowBytes = 8 * 1024;

/// Field as produced by a handler, before identifier assignment.
struct PendingField {
    std::string name;
    std::string description;
    DataType data_type = DataType::Text;
    /// Extract locator: column for tabular sources, json_path ('.'-joined)
    /// for nested records. At most one is set.
    std::string column;
    std::string json_path;
    /// When set, the field references this file instead of the record
    /// set's primary file (waveform signals point at their data files).
    std::string source_path;
};

/// RecordSet as produced by a handler. `primary_path` names the backing
/// file whose discovery index the RecordSet id reuses; when
/// `file_set_index` is set the fields reference that FileSet instead.
struct PendingRecordSet {
    std::string name;
    std::string description;
    std::string primary_path;
    int file_set_index = -1;  // index into ExtractionResult::file_sets
    std::vector<PendingField> fields;
};

struct PendingFileObject {
    std::string relative_path;
    /// Overrides the extension-derived media type when non-empty.
    std::string encoding_format;
};

struct PendingFileSet {
    std::string name;
    std::string encoding_format;
    std::vector<std::string> includes;      // serialized include patterns
    std::vector<std::string> member_paths;  // discovered members, sorted
};

/// Everything one handler contributes for the batch of files routed to it.
struct ExtractionResult {
    std::vector<PendingFileObject> file_objects;
    std::vector<PendingFileSet> file_sets;
    std::vector<PendingRecordSet> record_sets;
    /// Paths claimed by this handler beyond the dispatched ones (e.g.
    /// a waveform header claiming its signal and annotation siblings).
    std::vector<std::string> consumed_paths;
};

struct HandlerDescriptor {
    std::string name;
    /// Suffix patterns, matched case-insensitively against the path and
    /// against the path with compression suffixes stripped. An empty
    /// pattern matches any path (the sniff predicate then gates).
    std::vector<std::string> extension_patterns;
    int priority = 0;
    std::function<bool(const SniffWindow&)> sniff;  // optional
};

class FormatHandler {
public:
    virtual ~FormatHandler() = default;
    virtual const HandlerDescriptor& descriptor() const = 0;
    /// Processes every file dispatched to this handler in one bake, in
    /// lexicographic path order. Per-file failures become warnings.
    virtual ExtractionResult extract(const std::filesystem::path& root,
                                     const std::vector<DiscoveredFile>& files,
                                     const BakeOptions& options, WarningSink& warnings) const = 0;
};

class HandlerRegistry {
public:
    /// Registry with no handlers.
    HandlerRegistry() = default;

    /// Registry preloaded with the built-in handlers in dispatch order:
    /// FHIR, generic JSON/JSONL, CSV/TSV, Parquet, WFDB, image, DICOM,
    /// NIfTI.
    static HandlerRegistry builtin();

    /// Throws std::invalid_argument on a duplicate handler name.
    void register_handler(std::shared_ptr<FormatHandler> handler);

    /// First handler, by (priority, registration order), whose extension
    /// pattern matches and whose sniff accepts. Null when unmatched.
    const FormatHandler* dispatch(const DiscoveredFile& file, const SniffWindow& window) const;

    const std::vector<std::shared_ptr<FormatHandler>>& handlers() const { return handlers_; }

private:
    std::vector<std::shared_ptr<FormatHandler>> handlers_;
};

/// Reads the sniff window for a file: raw prefix plus the decompressed view
/// when the path carries a compression suffix.
SniffWindow read_sniff_window(const std::filesystem::path& absolute_path,
                              const std::string& relative_path);

}  // namespace crbake

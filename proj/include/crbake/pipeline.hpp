#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "crbake/model.hpp"
#include "crbake/registry.hpp"

namespace crbake {

/// Raised when the input directory yields zero handler matches.
struct NoSupportedFilesError : std::runtime_error {
    NoSupportedFilesError() : std::runtime_error("no supported files found") {}
};

/// Raised when a pipeline-produced document fails its own validator;
/// indicates an internal bug, never user error.
struct ValidationError : std::runtime_error {
    explicit ValidationError(std::vector<Violation> v)
        : std::runtime_error("generated document failed validation"), violations(std::move(v)) {}
    std::vector<Violation> violations;
};

struct BakeStats {
    std::size_t files_discovered = 0;
    std::size_t files_matched = 0;
    std::size_t file_objects = 0;
    std::size_t file_sets = 0;
    std::size_t record_sets = 0;
    std::size_t fields = 0;
};

struct BakeResult {
    CroissantDocument document;
    std::string serialized;
    WarningSink warnings;
    BakeStats stats;
};

/// Full bake: discover, hash, dispatch, extract, assemble, merge semantic
/// metadata, validate, serialize.
///
/// Throws NoSupportedFilesError when no handler matched anything,
/// std::invalid_argument for semantic errors (missing name), filesystem or
/// runtime errors for unreadable input, ValidationError on validator
/// failure.
BakeResult run_pipeline(const std::filesystem::path& root, const SemanticMetadata& semantic,
                        const BakeOptions& options, const HandlerRegistry& registry);

/// Convenience overload using the built-in registry.
BakeResult run_pipeline(const std::filesystem::path& root, const SemanticMetadata& semantic,
                        const BakeOptions& options = {});

/// Attaches equivalentProperty links and extra data-type URIs from a
/// mapping file (JSON object keyed by field id or "recordset.field").
/// Unknown keys produce warnings.
void apply_field_mappings(CroissantDocument& document, const std::string& mappings_path,
                          WarningSink& warnings);

}  // namespace crbake

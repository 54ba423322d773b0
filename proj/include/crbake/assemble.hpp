#pragma once

#include <vector>

#include "crbake/discovery.hpp"
#include "crbake/model.hpp"
#include "crbake/registry.hpp"

namespace crbake {

/// Deterministic identifier assignment over handler outputs.
///
/// FileObjects get `file_{i}` where i is the zero-based position of their
/// path among ALL discovered files in lexicographic order (unmatched files
/// leave gaps). FileSets get `fileset_{j}` from their first member's index.
/// RecordSets get `recordset_{i}` from their primary backing file; when
/// several RecordSets share a backing index the later ones (by name) get a
/// `_{k}` suffix. Field ids are `{source_id}_{field_name}` sanitized to
/// [A-Za-z0-9_].
///
/// The result is invariant under permutation of `results`.
CroissantDocument assign_identifiers(const std::vector<DiscoveredFile>& discovered,
                                     const std::vector<ExtractionResult>& results,
                                     WarningSink& warnings);

}  // namespace crbake

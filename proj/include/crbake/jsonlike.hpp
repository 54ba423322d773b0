#pragma once

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "crbake/inference.hpp"

namespace crbake {

enum class JsonShape {
    ArrayOfObjects,
    SingleObject,
    JsonLines,
    FhirNdjson,
    FhirBundle,
    FhirSingleResource,
    Unparseable,
};

/// Shape from a bounded decompressed prefix. FHIR shapes require a
/// resourceType key visible in the window.
JsonShape sniff_shape(std::string_view prefix);

/// Union schema accumulated over sampled records.
struct NestedSchema {
    std::vector<std::string> order;  // leaf paths, first-seen order
    std::map<std::string, TypeLatticeState> leaves;
    /// Paths observed as objects (or arrays of objects). A path that is
    /// both leaf and internal resolves sc:Text.
    std::set<std::string> internal;
    bool depth_truncated = false;
};

inline constexpr int kMaxNestingDepth = 32;

/// Folds one record into the schema. Objects recurse per key; arrays of
/// objects recurse element-wise without index segments; arrays of scalars
/// join into one repeated leaf. A scalar at the root contributes the leaf
/// "value".
void expand_nested(const nlohmann::ordered_json& record, const std::string& prefix, int depth,
                   NestedSchema& out);

/// Final type of one leaf, honoring the mixed scalar/object rule.
DataType resolve_leaf(const NestedSchema& schema, const std::string& path);

}  // namespace crbake

#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace crbake {

/// Closed vocabulary of Croissant field data types.
enum class DataType {
    Text,
    Boolean,
    Integer,
    Float,
    Date,
    DateTime,
    Time,
    Url,
    ImageObject,
    Int8,
    Int16,
    Int32,
    Int64,
    UInt8,
    UInt16,
    UInt32,
    UInt64,
    Float16,
    Float32,
    Float64,
};

/// Prefixed spelling, e.g. "cr:Int64" or "sc:DateTime".
std::string_view datatype_name(DataType t);

/// Canonical full-URI expansion, e.g. "http://mlcommons.org/croissant/Int64".
std::string datatype_uri(DataType t);

/// Parses a prefixed name ("sc:Integer") or a full URI. Accepts both the
/// https and http schema.org spellings. Unknown inputs yield nullopt.
std::optional<DataType> parse_datatype(std::string_view text);

std::span<const DataType> all_datatypes();

inline constexpr std::string_view kSchemaOrgPrefix = "https://schema.org/";
inline constexpr std::string_view kCroissantPrefix = "http://mlcommons.org/croissant/";

}  // namespace crbake

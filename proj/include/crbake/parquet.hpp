#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "crbake/datatype.hpp"

namespace crbake {

/// Leaf column recovered from Parquet footer metadata.
struct ParquetColumn {
    std::string dotted_path;  // wrapper groups (list/element/key_value) elided
    DataType data_type = DataType::Text;
    std::string annotation;  // non-empty when the type is down-converted
};

struct ParquetFooter {
    std::vector<ParquetColumn> columns;
    std::uint64_t num_rows = 0;
    /// Total bytes read from disk to obtain the schema: footer thrift blob
    /// plus the 8-byte tail. Proves reads stay independent of data size.
    std::uint64_t bytes_read = 0;
};

/// Reads schema and row count from the footer only.
/// Throws std::runtime_error on missing magic or malformed metadata.
ParquetFooter read_parquet_footer(const std::filesystem::path& file);

/// One leaf's raw footer facts, used to derive its Croissant type.
struct ColumnarTypeInfo {
    int physical_type = -1;    // parquet Type enum; -1 when absent
    int converted_type = -1;   // parquet ConvertedType enum; -1 when absent
    // Decoded LogicalType union member, when present.
    enum class Logical {
        None,
        String,
        Enum,
        Decimal,
        Date,
        Time,
        Timestamp,
        Integer,
        Unknown,
        Json,
        Bson,
        Uuid,
        Float16,
        Interval,
    } logical = Logical::None;
    int integer_bit_width = 0;
    bool integer_is_signed = true;
};

/// Croissant type plus an optional description annotation.
std::pair<DataType, std::string> map_columnar_type(const ColumnarTypeInfo& info);

}  // namespace crbake

#include "crbake/parquet.hpp"

#include <cstring>
#include <fstream>
#include <map>
#include <stdexcept>

#include "crbake/handlers.hpp"

namespace crbake {

namespace {

// Thrift compact-protocol wire types.
enum CType {
    kStop = 0,
    kBoolTrue = 1,
    kBoolFalse = 2,
    kByte = 3,
    kI16 = 4,
    kI32 = 5,
    kI64 = 6,
    kDouble = 7,
    kBinary = 8,
    kList = 9,
    kSet = 10,
    kMap = 11,
    kStruct = 12,
};

class CompactReader {
public:
    CompactReader(const std::uint8_t* data, std::size_t size) : p_(data), end_(data + size) {}

    std::uint64_t read_varint() {
        std::uint64_t value = 0;
        int shift = 0;
        for (;;) {
            std::uint8_t byte = take();
            value |= static_cast<std::uint64_t>(byte & 0x7F) << shift;
            if ((byte & 0x80) == 0) return value;
            shift += 7;
            if (shift > 63) throw std::runtime_error("varint overruns 64 bits");
        }
    }

    std::int64_t read_zigzag() {
        std::uint64_t raw = read_varint();
        return static_cast<std::int64_t>(raw >> 1) ^ -static_cast<std::int64_t>(raw & 1);
    }

    std::string read_binary() {
        std::uint64_t len = read_varint();
        require(len);
        std::string out(reinterpret_cast<const char*>(p_), static_cast<std::size_t>(len));
        p_ += len;
        return out;
    }

    std::uint8_t read_byte() { return take(); }

    struct FieldHeader {
        int type = kStop;
        int id = 0;
        bool bool_value = false;
    };

    // Reads the next field header of the current struct; type == kStop ends
    // the struct. Booleans carry their value in the type nibble.
    FieldHeader read_field(int& last_id) {
        FieldHeader header;
        std::uint8_t byte = take();
        if (byte == 0) return header;
        int delta = byte >> 4;
        header.type = byte & 0x0F;
        header.id = delta == 0 ? static_cast<int>(read_zigzag()) : last_id + delta;
        last_id = header.id;
        header.bool_value = header.type == kBoolTrue;
        return header;
    }

    struct ListHeader {
        int element_type = kStop;
        std::uint64_t size = 0;
    };

    ListHeader read_list() {
        std::uint8_t byte = take();
        ListHeader header;
        header.element_type = byte & 0x0F;
        header.size = byte >> 4;
        if (header.size == 15) header.size = read_varint();
        return header;
    }

    void skip(int type) {
        switch (type) {
            case kBoolTrue:
            case kBoolFalse:
                return;  // value lives in the field header
            case kByte:
                take();
                return;
            case kI16:
            case kI32:
            case kI64:
                read_varint();
                return;
            case kDouble:
                require(8);
                p_ += 8;
                return;
            case kBinary: {
                std::uint64_t len = read_varint();
                require(len);
                p_ += len;
                return;
            }
            case kList:
            case kSet: {
                ListHeader header = read_list();
                for (std::uint64_t i = 0; i < header.size; ++i) {
                    if (header.element_type == kBoolTrue || header.element_type == kBoolFalse) {
                        take();  // list bools are one byte each
                    } else {
                        skip(header.element_type);
                    }
                }
                return;
            }
            case kMap: {
                std::uint64_t size = read_varint();
                if (size == 0) return;
                std::uint8_t types = take();
                int key_type = types >> 4;
                int value_type = types & 0x0F;
                for (std::uint64_t i = 0; i < size; ++i) {
                    skip(key_type == kBoolTrue || key_type == kBoolFalse ? kByte : key_type);
                    skip(value_type == kBoolTrue || value_type == kBoolFalse ? kByte : value_type);
                }
                return;
            }
            case kStruct: {
                int last_id = 0;
                for (;;) {
                    FieldHeader field = read_field(last_id);
                    if (field.type == kStop) return;
                    skip(field.type);
                }
            }
            default:
                throw std::runtime_error("unknown thrift compact type " + std::to_string(type));
        }
    }

private:
    std::uint8_t take() {
        require(1);
        return *p_++;
    }

    void require(std::uint64_t n) const {
        if (static_cast<std::uint64_t>(end_ - p_) < n) {
            throw std::runtime_error("footer metadata truncated");
        }
    }

    const std::uint8_t* p_;
    const std::uint8_t* end_;
};

struct SchemaElement {
    std::string name;
    int physical_type = -1;
    int converted_type = -1;
    int num_children = 0;
    ColumnarTypeInfo::Logical logical = ColumnarTypeInfo::Logical::None;
    int integer_bit_width = 0;
    bool integer_is_signed = true;
};

ColumnarTypeInfo::Logical read_logical_union(CompactReader& reader, SchemaElement& element) {
    using L = ColumnarTypeInfo::Logical;
    L result = L::None;
    int last_id = 0;
    for (;;) {
        auto field = reader.read_field(last_id);
        if (field.type == kStop) return result;
        switch (field.id) {
            case 1: result = L::String; reader.skip(field.type); break;
            case 4: result = L::Enum; reader.skip(field.type); break;
            case 5: result = L::Decimal; reader.skip(field.type); break;
            case 6: result = L::Date; reader.skip(field.type); break;
            case 7: result = L::Time; reader.skip(field.type); break;
            case 8: result = L::Timestamp; reader.skip(field.type); break;
            case 10: {
                result = L::Integer;
                // IntType { 1: byte bitWidth; 2: bool isSigned }
                int inner_last = 0;
                for (;;) {
                    auto inner = reader.read_field(inner_last);
                    if (inner.type == kStop) break;
                    if (inner.id == 1 && inner.type == kByte) {
                        element.integer_bit_width = reader.read_byte();
                    } else if (inner.id == 2 &&
                               (inner.type == kBoolTrue || inner.type == kBoolFalse)) {
                        element.integer_is_signed = inner.bool_value;
                    } else {
                        reader.skip(inner.type);
                    }
                }
                break;
            }
            case 11: result = L::Unknown; reader.skip(field.type); break;
            case 12: result = L::Json; reader.skip(field.type); break;
            case 13: result = L::Bson; reader.skip(field.type); break;
            case 14: result = L::Uuid; reader.skip(field.type); break;
            case 15: result = L::Float16; reader.skip(field.type); break;
            default: reader.skip(field.type); break;
        }
    }
}

SchemaElement read_schema_element(CompactReader& reader) {
    SchemaElement element;
    int last_id = 0;
    for (;;) {
        auto field = reader.read_field(last_id);
        if (field.type == kStop) return element;
        switch (field.id) {
            case 1: element.physical_type = static_cast<int>(reader.read_zigzag()); break;
            case 4: element.name = reader.read_binary(); break;
            case 5: element.num_children = static_cast<int>(reader.read_zigzag()); break;
            case 6: element.converted_type = static_cast<int>(reader.read_zigzag()); break;
            case 10: element.logical = read_logical_union(reader, element); break;
            default: reader.skip(field.type); break;
        }
    }
}

bool is_wrapper_name(const std::string& name) {
    return name == "list" || name == "element" || name == "key_value";
}

// Depth-first walk of the flattened schema tree, emitting leaves with
// dotted paths.
void collect_leaves(const std::vector<SchemaElement>& elements, std::size_t& pos, int children,
                    const std::string& prefix, std::vector<ParquetColumn>& out) {
    for (int i = 0; i < children; ++i) {
        if (pos >= elements.size()) throw std::runtime_error("schema tree shorter than declared");
        const SchemaElement& element = elements[pos++];
        std::string path = prefix;
        if (!is_wrapper_name(element.name) || prefix.empty()) {
            path = prefix.empty() ? element.name : prefix + "." + element.name;
        }
        if (element.num_children > 0) {
            collect_leaves(elements, pos, element.num_children, path, out);
        } else {
            ColumnarTypeInfo info;
            info.physical_type = element.physical_type;
            info.converted_type = element.converted_type;
            info.logical = element.logical;
            info.integer_bit_width = element.integer_bit_width;
            info.integer_is_signed = element.integer_is_signed;
            auto [type, annotation] = map_columnar_type(info);
            out.push_back({path, type, annotation});
        }
    }
}

class ParquetHandler final : public FormatHandler {
public:
    ParquetHandler() {
        descriptor_.name = "parquet";
        descriptor_.extension_patterns = {".parquet"};
        descriptor_.priority = 3;
        descriptor_.sniff = [](const SniffWindow& window) {
            return window.raw.size() >= 4 && window.raw.compare(0, 4, "PAR1") == 0;
        };
    }

    const HandlerDescriptor& descriptor() const override { return descriptor_; }

    ExtractionResult extract(const std::filesystem::path& root,
                             const std::vector<DiscoveredFile>& files, const BakeOptions& options,
                             WarningSink& warnings) const override {
        ExtractionResult result;
        struct Loaded {
            const DiscoveredFile* file;
            ParquetFooter footer;
        };
        std::vector<Loaded> loaded;
        for (const auto& file : files) {
            try {
                loaded.push_back({&file, read_parquet_footer(root / file.relative_path)});
            } catch (const std::exception& e) {
                warn(warnings, file.relative_path, std::string("unreadable footer: ") + e.what());
                continue;
            }
            result.file_objects.push_back({file.relative_path, ""});
        }
        if (!options.group_partitions) {
            for (const auto& entry : loaded) emit_per_file(entry.file->relative_path, entry.footer, result);
            return result;
        }

        // Grouped mode: same directory + identical schema merge into one
        // RecordSet backed by a FileSet; mismatched directories fall back.
        std::map<std::string, std::vector<const Loaded*>> by_dir;
        for (const auto& entry : loaded) {
            const std::string& path = entry.file->relative_path;
            auto slash = path.rfind('/');
            by_dir[slash == std::string::npos ? std::string() : path.substr(0, slash)].push_back(
                &entry);
        }
        for (const auto& [dir, members] : by_dir) {
            bool uniform = true;
            for (const auto* member : members) {
                if (!same_schema(member->footer, members.front()->footer)) {
                    uniform = false;
                    break;
                }
            }
            if (!uniform || members.size() == 1) {
                if (!uniform) {
                    warn(warnings, dir.empty() ? "." : dir,
                         "schemas differ within directory; keeping one record set per file");
                }
                for (const auto* member : members) {
                    emit_per_file(member->file->relative_path, member->footer, result);
                }
                continue;
            }
            PendingFileSet set;
            set.name = dir.empty() ? "root" : dir;
            set.encoding_format = "application/x-parquet";
            std::uint64_t rows = 0;
            for (const auto* member : members) {
                set.includes.push_back(member->file->relative_path);
                set.member_paths.push_back(member->file->relative_path);
                rows += member->footer.num_rows;
            }
            result.file_sets.push_back(std::move(set));

            PendingRecordSet rs;
            auto slash = dir.rfind('/');
            rs.name = dir.empty() ? "root" : (slash == std::string::npos ? dir : dir.substr(slash + 1));
            rs.file_set_index = static_cast<int>(result.file_sets.size()) - 1;
            rs.description = "parquet table; partitions=" + std::to_string(members.size()) +
                             "; rows=" + std::to_string(rows);
            fill_fields(members.front()->footer, rs);
            result.record_sets.push_back(std::move(rs));
        }
        return result;
    }

private:
    static bool same_schema(const ParquetFooter& a, const ParquetFooter& b) {
        if (a.columns.size() != b.columns.size()) return false;
        for (std::size_t i = 0; i < a.columns.size(); ++i) {
            if (a.columns[i].dotted_path != b.columns[i].dotted_path ||
                a.columns[i].data_type != b.columns[i].data_type)
                return false;
        }
        return true;
    }

    static void fill_fields(const ParquetFooter& footer, PendingRecordSet& rs) {
        for (const auto& column : footer.columns) {
            PendingField field;
            field.name = column.dotted_path;
            field.data_type = column.data_type;
            field.description = column.annotation;
            field.column = column.dotted_path;
            rs.fields.push_back(std::move(field));
        }
    }

    static void emit_per_file(const std::string& path, const ParquetFooter& footer,
                              ExtractionResult& result) {
        PendingRecordSet rs;
        auto slash = path.rfind('/');
        std::string filename = slash == std::string::npos ? path : path.substr(slash + 1);
        rs.name = record_set_stem(filename);
        rs.primary_path = path;
        rs.description = "parquet table; rows=" + std::to_string(footer.num_rows);
        fill_fields(footer, rs);
        result.record_sets.push_back(std::move(rs));
    }

    HandlerDescriptor descriptor_;
};

}  // namespace

std::pair<DataType, std::string> map_columnar_type(const ColumnarTypeInfo& info) {
    using L = ColumnarTypeInfo::Logical;
    switch (info.logical) {
        case L::String:
        case L::Enum:
            return {DataType::Text, ""};
        case L::Json:
            return {DataType::Text, "json column"};
        case L::Bson:
            return {DataType::Text, "bson column; represented as text"};
        case L::Date:
            return {DataType::Date, ""};
        case L::Time:
            return {DataType::Time, ""};
        case L::Timestamp:
            return {DataType::DateTime, ""};
        case L::Float16:
            return {DataType::Float16, ""};
        case L::Decimal:
            return {DataType::Text, "decimal column; represented as text"};
        case L::Uuid:
            return {DataType::Text, "uuid column; represented as text"};
        case L::Interval:
            return {DataType::Text, "interval column; represented as text"};
        case L::Unknown:
            return {DataType::Text, ""};
        case L::Integer: {
            bool s = info.integer_is_signed;
            switch (info.integer_bit_width) {
                case 8: return {s ? DataType::Int8 : DataType::UInt8, ""};
                case 16: return {s ? DataType::Int16 : DataType::UInt16, ""};
                case 32: return {s ? DataType::Int32 : DataType::UInt32, ""};
                case 64: return {s ? DataType::Int64 : DataType::UInt64, ""};
                default: break;
            }
            return {DataType::Text, "integer of unsupported width; represented as text"};
        }
        case L::None:
            break;
    }
    switch (info.converted_type) {
        case 0: return {DataType::Text, ""};                                   // UTF8
        case 4: return {DataType::Text, ""};                                   // ENUM
        case 5: return {DataType::Text, "decimal column; represented as text"};  // DECIMAL
        case 6: return {DataType::Date, ""};                                   // DATE
        case 7:
        case 8: return {DataType::Time, ""};       // TIME_MILLIS / TIME_MICROS
        case 9:
        case 10: return {DataType::DateTime, ""};  // TIMESTAMP_*
        case 11: return {DataType::UInt8, ""};
        case 12: return {DataType::UInt16, ""};
        case 13: return {DataType::UInt32, ""};
        case 14: return {DataType::UInt64, ""};
        case 15: return {DataType::Int8, ""};
        case 16: return {DataType::Int16, ""};
        case 17: return {DataType::Int32, ""};
        case 18: return {DataType::Int64, ""};
        case 19: return {DataType::Text, "json column"};
        case 20: return {DataType::Text, "bson column; represented as text"};
        case 21: return {DataType::Text, "interval column; represented as text"};
        default: break;
    }
    switch (info.physical_type) {
        case 0: return {DataType::Boolean, ""};
        case 1: return {DataType::Int32, ""};
        case 2: return {DataType::Int64, ""};
        case 3: return {DataType::DateTime, "int96 timestamp"};
        case 4: return {DataType::Float32, ""};
        case 5: return {DataType::Float64, ""};
        case 6: return {DataType::Text, "binary column; represented as text"};
        case 7: return {DataType::Text, "binary column; represented as text"};
        default: break;
    }
    return {DataType::Text, "unrecognized column type; represented as text"};
}

ParquetFooter read_parquet_footer(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file");
    in.seekg(0, std::ios::end);
    std::int64_t size = in.tellg();
    if (size < 12) throw std::runtime_error("file too small for a parquet footer");
    char tail[8];
    in.seekg(size - 8);
    in.read(tail, 8);
    if (!in || std::memcmp(tail + 4, "PAR1", 4) != 0) {
        throw std::runtime_error("missing PAR1 footer magic");
    }
    std::uint32_t metadata_len = static_cast<std::uint8_t>(tail[0]) |
                                 (static_cast<std::uint8_t>(tail[1]) << 8) |
                                 (static_cast<std::uint8_t>(tail[2]) << 16) |
                                 (static_cast<std::uint8_t>(tail[3]) << 24);
    if (static_cast<std::int64_t>(metadata_len) + 8 > size) {
        throw std::runtime_error("footer length exceeds file size");
    }
    std::vector<std::uint8_t> blob(metadata_len);
    in.seekg(size - 8 - static_cast<std::int64_t>(metadata_len));
    in.read(reinterpret_cast<char*>(blob.data()), metadata_len);
    if (!in) throw std::runtime_error("footer metadata truncated on disk");

    ParquetFooter footer;
    footer.bytes_read = static_cast<std::uint64_t>(metadata_len) + 8;

    // FileMetaData { 2: list<SchemaElement> schema; 3: i64 num_rows; ... }
    CompactReader reader(blob.data(), blob.size());
    std::vector<SchemaElement> elements;
    int last_id = 0;
    for (;;) {
        auto field = reader.read_field(last_id);
        if (field.type == kStop) break;
        if (field.id == 2 && field.type == kList) {
            auto list = reader.read_list();
            elements.reserve(static_cast<std::size_t>(list.size));
            for (std::uint64_t i = 0; i < list.size; ++i) {
                elements.push_back(read_schema_element(reader));
            }
        } else if (field.id == 3 && (field.type == kI64 || field.type == kI32)) {
            footer.num_rows = static_cast<std::uint64_t>(reader.read_zigzag());
        } else {
            reader.skip(field.type);
        }
    }
    if (elements.empty()) throw std::runtime_error("footer carries no schema");
    std::size_t pos = 1;  // elements[0] is the root group
    collect_leaves(elements, pos, elements.front().num_children, "", footer.columns);
    return footer;
}

std::shared_ptr<FormatHandler> make_parquet_handler() {
    return std::make_shared<ParquetHandler>();
}

}  // namespace crbake

#include "crbake/dicom.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include "crbake/handlers.hpp"
#include "crbake/util.hpp"

namespace crbake {

namespace {

struct TagEntry {
    std::uint16_t group;
    std::uint16_t element;
    const char* keyword;
    const char* vr;  // for implicit-VR decoding
};

// PS3.6 subset: exactly the attributes this tool extracts.
constexpr TagEntry kDictionary[] = {
    {0x0002, 0x0010, "TransferSyntaxUID", "UI"},
    {0x0008, 0x0016, "SOPClassUID", "UI"},
    {0x0008, 0x0060, "Modality", "CS"},
    {0x0020, 0x000D, "StudyInstanceUID", "UI"},
    {0x0020, 0x000E, "SeriesInstanceUID", "UI"},
    {0x0028, 0x0004, "PhotometricInterpretation", "CS"},
    {0x0028, 0x0008, "NumberOfFrames", "IS"},
    {0x0028, 0x0010, "Rows", "US"},
    {0x0028, 0x0011, "Columns", "US"},
    {0x0028, 0x0100, "BitsAllocated", "US"},
};

const TagEntry* dictionary_entry(std::uint16_t group, std::uint16_t element) {
    for (const auto& entry : kDictionary) {
        if (entry.group == group && entry.element == element) return &entry;
    }
    return nullptr;
}

constexpr std::uint32_t kUndefinedLength = 0xFFFFFFFF;

bool is_long_form_vr(const std::string& vr) {
    static const char* kLong[] = {"OB", "OW", "OF", "OD", "OL", "OV", "SQ", "UC", "UR", "UT", "UN"};
    for (const char* v : kLong) {
        if (vr == v) return true;
    }
    return false;
}

class ByteReader {
public:
    explicit ByteReader(const std::string& bytes) : data_(bytes) {}

    bool eof() const { return pos_ >= data_.size(); }
    std::size_t pos() const { return pos_; }

    bool skip(std::uint64_t n) {
        if (data_.size() - pos_ < n) return false;
        pos_ += n;
        return true;
    }

    bool u16(std::uint16_t& out) {
        if (data_.size() - pos_ < 2) return false;
        out = std::uint16_t(std::uint8_t(data_[pos_]) | (std::uint8_t(data_[pos_ + 1]) << 8));
        pos_ += 2;
        return true;
    }

    bool u32(std::uint32_t& out) {
        if (data_.size() - pos_ < 4) return false;
        out = std::uint32_t(std::uint8_t(data_[pos_])) |
              (std::uint32_t(std::uint8_t(data_[pos_ + 1])) << 8) |
              (std::uint32_t(std::uint8_t(data_[pos_ + 2])) << 16) |
              (std::uint32_t(std::uint8_t(data_[pos_ + 3])) << 24);
        pos_ += 4;
        return true;
    }

    bool bytes(std::size_t n, std::string& out) {
        if (data_.size() - pos_ < n) return false;
        out.assign(data_, pos_, n);
        pos_ += n;
        return true;
    }

    bool peek_u16(std::uint16_t& out) const {
        if (data_.size() - pos_ < 2) return false;
        out = std::uint16_t(std::uint8_t(data_[pos_]) | (std::uint8_t(data_[pos_ + 1]) << 8));
        return true;
    }

private:
    const std::string& data_;
    std::size_t pos_ = 0;
};

std::string trim_value(std::string value) {
    while (!value.empty() && (value.back() == '\0' || value.back() == ' ')) value.pop_back();
    std::size_t start = 0;
    while (start < value.size() && value[start] == ' ') ++start;
    return value.substr(start);
}

std::string decode_value(const std::string& vr, const std::string& raw) {
    auto le16at = [&](std::size_t i) {
        return std::uint16_t(std::uint8_t(raw[i]) | (std::uint8_t(raw[i + 1]) << 8));
    };
    auto le32at = [&](std::size_t i) {
        return std::uint32_t(std::uint8_t(raw[i])) | (std::uint32_t(std::uint8_t(raw[i + 1])) << 8) |
               (std::uint32_t(std::uint8_t(raw[i + 2])) << 16) |
               (std::uint32_t(std::uint8_t(raw[i + 3])) << 24);
    };
    if (vr == "US" && raw.size() >= 2) return std::to_string(le16at(0));
    if (vr == "SS" && raw.size() >= 2) return std::to_string(static_cast<std::int16_t>(le16at(0)));
    if (vr == "UL" && raw.size() >= 4) return std::to_string(le32at(0));
    if (vr == "SL" && raw.size() >= 4) return std::to_string(static_cast<std::int32_t>(le32at(0)));
    if (vr == "FL" && raw.size() >= 4) {
        float f;
        std::uint32_t bits = le32at(0);
        std::memcpy(&f, &bits, 4);
        return format_double(f);
    }
    if (vr == "FD" && raw.size() >= 8) {
        double d;
        std::uint64_t bits = le32at(0) | (std::uint64_t(le32at(4)) << 32);
        std::memcpy(&d, &bits, 8);
        return format_double(d);
    }
    return trim_value(raw);
}

DataType type_for_vr(const std::string& vr) {
    if (vr == "US") return DataType::UInt16;
    if (vr == "SS") return DataType::Int16;
    if (vr == "UL") return DataType::UInt32;
    if (vr == "SL") return DataType::Int32;
    if (vr == "IS") return DataType::Int64;
    if (vr == "FL") return DataType::Float32;
    if (vr == "FD" || vr == "DS") return DataType::Float64;
    if (vr == "DA") return DataType::Date;
    if (vr == "TM") return DataType::Time;
    if (vr == "DT") return DataType::DateTime;
    return DataType::Text;
}

struct Element {
    std::uint16_t group = 0;
    std::uint16_t element = 0;
    std::string vr;
    std::uint32_t length = 0;
};

// Reads one element header. Explicit VR uses the two-byte VR code with the
// long form (2 reserved + 4-byte length) for the VR set above; implicit VR
// is always tag + 4-byte length. Delimitation items (group FFFE) carry no
// VR in either syntax.
bool read_element_header(ByteReader& reader, bool explicit_vr, Element& out) {
    if (!reader.u16(out.group) || !reader.u16(out.element)) return false;
    if (out.group == 0xFFFE) {
        out.vr.clear();
        return reader.u32(out.length);
    }
    if (!explicit_vr) {
        const TagEntry* entry = dictionary_entry(out.group, out.element);
        out.vr = entry ? entry->vr : "UN";
        return reader.u32(out.length);
    }
    std::string vr;
    if (!reader.bytes(2, vr)) return false;
    out.vr = vr;
    if (is_long_form_vr(vr)) {
        std::uint16_t reserved;
        return reader.u16(reserved) && reader.u32(out.length);
    }
    std::uint16_t short_length;
    if (!reader.u16(short_length)) return false;
    out.length = short_length;
    return true;
}

// Skips a sequence (or item) of undefined length by walking nested items
// until the matching delimiter.
bool skip_undefined(ByteReader& reader, bool explicit_vr, std::uint16_t end_element) {
    for (;;) {
        Element element;
        if (!read_element_header(reader, explicit_vr, element)) return false;
        if (element.group == 0xFFFE && element.element == end_element) return true;
        if (element.length == kUndefinedLength) {
            bool is_item = element.group == 0xFFFE && element.element == 0xE000;
            if (!skip_undefined(reader, explicit_vr, is_item ? 0xE00D : 0xE0DD)) return false;
        } else if (!reader.skip(element.length)) {
            return false;
        }
    }
}

}  // namespace

const char* ps36_keyword(std::uint16_t group, std::uint16_t element) {
    const TagEntry* entry = dictionary_entry(group, element);
    return entry ? entry->keyword : nullptr;
}

std::optional<DicomProfile> parse_dicom(const std::string& bytes) {
    if (bytes.size() < 132 || bytes.compare(128, 4, "DICM") != 0) return std::nullopt;
    ByteReader reader(bytes);
    if (!reader.skip(132)) return std::nullopt;

    DicomProfile profile;
    auto record = [&](const Element& element, const std::string& raw) {
        const TagEntry* entry = dictionary_entry(element.group, element.element);
        if (!entry) return;
        DicomAttribute attribute;
        attribute.group = element.group;
        attribute.element = element.element;
        attribute.keyword = entry->keyword;
        attribute.vr = element.vr.empty() ? entry->vr : element.vr;
        attribute.value = decode_value(attribute.vr, raw);
        profile.attributes.push_back(std::move(attribute));
    };

    // File meta group (0002,xxxx): always explicit VR little endian.
    std::uint16_t next_group;
    while (reader.peek_u16(next_group) && next_group == 0x0002) {
        Element element;
        if (!read_element_header(reader, true, element)) return std::nullopt;
        if (element.length == kUndefinedLength) return std::nullopt;
        std::string raw;
        if (!reader.bytes(element.length, raw)) return std::nullopt;
        if (element.group == 0x0002 && element.element == 0x0010) {
            profile.transfer_syntax = trim_value(raw);
            record(element, raw);
        }
    }

    bool explicit_vr;
    if (profile.transfer_syntax == "1.2.840.10008.1.2") {
        explicit_vr = false;
    } else if (profile.transfer_syntax == "1.2.840.10008.1.2.1") {
        explicit_vr = true;
    } else {
        profile.unsupported_transfer_syntax = true;
        return profile;
    }

    while (!reader.eof()) {
        Element element;
        if (!read_element_header(reader, explicit_vr, element)) break;
        if (element.group == 0x7FE0 && element.element == 0x0010) {
            break;  // stop before pixel data
        }
        if (element.length == kUndefinedLength) {
            bool is_item = element.group == 0xFFFE && element.element == 0xE000;
            if (!skip_undefined(reader, explicit_vr, is_item ? 0xE00D : 0xE0DD)) break;
            continue;
        }
        if (dictionary_entry(element.group, element.element) != nullptr && element.group != 0x0002) {
            std::string raw;
            if (!reader.bytes(element.length, raw)) break;
            record(element, raw);
        } else if (!reader.skip(element.length)) {
            break;
        }
    }
    return profile;
}

namespace {

std::string tag_text(std::uint16_t group, std::uint16_t element) {
    static const char* hex = "0123456789ABCDEF";
    std::string out = "(GGGG,EEEE)";
    auto put = [&](std::size_t at, std::uint16_t v) {
        out[at] = hex[(v >> 12) & 0xF];
        out[at + 1] = hex[(v >> 8) & 0xF];
        out[at + 2] = hex[(v >> 4) & 0xF];
        out[at + 3] = hex[v & 0xF];
    };
    put(1, group);
    put(6, element);
    return out;
}

class DicomHandler final : public FormatHandler {
public:
    DicomHandler() {
        descriptor_.name = "dicom";
        descriptor_.extension_patterns = {".dcm", ".dicom", ""};
        descriptor_.priority = 6;
        descriptor_.sniff = [](const SniffWindow& window) {
            return window.raw.size() >= 132 && window.raw.compare(128, 4, "DICM") == 0;
        };
    }

    const HandlerDescriptor& descriptor() const override { return descriptor_; }

    ExtractionResult extract(const std::filesystem::path& root,
                             const std::vector<DiscoveredFile>& files, const BakeOptions&,
                             WarningSink& warnings) const override {
        ExtractionResult result;
        for (const auto& file : files) {
            std::string bytes;
            {
                std::ifstream in(root / file.relative_path, std::ios::binary);
                if (!in) {
                    warn(warnings, file.relative_path, "cannot open file; skipped");
                    continue;
                }
                std::ostringstream buffer;
                buffer << in.rdbuf();
                bytes = buffer.str();
            }
            auto profile = parse_dicom(bytes);
            if (!profile) {
                warn(warnings, file.relative_path, "broken DICOM structure; skipped");
                continue;
            }
            result.file_objects.push_back({file.relative_path, "application/dicom"});
            if (profile->unsupported_transfer_syntax) {
                warn(warnings, file.relative_path,
                     "transfer syntax '" + profile->transfer_syntax +
                         "' not supported; file object only");
                continue;
            }
            PendingRecordSet rs;
            auto slash = file.relative_path.rfind('/');
            std::string filename = slash == std::string::npos ? file.relative_path
                                                              : file.relative_path.substr(slash + 1);
            rs.name = record_set_stem(filename);
            rs.primary_path = file.relative_path;
            rs.description = "dicom header; rows=1";
            for (const auto& attribute : profile->attributes) {
                PendingField field;
                field.name = attribute.keyword;
                field.data_type = type_for_vr(attribute.vr);
                field.description = tag_text(attribute.group, attribute.element) +
                                    " value=" + attribute.value;
                field.column = attribute.keyword;
                rs.fields.push_back(std::move(field));
            }
            if (rs.fields.empty()) {
                warn(warnings, file.relative_path, "no recognized attributes; file object only");
                continue;
            }
            result.record_sets.push_back(std::move(rs));
        }
        return result;
    }

private:
    HandlerDescriptor descriptor_;
};

}  // namespace

std::shared_ptr<FormatHandler> make_dicom_handler() { return std::make_shared<DicomHandler>(); }

}  // namespace crbake

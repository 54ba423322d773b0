#include "crbake/nifti.hpp"

#include <cstring>

#include "crbake/handlers.hpp"
#include "crbake/util.hpp"

namespace crbake {

namespace {

std::uint16_t swap16(std::uint16_t v) { return std::uint16_t((v >> 8) | (v << 8)); }

std::uint32_t swap32(std::uint32_t v) {
    return ((v >> 24) & 0xFF) | ((v >> 8) & 0xFF00) | ((v << 8) & 0xFF0000) | (v << 24);
}

std::uint64_t swap64(std::uint64_t v) {
    return (std::uint64_t(swap32(std::uint32_t(v))) << 32) | swap32(std::uint32_t(v >> 32));
}

class HeaderReader {
public:
    HeaderReader(const std::string& bytes, bool swapped) : data_(bytes), swapped_(swapped) {}

    std::int16_t i16(std::size_t offset) const {
        std::uint16_t v;
        std::memcpy(&v, data_.data() + offset, 2);
        if (swapped_) v = swap16(v);
        return static_cast<std::int16_t>(v);
    }

    std::int32_t i32(std::size_t offset) const {
        std::uint32_t v;
        std::memcpy(&v, data_.data() + offset, 4);
        if (swapped_) v = swap32(v);
        return static_cast<std::int32_t>(v);
    }

    std::int64_t i64(std::size_t offset) const {
        std::uint64_t v;
        std::memcpy(&v, data_.data() + offset, 8);
        if (swapped_) v = swap64(v);
        return static_cast<std::int64_t>(v);
    }

    float f32(std::size_t offset) const {
        std::uint32_t v;
        std::memcpy(&v, data_.data() + offset, 4);
        if (swapped_) v = swap32(v);
        float f;
        std::memcpy(&f, &v, 4);
        return f;
    }

    double f64(std::size_t offset) const {
        std::uint64_t v;
        std::memcpy(&v, data_.data() + offset, 8);
        if (swapped_) v = swap64(v);
        double d;
        std::memcpy(&d, &v, 8);
        return d;
    }

private:
    const std::string& data_;
    bool swapped_;
};

double time_unit_scale(int units_code) {
    switch (units_code & 0x38) {
        case 8: return 1.0;      // seconds
        case 16: return 1e-3;    // milliseconds
        case 24: return 1e-6;    // microseconds
        default: return 1.0;
    }
}

bool has_v1_magic(const std::string& bytes) {
    return bytes.size() >= 348 &&
           (bytes.compare(344, 3, "n+1") == 0 || bytes.compare(344, 3, "ni1") == 0);
}

bool has_v2_magic(const std::string& bytes) {
    if (bytes.size() < 8 || bytes.compare(4, 3, "n+2") != 0) return false;
    std::uint32_t size_le;
    std::memcpy(&size_le, bytes.data(), 4);
    return size_le == 540 || swap32(size_le) == 540;
}

}  // namespace

std::optional<NiftiProfile> parse_nifti(const std::string& bytes, bool& truncated) {
    truncated = false;
    if (has_v2_magic(bytes)) {
        if (bytes.size() < 540) {
            truncated = true;
            return std::nullopt;
        }
        std::uint32_t size_le;
        std::memcpy(&size_le, bytes.data(), 4);
        HeaderReader reader(bytes, size_le != 540);
        NiftiProfile profile;
        profile.version = 2;
        profile.data_type_code = reader.i16(12);
        std::int64_t rank = reader.i64(16);
        if (rank < 0 || rank > 7) return std::nullopt;
        for (std::int64_t i = 1; i <= rank; ++i) {
            profile.dims.push_back(reader.i64(16 + 8 * std::size_t(i)));
            profile.voxel_spacing.push_back(reader.f64(104 + 8 * std::size_t(i)));
        }
        if (rank >= 4) {
            profile.repetition_time = reader.f64(104 + 8 * 4) * time_unit_scale(reader.i32(500));
        }
        return profile;
    }
    if (!has_v1_magic(bytes)) {
        // The magic lives at offset 344; a shorter buffer that still opens
        // with the v1 sentinel is a truncated header, not a non-NIfTI file.
        if (bytes.size() >= 4 && bytes.size() < 348) {
            std::uint32_t size_le;
            std::memcpy(&size_le, bytes.data(), 4);
            if (size_le == 348 || swap32(size_le) == 348) {
                truncated = true;
            }
        }
        return std::nullopt;
    }
    std::uint32_t size_le;
    std::memcpy(&size_le, bytes.data(), 4);
    if (size_le != 348 && swap32(size_le) != 348) return std::nullopt;
    HeaderReader reader(bytes, size_le != 348);
    NiftiProfile profile;
    profile.version = 1;
    std::int16_t rank = reader.i16(40);
    if (rank < 0 || rank > 7) return std::nullopt;
    profile.data_type_code = reader.i16(70);
    for (std::int16_t i = 1; i <= rank; ++i) {
        profile.dims.push_back(reader.i16(40 + 2 * std::size_t(i)));
        profile.voxel_spacing.push_back(reader.f32(76 + 4 * std::size_t(i)));
    }
    if (rank >= 4) {
        int units = static_cast<unsigned char>(bytes[123]);
        profile.repetition_time = double(reader.f32(76 + 4 * 4)) * time_unit_scale(units);
    }
    return profile;
}

namespace {

template <typename T, typename Fmt>
std::string bracket_list(const std::vector<T>& values, Fmt fmt) {
    std::string out = "[";
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ",";
        out += fmt(values[i]);
    }
    out += "]";
    return out;
}

class NiftiHandler final : public FormatHandler {
public:
    NiftiHandler() {
        descriptor_.name = "nifti";
        descriptor_.extension_patterns = {".nii"};
        descriptor_.priority = 7;
        descriptor_.sniff = [](const SniffWindow& window) {
            return has_v1_magic(window.logical) || has_v2_magic(window.logical);
        };
    }

    const HandlerDescriptor& descriptor() const override { return descriptor_; }

    ExtractionResult extract(const std::filesystem::path& root,
                             const std::vector<DiscoveredFile>& files, const BakeOptions&,
                             WarningSink& warnings) const override {
        ExtractionResult result;
        for (const auto& file : files) {
            std::string header = logical_prefix(root / file.relative_path, 1024);
            bool truncated = false;
            auto profile = parse_nifti(header, truncated);
            if (!profile) {
                warn(warnings, file.relative_path,
                     truncated ? "header shorter than declared size; skipped"
                               : "unreadable header; skipped");
                continue;
            }
            result.file_objects.push_back({file.relative_path, ""});
            PendingRecordSet rs;
            auto slash = file.relative_path.rfind('/');
            std::string filename = slash == std::string::npos ? file.relative_path
                                                              : file.relative_path.substr(slash + 1);
            rs.name = record_set_stem(filename);
            rs.primary_path = file.relative_path;
            rs.description = "nifti header; rows=1";
            auto add = [&](std::string name, DataType type, std::string value) {
                PendingField field;
                field.name = name;
                field.data_type = type;
                field.description = "value=" + value;
                field.column = std::move(name);
                rs.fields.push_back(std::move(field));
            };
            add("dims", DataType::Int64,
                bracket_list(profile->dims, [](std::int64_t v) { return std::to_string(v); }));
            add("voxel_spacing", DataType::Float64,
                bracket_list(profile->voxel_spacing, [](double v) { return format_double(v); }));
            add("data_type_code", DataType::Int64, std::to_string(profile->data_type_code));
            add("version", DataType::Int64, std::to_string(profile->version));
            if (profile->repetition_time) {
                add("repetition_time", DataType::Float64, format_double(*profile->repetition_time));
            }
            result.record_sets.push_back(std::move(rs));
        }
        return result;
    }

private:
    HandlerDescriptor descriptor_;
};

}  // namespace

std::shared_ptr<FormatHandler> make_nifti_handler() { return std::make_shared<NiftiHandler>(); }

}  // namespace crbake

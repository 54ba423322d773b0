#include "crbake/imaging.hpp"

#include <cstring>
#include <fstream>

#include "crbake/handlers.hpp"
#include "crbake/util.hpp"

namespace crbake {

namespace {

std::uint32_t be32(const unsigned char* p) {
    return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) | (std::uint32_t(p[2]) << 8) |
           p[3];
}
std::uint16_t be16(const unsigned char* p) { return std::uint16_t((p[0] << 8) | p[1]); }
std::uint32_t le32(const unsigned char* p) {
    return std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) | (std::uint32_t(p[2]) << 16) |
           (std::uint32_t(p[3]) << 24);
}
std::uint32_t le24(const unsigned char* p) {
    return std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) | (std::uint32_t(p[2]) << 16);
}
std::uint16_t le16(const unsigned char* p) { return std::uint16_t(p[0] | (p[1] << 8)); }

std::optional<ImageProfile> probe_png(const unsigned char* d, std::size_t n) {
    static const unsigned char magic[8] = {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};
    if (n < 33 || std::memcmp(d, magic, 8) != 0) return std::nullopt;
    if (std::memcmp(d + 12, "IHDR", 4) != 0) return std::nullopt;
    ImageProfile profile;
    profile.format = "png";
    profile.width = be32(d + 16);
    profile.height = be32(d + 20);
    switch (d[25]) {  // color type
        case 0: profile.bands = 1; break;
        case 2: profile.bands = 3; break;
        case 3: profile.bands = 3; break;  // palette expands to rgb
        case 4: profile.bands = 2; break;
        case 6: profile.bands = 4; break;
        default: profile.bands = 1; break;
    }
    return profile;
}

std::optional<ImageProfile> probe_jpeg(const unsigned char* d, std::size_t n) {
    if (n < 4 || d[0] != 0xFF || d[1] != 0xD8) return std::nullopt;
    std::size_t pos = 2;
    while (pos + 4 <= n) {
        if (d[pos] != 0xFF) {
            ++pos;  // fill bytes
            continue;
        }
        unsigned char marker = d[pos + 1];
        if (marker == 0xFF) {
            ++pos;
            continue;
        }
        if (marker == 0xD8 || (marker >= 0xD0 && marker <= 0xD7) || marker == 0x01) {
            pos += 2;  // no payload
            continue;
        }
        if (pos + 4 > n) break;
        std::size_t length = be16(d + pos + 2);
        if (length < 2) break;
        bool is_sof = marker >= 0xC0 && marker <= 0xCF && marker != 0xC4 && marker != 0xC8 &&
                      marker != 0xCC;
        if (is_sof) {
            if (pos + 2 + 8 > n) break;
            ImageProfile profile;
            profile.format = "jpeg";
            profile.height = be16(d + pos + 5);
            profile.width = be16(d + pos + 7);
            profile.bands = d[pos + 9];
            return profile;
        }
        if (marker == 0xDA) break;  // entropy-coded data begins
        pos += 2 + length;
    }
    return std::nullopt;
}

std::optional<ImageProfile> probe_gif(const unsigned char* d, std::size_t n) {
    if (n < 10) return std::nullopt;
    if (std::memcmp(d, "GIF87a", 6) != 0 && std::memcmp(d, "GIF89a", 6) != 0) return std::nullopt;
    ImageProfile profile;
    profile.format = "gif";
    profile.width = le16(d + 6);
    profile.height = le16(d + 8);
    profile.bands = 3;
    return profile;
}

std::optional<ImageProfile> probe_bmp(const unsigned char* d, std::size_t n) {
    if (n < 30 || d[0] != 'B' || d[1] != 'M') return std::nullopt;
    ImageProfile profile;
    profile.format = "bmp";
    profile.width = static_cast<std::int32_t>(le32(d + 18));
    auto height = static_cast<std::int32_t>(le32(d + 22));
    profile.height = height < 0 ? -static_cast<std::int64_t>(height) : height;
    std::uint16_t bits = le16(d + 28);
    profile.bands = bits <= 8 ? 3 : bits / 8;  // palette images decode to rgb
    return profile;
}

std::optional<ImageProfile> probe_webp(const unsigned char* d, std::size_t n) {
    if (n < 30 || std::memcmp(d, "RIFF", 4) != 0 || std::memcmp(d + 8, "WEBP", 4) != 0) {
        return std::nullopt;
    }
    ImageProfile profile;
    profile.format = "webp";
    const unsigned char* chunk = d + 12;
    if (std::memcmp(chunk, "VP8X", 4) == 0) {
        profile.bands = (chunk[8] & 0x10) ? 4 : 3;
        profile.width = static_cast<std::int64_t>(le24(chunk + 12)) + 1;
        profile.height = static_cast<std::int64_t>(le24(chunk + 15)) + 1;
        return profile;
    }
    if (std::memcmp(chunk, "VP8 ", 4) == 0) {
        const unsigned char* p = chunk + 8;
        if (n < 30 || p[3] != 0x9D || p[4] != 0x01 || p[5] != 0x2A) return std::nullopt;
        profile.width = le16(p + 6) & 0x3FFF;
        profile.height = le16(p + 8) & 0x3FFF;
        profile.bands = 3;
        return profile;
    }
    if (std::memcmp(chunk, "VP8L", 4) == 0) {
        const unsigned char* p = chunk + 8;
        if (p[0] != 0x2F) return std::nullopt;
        std::uint32_t bits = le32(p + 1);
        profile.width = (bits & 0x3FFF) + 1;
        profile.height = ((bits >> 14) & 0x3FFF) + 1;
        profile.bands = (bits >> 28) & 1 ? 4 : 3;
        return profile;
    }
    return std::nullopt;
}

std::optional<ImageProfile> probe_tiff(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) return std::nullopt;
    unsigned char header[8];
    in.read(reinterpret_cast<char*>(header), 8);
    if (!in) return std::nullopt;
    bool little;
    if (std::memcmp(header, "II", 2) == 0) {
        little = true;
    } else if (std::memcmp(header, "MM", 2) == 0) {
        little = false;
    } else {
        return std::nullopt;
    }
    auto rd16 = [&](const unsigned char* p) { return little ? le16(p) : be16(p); };
    auto rd32 = [&](const unsigned char* p) { return little ? le32(p) : be32(p); };
    if (rd16(header + 2) != 42) return std::nullopt;
    std::uint32_t ifd_offset = rd32(header + 4);
    in.seekg(ifd_offset);
    unsigned char count_buf[2];
    in.read(reinterpret_cast<char*>(count_buf), 2);
    if (!in) return std::nullopt;
    std::uint16_t entries = rd16(count_buf);
    ImageProfile profile;
    profile.format = "tiff";
    profile.bands = 1;  // SamplesPerPixel defaults to 1
    bool saw_width = false, saw_height = false;
    for (std::uint16_t i = 0; i < entries; ++i) {
        unsigned char entry[12];
        in.read(reinterpret_cast<char*>(entry), 12);
        if (!in) return std::nullopt;
        std::uint16_t tag = rd16(entry);
        std::uint16_t type = rd16(entry + 2);
        std::uint32_t value;
        if (type == 3) {  // SHORT, stored in the first two value bytes
            value = rd16(entry + 8);
        } else if (type == 4) {
            value = rd32(entry + 8);
        } else {
            continue;
        }
        if (tag == 256) {
            profile.width = value;
            saw_width = true;
        } else if (tag == 257) {
            profile.height = value;
            saw_height = true;
        } else if (tag == 277) {
            profile.bands = value;
        }
    }
    if (!saw_width || !saw_height) return std::nullopt;
    return profile;
}

constexpr std::size_t kImageProbeBytes = 1 << 20;

class ImageHandler final : public FormatHandler {
public:
    ImageHandler() {
        descriptor_.name = "image";
        descriptor_.extension_patterns = {".jpg", ".jpeg", ".png",  ".gif",
                                          ".bmp", ".tif",  ".tiff", ".webp"};
        descriptor_.priority = 5;
    }

    const HandlerDescriptor& descriptor() const override { return descriptor_; }

    ExtractionResult extract(const std::filesystem::path& root,
                             const std::vector<DiscoveredFile>& files, const BakeOptions&,
                             WarningSink& warnings) const override {
        ExtractionResult result;
        std::string first_decoded;
        std::vector<std::pair<std::string, ImageProfile>> decoded;
        for (const auto& file : files) {
            result.file_objects.push_back({file.relative_path, ""});
            auto profile = probe_image(root / file.relative_path);
            if (!profile) {
                warn(warnings, file.relative_path,
                     "image header did not decode; omitted from image summary");
                continue;
            }
            decoded.emplace_back(file.relative_path, *profile);
        }
        if (decoded.empty()) return result;

        PendingRecordSet rs;
        rs.name = "images";
        rs.primary_path = decoded.front().first;
        rs.description = "image summary; rows=" + std::to_string(decoded.size());
        const char* names[] = {"file_name", "width", "height", "bands", "format"};
        DataType types[] = {DataType::Text, DataType::Int64, DataType::Int64, DataType::Int64,
                            DataType::Text};
        for (int i = 0; i < 5; ++i) {
            PendingField field;
            field.name = names[i];
            field.data_type = types[i];
            field.column = names[i];
            rs.fields.push_back(std::move(field));
        }
        result.record_sets.push_back(std::move(rs));
        return result;
    }

private:
    HandlerDescriptor descriptor_;
};

}  // namespace

std::optional<ImageProfile> probe_image(const std::filesystem::path& file) {
    std::string prefix = read_prefix(file, kImageProbeBytes);
    const auto* d = reinterpret_cast<const unsigned char*>(prefix.data());
    std::size_t n = prefix.size();
    if (auto p = probe_png(d, n)) return p;
    if (auto p = probe_gif(d, n)) return p;
    if (auto p = probe_bmp(d, n)) return p;
    if (auto p = probe_webp(d, n)) return p;
    if (auto p = probe_jpeg(d, n)) return p;
    if (n >= 8 && (std::memcmp(d, "II", 2) == 0 || std::memcmp(d, "MM", 2) == 0)) {
        return probe_tiff(file);
    }
    return std::nullopt;
}

std::shared_ptr<FormatHandler> make_image_handler() { return std::make_shared<ImageHandler>(); }

}  // namespace crbake

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace crbake {

struct ImageProfile {
    std::int64_t width = 0;
    std::int64_t height = 0;
    std::int64_t bands = 1;
    std::string format;
};

/// Header-only probe: PNG, JPEG, GIF, BMP, WebP, TIFF. TIFF reads its IFD
/// via targeted seeks (band count from SamplesPerPixel); the others parse a
/// bounded prefix. Returns nullopt when no header decodes.
std::optional<ImageProfile> probe_image(const std::filesystem::path& file);

}  // namespace crbake

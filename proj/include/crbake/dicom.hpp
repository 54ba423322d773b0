#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace crbake {

struct DicomAttribute {
    std::uint16_t group = 0;
    std::uint16_t element = 0;
    std::string keyword;
    std::string vr;
    std::string value;
};

struct DicomProfile {
    std::vector<DicomAttribute> attributes;  // file order
    std::string transfer_syntax;
    bool unsupported_transfer_syntax = false;
};

/// Minimal PS3.6 lookup covering every tag this tool emits. Returns
/// nullptr for tags outside the bundled table.
const char* ps36_keyword(std::uint16_t group, std::uint16_t element);

/// Parses preamble, file meta, and dataset elements up to (but never
/// including) PixelData. Returns nullopt when the DICM magic is absent or
/// the stream is structurally broken.
std::optional<DicomProfile> parse_dicom(const std::string& bytes);

}  // namespace crbake

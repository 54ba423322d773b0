#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace crbake {

struct NiftiProfile {
    int version = 1;                    // 1 or 2
    std::vector<std::int64_t> dims;     // dim[1..rank]
    std::vector<double> voxel_spacing;  // pixdim[1..rank]
    std::int64_t data_type_code = 0;
    std::optional<double> repetition_time;  // seconds, present when rank >= 4
};

/// Parses a NIfTI-1 (348-byte) or NIfTI-2 (540-byte) header, handling the
/// opposite-endian layout via the sizeof_hdr sentinel. Returns nullopt when
/// the magic is absent; sets `truncated` instead when the magic is present
/// but the buffer ends before the declared header size.
std::optional<NiftiProfile> parse_nifti(const std::string& bytes, bool& truncated);

}  // namespace crbake

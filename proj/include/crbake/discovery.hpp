#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "crbake/util.hpp"

namespace crbake {

/// One filesystem entry under the dataset root. The digest covers the
/// stored bytes; compressed files are hashed as-is, never decompressed.
struct DiscoveredFile {
    std::string relative_path;  // '/'-separated, never escapes the root
    std::uint64_t byte_size = 0;
    std::string sha256;  // 64 lowercase hex chars
};

struct HashResult {
    std::string sha256;
    std::uint64_t byte_size = 0;
};

/// Streams the file through SHA-256 in fixed-size chunks.
/// Throws std::runtime_error when the file cannot be read.
HashResult hash_file(const std::filesystem::path& path);

/// Recursively enumerates regular files under `root`, hidden files included,
/// sorted lexicographically by relative path. Symlinks are followed only when
/// they resolve inside the root; anything else is skipped with a warning, as
/// are unreadable files. Throws std::runtime_error when the root itself is
/// missing or unreadable.
std::vector<DiscoveredFile> discover_files(const std::filesystem::path& root,
                                           WarningSink& warnings);

}  // namespace crbake

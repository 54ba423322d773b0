#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace crbake {

/// One diagnostic produced while processing a file. Never fatal on its own.
struct Warning {
    std::string path;
    std::string message;
};

using WarningSink = std::vector<Warning>;

inline void warn(WarningSink& sink, std::string path, std::string message) {
    sink.push_back({std::move(path), std::move(message)});
}

enum class Compression { None, Gzip, Bzip2, Xz };

/// Compression wrapper implied by the last path suffix (.gz/.bz2/.xz).
Compression compression_of(std::string_view path);

/// "hosp/admissions.csv.gz" -> "hosp/admissions.csv"
std::string strip_compression_suffix(std::string_view path);

/// Filename stem with every recognized extension stripped:
/// "admissions.csv.gz" -> "admissions", "vol.nii.gz" -> "vol".
std::string record_set_stem(std::string_view filename);

/// Case-insensitive suffix test on the path's final component(s).
bool has_suffix(std::string_view path, std::string_view suffix);

/// Replaces characters outside [A-Za-z0-9_] with '_'.
std::string sanitize_id(std::string_view raw);

std::string to_lower(std::string_view s);

/// Opens a file for reading, transparently decompressing by suffix.
/// Returns nullptr when the file cannot be opened.
std::unique_ptr<std::istream> open_decompressed(const std::filesystem::path& file);

/// Raw byte prefix of a file, at most `limit` bytes.
std::string read_prefix(const std::filesystem::path& file, std::size_t limit);

/// Prefix after undoing a gzip wrapper when present (bounded output).
/// Non-gzip inputs are returned as-is; undecodable gzip yields what could
/// be inflated before the error.
std::string logical_prefix(const std::filesystem::path& file, std::size_t limit);

/// Media type for a relative path. The outer compression wrapper wins
/// (".csv.gz" -> "application/gzip"), matching how the files sit on disk.
std::string media_type_for(std::string_view relative_path);

/// Shortest round-trip decimal rendering of a double ("360", "2.5").
std::string format_double(double v);

}  // namespace crbake

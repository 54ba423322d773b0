#include "crbake/util.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include <boost/iostreams/device/array.hpp>
#include <boost/iostreams/filter/bzip2.hpp>
#include <boost/iostreams/filter/gzip.hpp>
#include <boost/iostreams/filter/lzma.hpp>
#include <boost/iostreams/filtering_stream.hpp>

namespace io = boost::iostreams;

namespace crbake {

namespace {

bool iequals(std::string_view a, std::string_view b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::tolower(static_cast<unsigned char>(a[i])) !=
            std::tolower(static_cast<unsigned char>(b[i])))
            return false;
    }
    return true;
}

// Extensions the tool understands, used when deriving RecordSet names.
constexpr std::array<std::string_view, 22> kKnownExtensions = {
    ".gz",   ".bz2",  ".xz",   ".csv", ".tsv",  ".parquet", ".json",
    ".jsonl", ".ndjson", ".hea", ".dat", ".atr", ".jpg",     ".jpeg",
    ".png",  ".tif",  ".tiff", ".gif", ".bmp",  ".webp",     ".dcm",
    ".nii"};

}  // namespace

Compression compression_of(std::string_view path) {
    if (has_suffix(path, ".gz")) return Compression::Gzip;
    if (has_suffix(path, ".bz2")) return Compression::Bzip2;
    if (has_suffix(path, ".xz")) return Compression::Xz;
    return Compression::None;
}

bool has_suffix(std::string_view path, std::string_view suffix) {
    if (path.size() < suffix.size()) return false;
    return iequals(path.substr(path.size() - suffix.size()), suffix);
}

std::string strip_compression_suffix(std::string_view path) {
    for (std::string_view s : {".gz", ".bz2", ".xz"}) {
        if (has_suffix(path, s)) return std::string(path.substr(0, path.size() - s.size()));
    }
    return std::string(path);
}

std::string record_set_stem(std::string_view filename) {
    std::string name(filename);
    for (;;) {
        auto dot = name.rfind('.');
        if (dot == std::string::npos || dot == 0) break;
        std::string_view ext = std::string_view(name).substr(dot);
        bool known = std::any_of(kKnownExtensions.begin(), kKnownExtensions.end(),
                                 [&](std::string_view k) { return iequals(ext, k); });
        if (!known) break;
        name.resize(dot);
    }
    return name;
}

std::string sanitize_id(std::string_view raw) {
    std::string out(raw);
    for (char& c : out) {
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') c = '_';
    }
    return out;
}

std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::unique_ptr<std::istream> open_decompressed(const std::filesystem::path& file) {
    auto raw = std::make_unique<std::ifstream>(file, std::ios::binary);
    if (!raw->is_open()) return nullptr;
    Compression c = compression_of(file.generic_string());
    if (c == Compression::None) return raw;

    // The filtering stream owns the file stream.
    struct Owned : io::filtering_istream {
        std::unique_ptr<std::ifstream> file;
    };
    auto owned = std::make_unique<Owned>();
    switch (c) {
        case Compression::Gzip: owned->push(io::gzip_decompressor()); break;
        case Compression::Bzip2: owned->push(io::bzip2_decompressor()); break;
        case Compression::Xz: owned->push(io::lzma_decompressor()); break;
        case Compression::None: break;
    }
    owned->push(*raw);
    owned->file = std::move(raw);
    return owned;
}

std::string read_prefix(const std::filesystem::path& file, std::size_t limit) {
    std::ifstream in(file, std::ios::binary);
    if (!in.is_open()) return {};
    std::string buf(limit, '\0');
    in.read(buf.data(), static_cast<std::streamsize>(limit));
    buf.resize(static_cast<std::size_t>(in.gcount()));
    return buf;
}

std::string logical_prefix(const std::filesystem::path& file, std::size_t limit) {
    std::string head = read_prefix(file, 6);
    enum { kNone, kGzip, kBzip2, kXz } magic = kNone;
    if (head.size() >= 2 && static_cast<unsigned char>(head[0]) == 0x1f &&
        static_cast<unsigned char>(head[1]) == 0x8b) {
        magic = kGzip;
    } else if (head.size() >= 3 && head.compare(0, 3, "BZh") == 0) {
        magic = kBzip2;
    } else if (head.size() >= 6 && head.compare(0, 6, "\xFD"
                                                      "7zXZ\x00", 6) == 0) {
        magic = kXz;
    }
    if (magic == kNone) return read_prefix(file, limit);

    // The limit bounds decompressed output; compressed input is pulled lazily.
    std::string out;
    out.reserve(limit);
    try {
        std::ifstream raw(file, std::ios::binary);
        if (!raw.is_open()) return {};
        io::filtering_istream in;
        switch (magic) {
            case kGzip: in.push(io::gzip_decompressor()); break;
            case kBzip2: in.push(io::bzip2_decompressor()); break;
            case kXz: in.push(io::lzma_decompressor()); break;
            case kNone: break;
        }
        in.push(raw);
        char chunk[4096];
        while (out.size() < limit && in.good()) {
            in.read(chunk, static_cast<std::streamsize>(
                               std::min(sizeof chunk, limit - out.size())));
            auto got = static_cast<std::size_t>(in.gcount());
            if (got == 0) break;
            out.append(chunk, got);
        }
    } catch (const std::exception&) {
        // Truncated member: keep whatever inflated cleanly.
    }
    return out;
}

std::string media_type_for(std::string_view relative_path) {
    switch (compression_of(relative_path)) {
        case Compression::Gzip: return "application/gzip";
        case Compression::Bzip2: return "application/x-bzip2";
        case Compression::Xz: return "application/x-xz";
        case Compression::None: break;
    }
    if (has_suffix(relative_path, ".csv")) return "text/csv";
    if (has_suffix(relative_path, ".tsv")) return "text/tab-separated-values";
    if (has_suffix(relative_path, ".parquet")) return "application/x-parquet";
    if (has_suffix(relative_path, ".json")) return "application/json";
    if (has_suffix(relative_path, ".jsonl") || has_suffix(relative_path, ".ndjson"))
        return "application/x-ndjson";
    if (has_suffix(relative_path, ".hea")) return "text/plain";
    if (has_suffix(relative_path, ".jpg") || has_suffix(relative_path, ".jpeg"))
        return "image/jpeg";
    if (has_suffix(relative_path, ".png")) return "image/png";
    if (has_suffix(relative_path, ".tif") || has_suffix(relative_path, ".tiff"))
        return "image/tiff";
    if (has_suffix(relative_path, ".gif")) return "image/gif";
    if (has_suffix(relative_path, ".bmp")) return "image/bmp";
    if (has_suffix(relative_path, ".webp")) return "image/webp";
    if (has_suffix(relative_path, ".dcm") || has_suffix(relative_path, ".dicom"))
        return "application/dicom";
    if (has_suffix(relative_path, ".nii")) return "application/x-nifti";
    return "application/octet-stream";
}

std::string format_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc{}) return "0";
    return std::string(buf, end);
}

}  // namespace crbake

#include "crbake/discovery.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <openssl/evp.h>

namespace fs = std::filesystem;

namespace crbake {

namespace {

std::string hex_digest(const unsigned char* digest, unsigned len) {
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out(static_cast<std::size_t>(len) * 2, '0');
    for (unsigned i = 0; i < len; ++i) {
        out[2 * i] = kHex[digest[i] >> 4];
        out[2 * i + 1] = kHex[digest[i] & 0xf];
    }
    return out;
}

struct EvpCtx {
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    ~EvpCtx() { EVP_MD_CTX_free(ctx); }
};

// Path of `target` relative to `root`, or empty when it escapes the root.
bool inside_root(const fs::path& canonical_root, const fs::path& target) {
    std::error_code ec;
    fs::path canonical = fs::weakly_canonical(target, ec);
    if (ec) return false;
    auto root_it = canonical_root.begin();
    auto it = canonical.begin();
    for (; root_it != canonical_root.end(); ++root_it, ++it) {
        if (it == canonical.end() || *it != *root_it) return false;
    }
    return true;
}

}  // namespace

HashResult hash_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in.is_open()) throw std::runtime_error("cannot open " + path.string());

    EvpCtx md;
    if (!md.ctx || EVP_DigestInit_ex(md.ctx, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256 init failed");

    // 1 MiB chunks keep memory flat for multi-gigabyte files.
    std::vector<char> buf(1 << 20);
    std::uint64_t total = 0;
    while (in.good()) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        auto got = static_cast<std::size_t>(in.gcount());
        if (got == 0) break;
        total += got;
        if (EVP_DigestUpdate(md.ctx, buf.data(), got) != 1)
            throw std::runtime_error("sha256 update failed");
    }
    if (in.bad()) throw std::runtime_error("read failure on " + path.string());

    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned len = 0;
    if (EVP_DigestFinal_ex(md.ctx, digest, &len) != 1)
        throw std::runtime_error("sha256 final failed");
    return {hex_digest(digest, len), total};
}

std::vector<DiscoveredFile> discover_files(const fs::path& root, WarningSink& warnings) {
    std::error_code ec;
    fs::path canonical_root = fs::canonical(root, ec);
    if (ec || !fs::is_directory(canonical_root))
        throw std::runtime_error("dataset root not readable: " + root.string());

    std::vector<DiscoveredFile> out;
    fs::recursive_directory_iterator it(
        canonical_root, fs::directory_options::follow_directory_symlink, ec);
    if (ec) throw std::runtime_error("dataset root not readable: " + root.string());

    for (auto end = fs::recursive_directory_iterator(); it != end; it.increment(ec)) {
        if (ec) throw std::runtime_error("traversal failed under " + root.string());
        const fs::directory_entry& entry = *it;
        // Lexical only: fs::relative would resolve symlinks and rewrite paths.
        std::string rel = entry.path().lexically_relative(canonical_root).generic_string();
        if (rel.empty()) continue;

        if (entry.is_symlink()) {
            if (!inside_root(canonical_root, entry.path())) {
                warn(warnings, rel, "symlink target outside dataset root, skipped");
                if (entry.is_directory()) it.disable_recursion_pending();
                continue;
            }
        }
        if (!entry.is_regular_file()) continue;

        try {
            HashResult h = hash_file(entry.path());
            out.push_back({std::move(rel), h.byte_size, std::move(h.sha256)});
        } catch (const std::exception& e) {
            warn(warnings, rel, std::string("unreadable, skipped: ") + e.what());
        }
    }

    std::sort(out.begin(), out.end(), [](const DiscoveredFile& a, const DiscoveredFile& b) {
        return a.relative_path < b.relative_path;
    });
    return out;
}

}  // namespace crbake

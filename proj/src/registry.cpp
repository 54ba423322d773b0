#include "crbake/registry.hpp"

#include <algorithm>
#include <stdexcept>

#include "crbake/handlers.hpp"

namespace crbake {

HandlerRegistry HandlerRegistry::builtin() {
    HandlerRegistry registry;
    registry.register_handler(make_fhir_handler());
    registry.register_handler(make_json_handler());
    registry.register_handler(make_tabular_handler());
    registry.register_handler(make_parquet_handler());
    registry.register_handler(make_wfdb_handler());
    registry.register_handler(make_image_handler());
    registry.register_handler(make_dicom_handler());
    registry.register_handler(make_nifti_handler());
    return registry;
}

void HandlerRegistry::register_handler(std::shared_ptr<FormatHandler> handler) {
    const std::string& name = handler->descriptor().name;
    for (const auto& existing : handlers_) {
        if (existing->descriptor().name == name) {
            throw std::invalid_argument("handler name already registered: " + name);
        }
    }
    handlers_.push_back(std::move(handler));
}

namespace {

bool pattern_matches(const std::string& pattern, const std::string& path) {
    if (pattern.empty()) return true;
    if (has_suffix(path, pattern)) return true;
    std::string inner = strip_compression_suffix(path);
    return inner.size() != path.size() && has_suffix(inner, pattern);
}

}  // namespace

const FormatHandler* HandlerRegistry::dispatch(const DiscoveredFile& file,
                                               const SniffWindow& window) const {
    std::vector<const FormatHandler*> order;
    order.reserve(handlers_.size());
    for (const auto& h : handlers_) order.push_back(h.get());
    std::stable_sort(order.begin(), order.end(), [](const FormatHandler* a, const FormatHandler* b) {
        return a->descriptor().priority < b->descriptor().priority;
    });
    for (const FormatHandler* handler : order) {
        const HandlerDescriptor& desc = handler->descriptor();
        bool extension_ok = false;
        for (const auto& pattern : desc.extension_patterns) {
            if (pattern_matches(pattern, file.relative_path)) {
                extension_ok = true;
                break;
            }
        }
        if (!extension_ok) continue;
        if (desc.sniff && !desc.sniff(window)) continue;
        return handler;
    }
    return nullptr;
}

SniffWindow read_sniff_window(const std::filesystem::path& absolute_path,
                              const std::string& relative_path) {
    SniffWindow window;
    window.raw = read_prefix(absolute_path, kSniffWindowBytes);
    if (compression_of(relative_path) != Compression::None) {
        window.logical = logical_prefix(absolute_path, kSniffWindowBytes);
    } else {
        window.logical = window.raw;
    }
    return window;
}

}  // namespace crbake

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace crbake {

struct WfdbSignal {
    std::string data_file;
    std::string format;
    double gain = 200.0;  // format default when unspecified
    std::string lead_name;
};

struct WfdbHeader {
    std::string record_name;
    bool multi_segment = false;  // record name carried a segment count
    int num_signals = 0;
    double sampling_frequency = 250.0;  // format default
    std::uint64_t num_samples = 0;
    std::vector<WfdbSignal> signals;
};

/// Parses a .hea header from text. Comment lines (#) are ignored. Returns
/// nullopt when the record line is malformed; a signal-line shortfall
/// truncates signals and reports through `truncated`.
std::optional<WfdbHeader> parse_wfdb_header(const std::string& text, bool& truncated);

}  // namespace crbake

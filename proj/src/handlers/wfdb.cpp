#include "crbake/wfdb.hpp"

#include <cctype>
#include <charconv>
#include <set>
#include <sstream>

#include "crbake/handlers.hpp"
#include "crbake/util.hpp"

namespace crbake {

namespace {

std::vector<std::string> tokens_of(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream in(line);
    std::string token;
    while (in >> token) out.push_back(token);
    return out;
}

// Leading numeric portion of a token like "360", "360/1000" or "200(1024)/mV".
std::optional<double> leading_number(const std::string& token) {
    std::size_t end = 0;
    while (end < token.size() &&
           (std::isdigit(static_cast<unsigned char>(token[end])) || token[end] == '.' ||
            token[end] == '-' || token[end] == '+' || token[end] == 'e' || token[end] == 'E'))
        ++end;
    if (end == 0) return std::nullopt;
    double value = 0;
    auto [p, ec] = std::from_chars(token.data(), token.data() + end, value);
    if (ec != std::errc{} || p == token.data()) return std::nullopt;
    return value;
}

}  // namespace

std::optional<WfdbHeader> parse_wfdb_header(const std::string& text, bool& truncated) {
    truncated = false;
    std::istringstream in(text);
    std::string line;
    std::vector<std::vector<std::string>> content;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;
        content.push_back(tokens_of(line));
    }
    if (content.empty() || content.front().size() < 2) return std::nullopt;

    const auto& record_line = content.front();
    WfdbHeader header;
    header.record_name = record_line[0];
    auto slash = header.record_name.find('/');
    if (slash != std::string::npos) {
        header.multi_segment = true;
        header.record_name = header.record_name.substr(0, slash);
    }
    auto nsig = leading_number(record_line[1]);
    if (!nsig || *nsig < 0) return std::nullopt;
    header.num_signals = static_cast<int>(*nsig);
    if (record_line.size() > 2) {
        if (auto fs = leading_number(record_line[2]); fs && *fs > 0) {
            header.sampling_frequency = *fs;
        }
    }
    if (record_line.size() > 3) {
        if (auto n = leading_number(record_line[3]); n && *n >= 0) {
            header.num_samples = static_cast<std::uint64_t>(*n);
        }
    }
    if (header.multi_segment) return header;

    std::size_t available = content.size() - 1;
    if (available < static_cast<std::size_t>(header.num_signals)) {
        truncated = true;
        header.num_signals = static_cast<int>(available);
    }
    for (int i = 0; i < header.num_signals; ++i) {
        const auto& tokens = content[static_cast<std::size_t>(i) + 1];
        WfdbSignal signal;
        if (!tokens.empty()) signal.data_file = tokens[0];
        if (tokens.size() > 1) signal.format = tokens[1];
        if (tokens.size() > 2) {
            if (auto gain = leading_number(tokens[2]); gain && *gain != 0) signal.gain = *gain;
        }
        if (tokens.size() > 8) {
            std::string name = tokens[8];
            for (std::size_t t = 9; t < tokens.size(); ++t) name += " " + tokens[t];
            signal.lead_name = name;
        } else if (tokens.size() >= 4) {
            signal.lead_name = tokens.back();
        } else {
            signal.lead_name = "signal_" + std::to_string(i);
        }
        header.signals.push_back(std::move(signal));
    }
    return header;
}

namespace {

class WfdbHandler final : public FormatHandler {
public:
    WfdbHandler() {
        descriptor_.name = "wfdb";
        descriptor_.extension_patterns = {".hea"};
        descriptor_.priority = 4;
    }

    const HandlerDescriptor& descriptor() const override { return descriptor_; }

    ExtractionResult extract(const std::filesystem::path& root,
                             const std::vector<DiscoveredFile>& files, const BakeOptions&,
                             WarningSink& warnings) const override {
        ExtractionResult result;
        std::set<std::string> claimed;
        for (const auto& file : files) {
            extract_record(root, file, claimed, result, warnings);
        }
        return result;
    }

private:
    void extract_record(const std::filesystem::path& root, const DiscoveredFile& file,
                        std::set<std::string>& claimed, ExtractionResult& result,
                        WarningSink& warnings) const {
        std::string text;
        {
            auto in = open_decompressed(root / file.relative_path);
            if (!in) {
                warn(warnings, file.relative_path, "cannot open file; skipped");
                return;
            }
            std::ostringstream buffer;
            buffer << in->rdbuf();
            text = buffer.str();
        }
        bool truncated = false;
        auto header = parse_wfdb_header(text, truncated);
        if (!header) {
            warn(warnings, file.relative_path, "malformed record line; skipped");
            return;
        }
        if (truncated) {
            warn(warnings, file.relative_path,
                 "header declares more signals than it lists; extra signals dropped");
        }

        auto claim = [&](const std::string& path) {
            if (claimed.insert(path).second) {
                result.file_objects.push_back({path, ""});
            }
            result.consumed_paths.push_back(path);
        };
        claim(file.relative_path);

        std::string dir;
        if (auto slash = file.relative_path.rfind('/'); slash != std::string::npos) {
            dir = file.relative_path.substr(0, slash + 1);
        }

        if (header->multi_segment) {
            warn(warnings, file.relative_path,
                 "multi-segment record; emitting header file only");
            return;
        }

        // Claim referenced .dat files that exist, plus a same-stem .atr.
        std::set<std::string> data_paths;
        for (auto& signal : header->signals) {
            if (signal.data_file.empty()) continue;
            std::string path = dir + signal.data_file;
            if (std::filesystem::exists(root / path)) {
                if (!data_paths.count(path)) {
                    data_paths.insert(path);
                    claim(path);
                }
            } else {
                warn(warnings, file.relative_path,
                     "referenced data file '" + signal.data_file + "' not found");
            }
        }
        std::string stem_path = strip_compression_suffix(file.relative_path);
        if (has_suffix(stem_path, ".hea")) stem_path.resize(stem_path.size() - 4);
        std::string atr_path = stem_path + ".atr";
        if (std::filesystem::exists(root / atr_path)) claim(atr_path);

        PendingRecordSet rs;
        rs.name = header->record_name;
        rs.primary_path = file.relative_path;
        rs.description = "wfdb record; rows=" + std::to_string(header->num_samples);
        std::set<std::string> used_names;
        for (std::size_t i = 0; i < header->signals.size(); ++i) {
            const WfdbSignal& signal = header->signals[i];
            PendingField field;
            field.name = signal.lead_name;
            int k = 2;
            while (!used_names.insert(field.name).second) {
                field.name = signal.lead_name + "_" + std::to_string(k++);
            }
            if (field.name != signal.lead_name) {
                warn(warnings, file.relative_path,
                     "duplicate lead name '" + signal.lead_name + "' renamed to '" + field.name +
                         "'");
            }
            field.data_type = DataType::Float;
            field.description = "fs=" + format_double(header->sampling_frequency) +
                                "; gain=" + format_double(signal.gain);
            field.column = signal.lead_name;
            std::string data_path = dir + signal.data_file;
            if (!signal.data_file.empty() && data_paths.count(data_path)) {
                field.source_path = data_path;
            }
            rs.fields.push_back(std::move(field));
        }
        result.record_sets.push_back(std::move(rs));
    }

    HandlerDescriptor descriptor_;
};

}  // namespace

std::shared_ptr<FormatHandler> make_wfdb_handler() { return std::make_shared<WfdbHandler>(); }

}  // namespace crbake

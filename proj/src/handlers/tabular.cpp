#include <algorithm>
#include <cstdint>
#include <istream>

#include "crbake/handlers.hpp"
#include "crbake/inference.hpp"

namespace crbake {

namespace {

// One logical CSV record with double-quote quoting: embedded delimiters,
// newlines, and doubled quotes inside quoted fields. Returns false when the
// stream is exhausted before any character of a new record.
bool read_record(std::istream& in, char delim, std::vector<std::string>& out,
                 bool strip_bom = false) {
    out.clear();
    std::streambuf* buf = in.rdbuf();
    std::string field;
    bool in_quotes = false;
    bool any = false;
    if (strip_bom) {
        // Partial matches stay in the first cell; only the full mark drops.
        static const char bom[3] = {'\xEF', '\xBB', '\xBF'};
        for (int i = 0; i < 3; ++i) {
            int c = buf->sgetc();
            if (c == std::char_traits<char>::eof() || static_cast<char>(c) != bom[i]) break;
            buf->sbumpc();
            field.push_back(bom[i]);
            if (i == 2) field.clear();
        }
        any = !field.empty();
    }
    int ch;
    while ((ch = buf->sbumpc()) != std::char_traits<char>::eof()) {
        char c = static_cast<char>(ch);
        any = true;
        if (in_quotes) {
            if (c == '"') {
                int next = buf->sgetc();
                if (next == '"') {
                    buf->sbumpc();
                    field.push_back('"');
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(c);
            }
            continue;
        }
        if (c == '"' && field.empty()) {
            in_quotes = true;
        } else if (c == delim) {
            out.push_back(std::move(field));
            field.clear();
        } else if (c == '\n' || c == '\r') {
            if (c == '\r' && buf->sgetc() == '\n') buf->sbumpc();
            out.push_back(std::move(field));
            return true;
        } else {
            field.push_back(c);
        }
    }
    if (!any) return false;
    out.push_back(std::move(field));
    return true;
}

bool is_blank_record(const std::vector<std::string>& record) {
    return record.size() == 1 && record.front().empty();
}

class TabularHandler final : public FormatHandler {
public:
    TabularHandler() {
        descriptor_.name = "tabular";
        descriptor_.extension_patterns = {".csv", ".tsv"};
        descriptor_.priority = 2;
    }

    const HandlerDescriptor& descriptor() const override { return descriptor_; }

    ExtractionResult extract(const std::filesystem::path& root,
                             const std::vector<DiscoveredFile>& files, const BakeOptions& options,
                             WarningSink& warnings) const override {
        ExtractionResult result;
        for (const auto& file : files) {
            extract_one(root, file, options, result, warnings);
        }
        return result;
    }

private:
    void extract_one(const std::filesystem::path& root, const DiscoveredFile& file,
                     const BakeOptions& options, ExtractionResult& result,
                     WarningSink& warnings) const {
        std::string inner = strip_compression_suffix(file.relative_path);
        char delim = has_suffix(inner, ".tsv") ? '\t' : ',';
        auto in = open_decompressed(root / file.relative_path);
        if (!in) {
            warn(warnings, file.relative_path, "cannot open file; skipped");
            return;
        }

        std::vector<std::string> record;
        std::vector<std::string> header;
        std::uint64_t rows = 0;
        std::vector<TypeLatticeState> states;
        std::size_t budget = options.deep_sample ? SIZE_MAX : options.sample_budget;
        bool ragged_warned = false;

        auto ensure_unique_names = [&](std::vector<std::string>& names) {
            bool adjusted = false;
            std::vector<std::string> seen;
            for (std::size_t i = 0; i < names.size(); ++i) {
                if (names[i].empty()) {
                    names[i] = "col_" + std::to_string(i);
                    adjusted = true;
                }
                std::string base = names[i];
                int k = 2;
                while (std::find(seen.begin(), seen.end(), names[i]) != seen.end()) {
                    names[i] = base + "_" + std::to_string(k++);
                    adjusted = true;
                }
                seen.push_back(names[i]);
            }
            if (adjusted) {
                warn(warnings, file.relative_path,
                     "empty or duplicate column names adjusted to keep fields unique");
            }
        };

        auto classify_row = [&](const std::vector<std::string>& row) {
            if (row.size() != header.size() && !ragged_warned) {
                warn(warnings, file.relative_path,
                     "row with " + std::to_string(row.size()) + " fields does not match header width " +
                         std::to_string(header.size()));
                ragged_warned = true;
            }
            for (std::size_t i = 0; i < header.size(); ++i) {
                ValueClass cls = i < row.size() ? classify_value(row[i]) : ValueClass::Null;
                // Bare tabular cells never resolve to URL.
                if (cls == ValueClass::Url) cls = ValueClass::Text;
                states[i] = join_types(states[i], cls);
            }
        };

        try {
            if (options.no_header) {
                if (read_record(*in, delim, record, true) && !is_blank_record(record)) {
                    header.resize(record.size());
                    for (std::size_t i = 0; i < record.size(); ++i) {
                        header[i] = "col_" + std::to_string(i);
                    }
                    states.resize(header.size());
                    classify_row(record);
                    rows = 1;
                }
            } else {
                if (!read_record(*in, delim, header, true) || is_blank_record(header)) {
                    warn(warnings, file.relative_path, "empty file; skipped");
                    return;
                }
                ensure_unique_names(header);
                states.resize(header.size());
            }
            if (header.empty()) {
                warn(warnings, file.relative_path, "empty file; skipped");
                return;
            }
            while (read_record(*in, delim, record)) {
                if (is_blank_record(record)) continue;
                ++rows;
                if (rows <= budget) classify_row(record);
            }
            if (in->bad()) {
                warn(warnings, file.relative_path, "read error; skipped");
                return;
            }
        } catch (const std::exception& e) {
            warn(warnings, file.relative_path, std::string("undecodable content: ") + e.what());
            return;
        }

        result.file_objects.push_back({file.relative_path, ""});

        PendingRecordSet rs;
        auto slash = file.relative_path.rfind('/');
        std::string filename =
            slash == std::string::npos ? file.relative_path : file.relative_path.substr(slash + 1);
        rs.name = record_set_stem(filename);
        rs.primary_path = file.relative_path;
        std::string kind = delim == '\t' ? "tsv" : "csv";
        rs.description = kind + " table; rows=" + std::to_string(rows);
        for (std::size_t i = 0; i < header.size(); ++i) {
            PendingField field;
            field.name = header[i];
            field.data_type = resolve_column(states[i]);
            field.column = header[i];
            rs.fields.push_back(std::move(field));
        }
        result.record_sets.push_back(std::move(rs));
    }

    HandlerDescriptor descriptor_;
};

}  // namespace

std::shared_ptr<FormatHandler> make_tabular_handler() {
    return std::make_shared<TabularHandler>();
}

}  // namespace crbake

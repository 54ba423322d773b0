#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "crbake/metrics.hpp"
#include "crbake/model.hpp"
#include "crbake/pipeline.hpp"

namespace {

// 0 success/clean, 1 differences/violations, 2 usage, 3 no supported files,
// 4 I/O failure.
constexpr int kExitClean = 0;
constexpr int kExitDifferences = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNoSupportedFiles = 3;
constexpr int kExitIo = 4;

void print_warnings(const crbake::WarningSink& warnings) {
    for (const auto& w : warnings) {
        std::cerr << "warning: " << w.path << ": " << w.message << "\n";
    }
}

std::string ratio_text(const std::optional<double>& value) {
    if (!value) return "n/a";
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%.6f", *value);
    return buffer;
}

crbake::CroissantDocument load_document(const std::string& path, int& error_exit) {
    if (!std::filesystem::exists(path)) {
        std::cerr << "error: " << path << ": no such file\n";
        error_exit = kExitIo;
        return {};
    }
    try {
        return crbake::parse_jsonld_file(path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << path << ": " << e.what() << "\n";
        error_exit = kExitUsage;
        return {};
    }
}

struct BakeArgs {
    std::string input;
    std::string output;
    crbake::SemanticMetadata semantic;
    std::vector<std::string> rai_extra;
    crbake::BakeOptions options;
};

int cmd_bake(BakeArgs& args) {
    for (const auto& pair : args.rai_extra) {
        auto eq = pair.find('=');
        if (eq == std::string::npos || eq == 0) {
            std::cerr << "error: --rai expects KEY=VALUE, got '" << pair << "'\n";
            return kExitUsage;
        }
        args.semantic.rai.extra.emplace_back(pair.substr(0, eq), pair.substr(eq + 1));
    }
    auto start = std::chrono::steady_clock::now();
    crbake::BakeResult result;
    try {
        result = crbake::run_pipeline(args.input, args.semantic, args.options);
    } catch (const crbake::NoSupportedFilesError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNoSupportedFiles;
    } catch (const crbake::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        for (const auto& v : e.violations) {
            std::cerr << "  " << v.code << ": " << v.id << ": " << v.message << "\n";
        }
        return kExitIo;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
    print_warnings(result.warnings);
    {
        std::ofstream out(args.output, std::ios::binary);
        out << result.serialized;
        if (!out) {
            std::cerr << "error: cannot write " << args.output << "\n";
            return kExitIo;
        }
    }
    auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start);
    char timing[64];
    std::snprintf(timing, sizeof(timing), "%.2fs", elapsed.count());
    std::cerr << "baked " << result.stats.file_objects << " file objects, "
              << result.stats.file_sets << " file sets, " << result.stats.record_sets
              << " record sets, " << result.stats.fields << " fields in " << timing << " ("
              << result.stats.files_matched << "/" << result.stats.files_discovered
              << " files matched)\n";
    return kExitClean;
}

int cmd_compare(const std::string& generated_path, const std::string& reference_path,
                const std::string& json_report) {
    int error_exit = 0;
    auto generated = load_document(generated_path, error_exit);
    if (error_exit) return error_exit;
    auto reference = load_document(reference_path, error_exit);
    if (error_exit) return error_exit;

    auto report = crbake::compare_documents(generated, reference);
    std::cout << "matched_fields: " << report.matched_fields << "\n"
              << "generated_fields: " << report.generated_fields << "\n"
              << "reference_fields: " << report.reference_fields << "\n"
              << "field_recovery: " << ratio_text(report.field_recovery) << "\n"
              << "strict_agreement: " << ratio_text(report.strict_agreement) << "\n"
              << "semantic_agreement: " << ratio_text(report.semantic_agreement) << "\n"
              << "recordset_recovery: " << ratio_text(report.recordset_recovery) << "\n";
    if (!report.disagreements.empty()) {
        std::cout << "disagreements:\n";
        for (const auto& d : report.disagreements) {
            std::cout << "  " << d.record_set << "." << d.field << ": generated="
                      << d.generated_type << " reference=" << d.reference_type
                      << (d.same_family ? " (same numeric family)" : "") << "\n";
        }
    }
    for (const auto& [rs, field] : report.unmatched_reference) {
        std::cout << "unmatched reference field: " << rs << "." << field << "\n";
    }
    for (const auto& [rs, field] : report.unmatched_generated) {
        std::cout << "unmatched generated field: " << rs << "." << field << "\n";
    }

    if (!json_report.empty()) {
        crbake::ordered_json j;
        j["matched_fields"] = report.matched_fields;
        j["generated_fields"] = report.generated_fields;
        j["reference_fields"] = report.reference_fields;
        j["strict_matches"] = report.strict_matches;
        j["semantic_matches"] = report.semantic_matches;
        j["matched_record_sets"] = report.matched_record_sets;
        j["reference_record_sets"] = report.reference_record_sets;
        auto ratio = [](const std::optional<double>& v) {
            return v ? crbake::ordered_json(*v) : crbake::ordered_json(nullptr);
        };
        j["field_recovery"] = ratio(report.field_recovery);
        j["strict_agreement"] = ratio(report.strict_agreement);
        j["semantic_agreement"] = ratio(report.semantic_agreement);
        j["recordset_recovery"] = ratio(report.recordset_recovery);
        j["disagreements"] = crbake::ordered_json::array();
        for (const auto& d : report.disagreements) {
            j["disagreements"].push_back({{"record_set", d.record_set},
                                          {"field", d.field},
                                          {"generated", d.generated_type},
                                          {"reference", d.reference_type},
                                          {"same_family", d.same_family}});
        }
        auto pairs = [](const std::vector<std::pair<std::string, std::string>>& v) {
            auto arr = crbake::ordered_json::array();
            for (const auto& [rs, field] : v) arr.push_back({{"record_set", rs}, {"field", field}});
            return arr;
        };
        j["unmatched_reference"] = pairs(report.unmatched_reference);
        j["unmatched_generated"] = pairs(report.unmatched_generated);
        std::ofstream out(json_report, std::ios::binary);
        out << j.dump(2) << "\n";
        if (!out) {
            std::cerr << "error: cannot write " << json_report << "\n";
            return kExitIo;
        }
    }

    bool clean = report.disagreements.empty() && report.unmatched_reference.empty() &&
                 report.unmatched_generated.empty() &&
                 report.matched_record_sets == report.reference_record_sets;
    return clean ? kExitClean : kExitDifferences;
}

int cmd_verify(const std::string& document_path, const std::string& root) {
    int error_exit = 0;
    auto document = load_document(document_path, error_exit);
    if (error_exit) return error_exit;

    auto structural = crbake::validate_document(document);
    if (!structural.empty()) {
        for (const auto& v : structural) {
            std::cout << v.code << ": " << v.id << ": " << v.message << "\n";
        }
        return kExitDifferences;
    }
    std::vector<crbake::PackagingViolation> violations;
    try {
        violations = crbake::verify_packaging(document, root);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
    for (const auto& v : violations) {
        std::cout << v.code << ": " << v.path << ": " << v.message << "\n";
    }
    return violations.empty() ? kExitClean : kExitDifferences;
}

int cmd_diff(const std::string& path_a, const std::string& path_b) {
    int error_exit = 0;
    auto doc_a = load_document(path_a, error_exit);
    if (error_exit) return error_exit;
    auto doc_b = load_document(path_b, error_exit);
    if (error_exit) return error_exit;

    auto diff = crbake::schema_diff(doc_a, doc_b);
    for (const auto& name : diff.record_sets_only_in_a) {
        std::cout << "record set only in a: " << name << "\n";
    }
    for (const auto& name : diff.record_sets_only_in_b) {
        std::cout << "record set only in b: " << name << "\n";
    }
    for (const auto& [rs, field] : diff.fields_only_in_a) {
        std::cout << "field only in a: " << rs << "." << field << "\n";
    }
    for (const auto& [rs, field] : diff.fields_only_in_b) {
        std::cout << "field only in b: " << rs << "." << field << "\n";
    }
    for (const auto& change : diff.type_changes) {
        std::cout << "type change: " << change.record_set << "." << change.field << ": "
                  << change.type_a << " -> " << change.type_b << "\n";
    }
    return diff.empty() ? kExitClean : kExitDifferences;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Generate, compare, verify, and diff Croissant 1.1 dataset metadata"};
    app.require_subcommand(1);

    BakeArgs bake;
    auto* bake_cmd = app.add_subcommand("bake", "Generate a Croissant document from a directory");
    bake_cmd->add_option("--input", bake.input, "Dataset root directory")->required();
    bake_cmd->add_option("--output", bake.output, "Output JSON-LD path")->required();
    bake_cmd->add_option("--name", bake.semantic.name, "Dataset name")->required();
    bake_cmd->add_option("--description", bake.semantic.description, "Dataset description");
    bake_cmd->add_option("--license", bake.semantic.license, "License text or URL");
    bake_cmd->add_option("--citation", bake.semantic.citation, "Citation (citeAs)");
    bake_cmd->add_option("--creator", bake.semantic.creators, "Creator name (repeatable)");
    bake_cmd->add_option("--publisher", bake.semantic.publisher, "Publisher name");
    bake_cmd->add_option("--dataset-version", bake.semantic.version, "Dataset version");
    bake_cmd->add_option("--date-published", bake.semantic.date_published, "Publication date");
    bake_cmd->add_option("--url", bake.semantic.url, "Dataset landing page");
    bake_cmd->add_option("--same-as", bake.semantic.same_as, "sameAs URL (repeatable)");
    bake_cmd->add_option("--alternate-name", bake.semantic.alternate_names,
                         "Alternate name (repeatable)");
    bake_cmd->add_option("--temporal-coverage", bake.semantic.temporal_coverage,
                         "Temporal coverage");
    bake_cmd->add_option("--usage-info", bake.semantic.usage_info, "Usage information");
    bake_cmd->add_option("--rai-data-use-cases", bake.semantic.rai.data_use_cases,
                         "RAI data use cases");
    bake_cmd->add_option("--rai-data-limitations", bake.semantic.rai.data_limitations,
                         "RAI data limitations");
    bake_cmd->add_option("--rai-personal-sensitive-information",
                         bake.semantic.rai.personal_sensitive_information,
                         "RAI personal/sensitive information");
    bake_cmd->add_option("--rai", bake.rai_extra, "Extra RAI attribute KEY=VALUE (repeatable)");
    bake_cmd->add_option("--sample-budget", bake.options.sample_budget,
                         "Rows sampled per file for type inference");
    bake_cmd->add_flag("--deep-sample", bake.options.deep_sample, "Classify every row");
    bake_cmd->add_flag("--group-partitions", bake.options.group_partitions,
                       "Group same-schema parquet directories into one record set");
    bake_cmd->add_flag("--no-header", bake.options.no_header,
                       "Treat the first CSV/TSV row as data");
    bake_cmd->add_option("--field-mappings", bake.options.field_mappings_path,
                         "JSON file attaching equivalentProperty/extra types per field");

    std::string generated_path, reference_path, json_report;
    auto* compare_cmd = app.add_subcommand("compare", "Score agreement against a reference document");
    compare_cmd->add_option("generated", generated_path, "Generated document")->required();
    compare_cmd->add_option("reference", reference_path, "Reference document")->required();
    compare_cmd->add_option("--json-report", json_report, "Write a JSON report here");

    std::string verify_document, verify_root;
    auto* verify_cmd = app.add_subcommand("verify", "Check a document against a directory");
    verify_cmd->add_option("document", verify_document, "Croissant document")->required();
    verify_cmd->add_option("root", verify_root, "Dataset root directory")->required();

    std::string diff_a, diff_b;
    auto* diff_cmd = app.add_subcommand("diff", "Schema diff between two documents");
    diff_cmd->add_option("a", diff_a, "First document")->required();
    diff_cmd->add_option("b", diff_b, "Second document")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitClean : kExitUsage;
    }

    if (bake_cmd->parsed()) return cmd_bake(bake);
    if (compare_cmd->parsed()) return cmd_compare(generated_path, reference_path, json_report);
    if (verify_cmd->parsed()) return cmd_verify(verify_document, verify_root);
    if (diff_cmd->parsed()) return cmd_diff(diff_a, diff_b);
    return kExitUsage;
}

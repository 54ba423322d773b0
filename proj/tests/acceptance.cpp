#include <sys/resource.h>
#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <regex>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "crbake/datatype.hpp"
#include "crbake/dicom.hpp"
#include "crbake/inference.hpp"
#include "crbake/metrics.hpp"
#include "crbake/model.hpp"
#include "crbake/pipeline.hpp"
#include "testutil.hpp"

using namespace crbake;
namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

const fs::path kFixtures = CRBAKE_FIXTURE_DIR;

int failures = 0;
bool current_ok = true;
std::vector<std::string> notes;

void expect(bool condition, const std::string& what) {
    if (!condition) {
        current_ok = false;
        notes.push_back(what);
    }
}

void criterion(int number, const char* label, const std::function<void()>& body) {
    current_ok = true;
    notes.clear();
    try {
        body();
    } catch (const std::exception& e) {
        expect(false, std::string("unexpected exception: ") + e.what());
    }
    std::printf("%s criterion %d: %s\n", current_ok ? "PASS" : "FAIL", number, label);
    for (const auto& note : notes) std::printf("       - %s\n", note.c_str());
    if (!current_ok) ++failures;
}

long max_rss_kb() {
    rusage usage{};
    getrusage(RUSAGE_SELF, &usage);
    return usage.ru_maxrss;
}

SemanticMetadata semantic_stub() {
    SemanticMetadata semantic;
    semantic.name = "acceptance";
    return semantic;
}

// Every dataset directory baked through bake() joins the determinism and
// validation sweeps (criteria 8 and 9).
struct Fixture {
    fs::path dir;
    BakeOptions options;
};
std::vector<Fixture> fixtures;
std::set<std::string> fixture_keys;

void register_fixture(const fs::path& dir, const BakeOptions& options) {
    std::string key = dir.string() + (options.group_partitions ? "|grouped" : "");
    if (fixture_keys.insert(key).second) fixtures.push_back({dir, options});
}

BakeResult bake(const fs::path& dir, const BakeOptions& options = {}) {
    register_fixture(dir, options);
    return run_pipeline(dir, semantic_stub(), options);
}

std::size_t count_file_objects(const CroissantDocument& doc) {
    std::size_t n = 0;
    for (const auto& entry : doc.distribution) {
        if (std::holds_alternative<FileObjectDesc>(entry)) ++n;
    }
    return n;
}

std::size_t count_file_sets(const CroissantDocument& doc) {
    return doc.distribution.size() - count_file_objects(doc);
}

const RecordSetDesc* find_rs(const CroissantDocument& doc, const std::string& name) {
    for (const auto& rs : doc.record_sets) {
        if (rs.name == name) return &rs;
    }
    return nullptr;
}

const FieldDesc* find_field(const RecordSetDesc& rs, const std::string& name) {
    for (const auto& field : rs.fields) {
        if (field.name == name) return &field;
    }
    return nullptr;
}

int run_cli(const std::string& args, const fs::path& capture_dir, std::string* out = nullptr) {
    fs::path stdout_path = capture_dir / "cli_stdout.txt";
    fs::path stderr_path = capture_dir / "cli_stderr.txt";
    std::string command = std::string("\"") + CRBAKE_BIN + "\" " + args + " > \"" +
                          stdout_path.string() + "\" 2> \"" + stderr_path.string() + "\"";
    int status = std::system(command.c_str());
    if (out) *out = testutil::read_file(stdout_path);
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// ---- criterion bodies ----

void check_compressed_tabular_shape() {
    fs::path dir = testutil::scratch_dir("acc_tabular");
    std::string csv =
        "subject_id,hadm_id,admittime,dischtime\n"
        "10000032,22595853,2180-05-06 22:23:00,2180-05-07 17:15:00\n"
        "10000084,23052089,2160-11-21 01:56:00,2160-11-21 21:10:00\n";
    testutil::write_file(dir / "hosp" / "admissions.csv.gz", testutil::gzip_bytes(csv));

    auto start = std::chrono::steady_clock::now();
    BakeResult result = bake(dir);
    double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    expect(seconds < 1.0, "bake took " + std::to_string(seconds) + "s, budget is 1s");

    const std::string context_block =
        "  \"@context\": {\n"
        "    \"@language\": \"en\",\n"
        "    \"@vocab\": \"https://schema.org/\",\n"
        "    \"cr\": \"http://mlcommons.org/croissant/\",\n"
        "    \"rai\": \"http://mlcommons.org/croissant/RAI/\",\n"
        "    \"sc\": \"https://schema.org/\"\n"
        "  },";
    expect(result.serialized.find(context_block) != std::string::npos,
           "@context block is not byte-exact");

    expect(count_file_objects(result.document) == 1, "expected exactly one file object");
    const auto& fo = std::get<FileObjectDesc>(result.document.distribution.at(0));
    expect(fo.encoding_format == "application/gzip",
           "encodingFormat was " + fo.encoding_format);
    std::string gz = testutil::read_file(dir / "hosp" / "admissions.csv.gz");
    expect(fo.sha256 == testutil::sha256_ref(gz), "sha256 disagrees with the reference digest");
    expect(fo.content_size == std::to_string(gz.size()),
           "contentSize " + fo.content_size + " != on-disk " + std::to_string(gz.size()));

    const RecordSetDesc* rs = find_rs(result.document, "admissions");
    expect(rs != nullptr, "record set 'admissions' missing");
    if (rs) {
        const FieldDesc* subject = find_field(*rs, "subject_id");
        const FieldDesc* admit = find_field(*rs, "admittime");
        expect(subject && subject->data_type == DataType::Int64, "subject_id is not cr:Int64");
        expect(admit && admit->data_type == DataType::DateTime, "admittime is not sc:DateTime");
    }
    expect(result.serialized.find("\"dataType\": \"cr:Int64\"") != std::string::npos,
           "serialized cr:Int64 missing");
    expect(result.serialized.find("\"dataType\": \"sc:DateTime\"") != std::string::npos,
           "serialized sc:DateTime missing");
}

void check_waveform_fidelity() {
    fs::path dir = testutil::scratch_dir("acc_wfdb");
    testutil::write_file(dir / "rec100.hea",
                         "rec100 2 360 650000\n"
                         "rec100.dat 212 200 11 1024 995 0 0 MLII\n"
                         "rec100.dat 212 200 11 1024 1011 0 0 V5\n");
    testutil::write_file(dir / "rec101.hea",
                         "rec101 2 250 21600\n"
                         "rec101.dat 212 200 11 1024 0 0 0 II\n"
                         "rec101.dat 212 200 11 1024 0 0 0 V1\n");
    testutil::write_file(dir / "rec102.hea",
                         "rec102 2 500 3600\n"
                         "rec102.dat 212 100 11 1024 0 0 0 I\n"
                         "rec102.dat 212 100 11 1024 0 0 0 V2\n");
    for (const char* stem : {"rec100", "rec101", "rec102"}) {
        testutil::write_file(dir / (std::string(stem) + ".dat"), std::string(24, '\x02'));
        testutil::write_file(dir / (std::string(stem) + ".atr"), std::string(8, '\x01'));
    }

    BakeResult result = bake(dir);
    expect(count_file_objects(result.document) == 9,
           "expected 9 file objects, got " + std::to_string(count_file_objects(result.document)));
    expect(result.document.record_sets.size() == 3,
           "expected 3 record sets, got " + std::to_string(result.document.record_sets.size()));
    for (const auto& rs : result.document.record_sets) {
        expect(rs.fields.size() == 2, rs.name + " should carry 2 lead fields");
        for (const auto& field : rs.fields) {
            expect(field.data_type == DataType::Float, rs.name + "." + field.name +
                                                           " is not sc:Float");
        }
    }
    const RecordSetDesc* rec100 = find_rs(result.document, "rec100");
    expect(rec100 != nullptr, "record set 'rec100' missing");
    if (rec100 && rec100->fields.size() == 2) {
        expect(rec100->fields[0].name == "MLII", "first lead is " + rec100->fields[0].name);
        expect(rec100->fields[1].name == "V5", "second lead is " + rec100->fields[1].name);
        expect(rec100->fields[0].description.find("fs=360") != std::string::npos,
               "sampling frequency not recorded verbatim");
    }
    expect(result.serialized.find("\"dataType\": \"sc:Float\"") != std::string::npos,
           "serialized sc:Float missing");
}

void check_parquet_semantics() {
    fs::path meds = kFixtures / "meds";
    BakeResult flat = bake(meds);
    expect(count_file_objects(flat.document) == 5, "default mode should list 5 file objects");
    expect(flat.document.record_sets.size() == 5, "default mode should emit 5 record sets");

    BakeOptions grouped_options;
    grouped_options.group_partitions = true;
    BakeResult grouped = bake(meds, grouped_options);
    expect(count_file_objects(grouped.document) == 5, "grouped mode keeps 5 file objects");
    expect(count_file_sets(grouped.document) == 1, "grouped mode should add one file set");
    expect(grouped.document.record_sets.size() == 1, "grouped mode should emit 1 record set");
    if (!grouped.document.record_sets.empty()) {
        expect(grouped.document.record_sets[0].description.find("partitions=5") !=
                   std::string::npos,
               "partition count missing from the grouped description");
    }

    // The command-line flag must reproduce the library result byte for byte.
    fs::path out_dir = testutil::scratch_dir("acc_cli_out");
    fs::path out_path = out_dir / "grouped.json";
    int code = run_cli("bake --input \"" + meds.string() + "\" --output \"" + out_path.string() +
                           "\" --name acceptance --group-partitions",
                       out_dir);
    expect(code == 0, "cli grouped bake exited " + std::to_string(code));
    expect(fs::exists(out_path) && testutil::read_file(out_path) == grouped.serialized,
           "cli output differs from the library bake");

    // Footer-only reading: peak memory must not track the payload when the
    // row count grows 100x.
    std::vector<testutil::ParquetColumnSpec> columns = {
        {"subject_id", 2, -1, 0, 0, true},
        {"code", 6, -1, 1, 0, true},
        {"value", 5, -1, 0, 0, true},
    };
    fs::path small = testutil::scratch_dir("acc_parquet_small");
    fs::path big = testutil::scratch_dir("acc_parquet_big");
    for (int i = 0; i < 5; ++i) {
        std::string shard = "shard_" + std::to_string(i) + ".parquet";
        testutil::write_file(small / "data" / shard,
                             testutil::parquet_bytes(columns, 1000, 1 << 20));
        testutil::write_file(big / "data" / shard,
                             testutil::parquet_bytes(columns, 100000, 20 << 20));
    }
    BakeResult small_bake = bake(small, grouped_options);
    expect(small_bake.document.record_sets.size() == 1 &&
               small_bake.document.record_sets[0].description.find("rows=5000") !=
                   std::string::npos,
           "small fixture row total wrong");
    long base_kb = max_rss_kb();
    BakeResult big_bake = bake(big, grouped_options);
    expect(big_bake.document.record_sets.size() == 1 &&
               big_bake.document.record_sets[0].description.find("rows=500000") !=
                   std::string::npos,
           "big fixture row total wrong");
    long grown_kb = max_rss_kb() - base_kb;
    expect(grown_kb < 64 * 1024,
           "peak memory grew " + std::to_string(grown_kb) + " KiB on the 100x fixture");
}

void check_fhir_grouping() {
    fs::path chunks = testutil::scratch_dir("acc_fhir_chunks");
    testutil::write_file(chunks / "obs_1.ndjson",
                         "{\"resourceType\":\"Observation\",\"id\":\"o1\",\"status\":\"final\","
                         "\"valueQuantity\":{\"value\":4.2,\"unit\":\"mg\"}}\n"
                         "{\"resourceType\":\"Observation\",\"id\":\"o2\",\"status\":\"final\","
                         "\"valueQuantity\":{\"value\":5.0,\"unit\":\"mg\"}}\n");
    testutil::write_file(chunks / "obs_2.ndjson",
                         "{\"resourceType\":\"Observation\",\"id\":\"o3\",\"status\":\"amended\","
                         "\"valueQuantity\":{\"value\":6.5,\"unit\":\"mg\"}}\n");
    testutil::write_file(chunks / "patient.ndjson",
                         "{\"resourceType\":\"Patient\",\"id\":\"p1\",\"gender\":\"female\","
                         "\"birthDate\":\"1970-04-02\"}\n");
    BakeResult merged = bake(chunks);
    expect(merged.document.record_sets.size() == 2,
           "chunk fixture should yield 2 record sets, got " +
               std::to_string(merged.document.record_sets.size()));
    expect(count_file_objects(merged.document) == 3, "chunk fixture should keep 3 file objects");
    const RecordSetDesc* observation = find_rs(merged.document, "Observation");
    expect(observation != nullptr, "Observation record set missing");
    if (observation) {
        expect(observation->description.find("files=2") != std::string::npos,
               "Observation should be backed by 2 files, description: " +
                   observation->description);
        expect(observation->description.find("rows=3") != std::string::npos,
               "Observation rows wrong: " + observation->description);
    }

    fs::path bundles = testutil::scratch_dir("acc_fhir_bundles");
    testutil::write_file(
        bundles / "bundle_1.json",
        "{\"resourceType\":\"Bundle\",\"type\":\"collection\",\"entry\":["
        "{\"resource\":{\"resourceType\":\"Patient\",\"id\":\"p1\",\"gender\":\"male\"}},"
        "{\"resource\":{\"resourceType\":\"Observation\",\"id\":\"o1\",\"status\":\"final\"}}]}\n");
    testutil::write_file(
        bundles / "bundle_2.json",
        "{\"resourceType\":\"Bundle\",\"type\":\"collection\",\"entry\":["
        "{\"resource\":{\"resourceType\":\"Observation\",\"id\":\"o2\",\"status\":\"final\"}},"
        "{\"resource\":{\"resourceType\":\"Encounter\",\"id\":\"e1\",\"status\":\"finished\"}}]}\n");
    BakeResult bundled = bake(bundles);
    expect(bundled.document.record_sets.size() == 3,
           "bundle fixture should yield 3 record sets, got " +
               std::to_string(bundled.document.record_sets.size()));
    expect(count_file_sets(bundled.document) == 1, "bundle fixture should emit one file set");
    std::string set_id;
    for (const auto& entry : bundled.document.distribution) {
        if (const auto* set = std::get_if<FileSetDesc>(&entry)) set_id = set->id;
    }
    for (const auto& rs : bundled.document.record_sets) {
        for (const auto& field : rs.fields) {
            expect(field.source.is_file_set && field.source.reference_id == set_id,
                   rs.name + "." + field.name + " is not sourced from the file set");
        }
    }
}

RecordSetDesc engineered_set(const std::string& name,
                             const std::vector<DataType>& types) {
    RecordSetDesc rs;
    rs.id = "rs_" + name;
    rs.name = name;
    for (std::size_t i = 0; i < types.size(); ++i) {
        FieldDesc field;
        field.id = "f_" + std::to_string(i);
        field.name = "f" + std::to_string(i);
        field.data_type = types[i];
        rs.fields.push_back(std::move(field));
    }
    return rs;
}

CroissantDocument engineered_doc(RecordSetDesc rs) {
    CroissantDocument doc;
    doc.record_sets.push_back(std::move(rs));
    return doc;
}

void check_metric_arithmetic() {
    // 819 matched fields, 798 within the same numeric family (400 of them
    // exact), 21 disagreeing outright.
    std::vector<DataType> ref_a, gen_a;
    for (int i = 0; i < 400; ++i) {
        ref_a.push_back(DataType::Int64);
        gen_a.push_back(DataType::Int64);
    }
    for (int i = 0; i < 199; ++i) {
        ref_a.push_back(DataType::Int64);
        gen_a.push_back(DataType::Int32);
    }
    for (int i = 0; i < 199; ++i) {
        ref_a.push_back(DataType::Float64);
        gen_a.push_back(DataType::Float32);
    }
    for (int i = 0; i < 21; ++i) {
        ref_a.push_back(DataType::DateTime);
        gen_a.push_back(DataType::Text);
    }
    ComparisonReport semantic_report = compare_documents(
        engineered_doc(engineered_set("t", gen_a)), engineered_doc(engineered_set("t", ref_a)));
    expect(semantic_report.matched_fields == 819, "pair A should match 819 fields");
    expect(semantic_report.field_recovery == 1.0, "pair A field recovery should be 1.0");
    expect(semantic_report.semantic_agreement.has_value() &&
               std::fabs(*semantic_report.semantic_agreement - 798.0 / 819.0) < 1e-12,
           "semantic agreement is not 798/819");

    // 406 matched fields: 397 exact, 8 URL-vs-text, 1 integer-vs-float.
    std::vector<DataType> ref_b, gen_b;
    for (int i = 0; i < 397; ++i) {
        ref_b.push_back(DataType::Float64);
        gen_b.push_back(DataType::Float64);
    }
    for (int i = 0; i < 8; ++i) {
        ref_b.push_back(DataType::Text);
        gen_b.push_back(DataType::Url);
    }
    ref_b.push_back(DataType::Float64);
    gen_b.push_back(DataType::Int64);
    ComparisonReport strict_report = compare_documents(
        engineered_doc(engineered_set("u", gen_b)), engineered_doc(engineered_set("u", ref_b)));
    expect(strict_report.matched_fields == 406, "pair B should match 406 fields");
    expect(strict_report.strict_agreement.has_value() &&
               std::fabs(*strict_report.strict_agreement - 397.0 / 406.0) < 1e-12,
           "strict agreement is not 397/406");

    CroissantDocument self = engineered_doc(engineered_set("t", gen_a));
    ComparisonReport identity = compare_documents(self, self);
    expect(identity.field_recovery == 1.0 && identity.strict_agreement == 1.0 &&
               identity.semantic_agreement == 1.0 && identity.recordset_recovery == 1.0,
           "self-comparison ratios are not exactly 1.0");

    std::mt19937 rng(20240817);
    const std::vector<DataType> pool = {
        DataType::Text,    DataType::Boolean, DataType::Integer, DataType::Float,
        DataType::Date,    DataType::DateTime, DataType::Time,   DataType::Url,
        DataType::Int8,    DataType::Int16,   DataType::Int32,   DataType::Int64,
        DataType::UInt8,   DataType::UInt16,  DataType::UInt32,  DataType::UInt64,
        DataType::Float16, DataType::Float32, DataType::Float64, DataType::ImageObject,
    };
    bool ordering_holds = true;
    for (int trial = 0; trial < 1000 && ordering_holds; ++trial) {
        auto random_doc = [&]() {
            CroissantDocument doc;
            std::size_t sets = 1 + rng() % 3;
            for (std::size_t s = 0; s < sets; ++s) {
                std::vector<DataType> types;
                std::size_t fields = rng() % 16;
                for (std::size_t f = 0; f < fields; ++f) types.push_back(pool[rng() % pool.size()]);
                doc.record_sets.push_back(engineered_set("rs" + std::to_string(s), types));
            }
            return doc;
        };
        CroissantDocument reference = random_doc();
        CroissantDocument generated = random_doc();
        ComparisonReport report = compare_documents(generated, reference);
        if (report.strict_matches > report.semantic_matches ||
            report.semantic_matches > report.matched_fields) {
            ordering_holds = false;
        }
        if (report.strict_agreement && report.semantic_agreement &&
            *report.strict_agreement > *report.semantic_agreement + 1e-15) {
            ordering_holds = false;
        }
    }
    expect(ordering_holds, "strict agreement exceeded semantic agreement on a random pair");
}

void check_perturbation_detection() {
    auto fresh = [] {
        fs::path dir = testutil::scratch_dir("acc_perturb");
        testutil::write_file(dir / "data.csv", "id,name\n1,ada\n2,grace\n");
        testutil::write_file(dir / "rec1.hea",
                             "rec1 1 360 6\nrec1.dat 212 200 11 1024 20 0 0 MLII\n");
        testutil::write_file(dir / "rec1.dat", std::string(12, '\x05'));
        testutil::write_file(dir / "rec1.atr", std::string(6, '\x01'));
        return dir;
    };
    auto count_code = [](const std::vector<PackagingViolation>& violations,
                         const std::string& code) {
        return std::count_if(violations.begin(), violations.end(),
                             [&](const PackagingViolation& v) { return v.code == code; });
    };

    {
        fs::path dir = fresh();
        BakeResult baked = run_pipeline(dir, semantic_stub(), {});
        expect(verify_packaging(baked.document, dir).empty(),
               "unperturbed directory did not verify clean");
    }
    {
        fs::path dir = fresh();
        BakeResult baked = run_pipeline(dir, semantic_stub(), {});
        fs::remove(dir / "rec1.atr");
        auto violations = verify_packaging(baked.document, dir);
        expect(violations.size() == 1 && count_code(violations, "missing-file") == 1,
               "file removal was not reported as exactly one missing-file violation");
    }
    {
        fs::path dir = fresh();
        BakeResult baked = run_pipeline(dir, semantic_stub(), {});
        fs::rename(dir / "rec1.dat", dir / "rec1.dta");
        auto violations = verify_packaging(baked.document, dir);
        expect(violations.size() == 1 && count_code(violations, "schema-drift") == 1,
               "component rename was not reported as exactly one schema-drift violation");
    }
    {
        fs::path dir = fresh();
        BakeResult baked = run_pipeline(dir, semantic_stub(), {});
        std::string bytes = testutil::read_file(dir / "rec1.dat");
        bytes[4] = '\x09';
        testutil::write_file(dir / "rec1.dat", bytes);
        auto violations = verify_packaging(baked.document, dir);
        expect(violations.size() == 1 && count_code(violations, "checksum-mismatch") == 1,
               "byte corruption was not reported as exactly one checksum violation");
    }
    {
        fs::path dir = fresh();
        BakeResult baked = run_pipeline(dir, semantic_stub(), {});
        testutil::write_file(dir / "data.csv", "id,nome\n1,ada\n2,grace\n");
        auto violations = verify_packaging(baked.document, dir);
        bool named = false;
        for (const auto& v : violations) {
            if (v.code == "schema-drift" && v.message.find("'name'") != std::string::npos) {
                named = true;
            }
        }
        expect(count_code(violations, "schema-drift") == 1 && named,
               "column rename was not reported as exactly one schema-drift naming the field");
    }
}

void check_dicom_resolution() {
    fs::path dir = testutil::scratch_dir("acc_dicom");
    testutil::write_file(dir / "ct.dcm",
                         testutil::DicomBuilder()
                             .add(0x0008, 0x0016, "UI", "1.2.840.10008.5.1.4.1.1.2")
                             .add(0x0008, 0x0060, "CS", "CT")
                             .add(0x0020, 0x000D, "UI", "1.2.3.4.5")
                             .add(0x0020, 0x000E, "UI", "1.2.3.4.6")
                             .add(0x0028, 0x0004, "CS", "MONOCHROME2")
                             .add(0x0028, 0x0008, "IS", "12")
                             .add_us(0x0028, 0x0010, 512)
                             .add_us(0x0028, 0x0011, 512)
                             .add_us(0x0028, 0x0100, 16)
                             .add_pixel_data(std::string(2048, '\x42'))
                             .bytes());
    testutil::write_file(dir / "mr.dcm",
                         testutil::DicomBuilder("1.2.840.10008.1.2")
                             .add(0x0008, 0x0060, "CS", "MR")
                             .add_us(0x0028, 0x0010, 64)
                             .add_us(0x0028, 0x0011, 64)
                             .bytes());

    BakeResult result = bake(dir);
    std::regex tag_regex("\\(([0-9A-F]{4}),([0-9A-F]{4})\\)");
    std::size_t seen = 0;
    std::size_t resolved = 0;
    for (const auto& rs : result.document.record_sets) {
        for (const auto& field : rs.fields) {
            auto begin = std::sregex_iterator(field.description.begin(),
                                              field.description.end(), tag_regex);
            for (auto it = begin; it != std::sregex_iterator(); ++it) {
                ++seen;
                auto group = static_cast<std::uint16_t>(std::stoul((*it)[1].str(), nullptr, 16));
                auto element = static_cast<std::uint16_t>(std::stoul((*it)[2].str(), nullptr, 16));
                if (ps36_keyword(group, element) != nullptr) ++resolved;
            }
        }
    }
    expect(seen >= 12, "expected at least a dozen emitted tag identifiers");
    expect(seen == resolved, std::to_string(seen - resolved) + " emitted tags failed to resolve");

    auto elements = [](testutil::DicomBuilder builder) {
        return builder.add(0x0008, 0x0060, "CS", "CT")
            .add(0x0028, 0x0004, "CS", "MONOCHROME2")
            .add_us(0x0028, 0x0010, 128);
    };
    std::string full = elements(testutil::DicomBuilder())
                           .add_pixel_data(std::string(4096, '\x11'))
                           .bytes();
    std::string truncated = elements(testutil::DicomBuilder())
                                .add_pixel_data_header_only(0x04000000)
                                .bytes();
    auto full_profile = parse_dicom(full);
    auto cut_profile = parse_dicom(truncated);
    expect(full_profile.has_value() && cut_profile.has_value(),
           "pixel-data fixtures failed to parse");
    if (full_profile && cut_profile) {
        bool same = full_profile->transfer_syntax == cut_profile->transfer_syntax &&
                    full_profile->attributes.size() == cut_profile->attributes.size();
        if (same) {
            for (std::size_t i = 0; i < full_profile->attributes.size(); ++i) {
                const auto& a = full_profile->attributes[i];
                const auto& b = cut_profile->attributes[i];
                if (a.group != b.group || a.element != b.element || a.vr != b.vr ||
                    a.value != b.value || a.keyword != b.keyword) {
                    same = false;
                }
            }
        }
        expect(same, "truncated-after-header parse differs from the full parse");
    }
}

std::vector<std::pair<std::string, std::string>> emitted_documents;

void check_determinism() {
    // Widen the sweep with one directory mixing the remaining formats.
    fs::path assorted = testutil::scratch_dir("acc_assorted");
    testutil::write_file(assorted / "img.png", testutil::png_bytes(8, 6, 2));
    testutil::write_file(assorted / "photo.jpg", testutil::jpeg_bytes(32, 24, 3));
    testutil::write_file(assorted / "vol.nii",
                         testutil::nifti1_bytes({16, 16, 8}, 4, {1, 1, 2}, 10));
    testutil::write_file(assorted / "doc.json", "[{\"a\": 1, \"b\": {\"c\": true}}]\n");
    testutil::write_file(assorted / "rows.ndjson", "{\"x\": 1.5}\n{\"x\": 2}\n");
    testutil::write_file(assorted / "table.tsv", "k\tv\n1\thello\n");
    register_fixture(assorted, {});
    register_fixture(kFixtures / "meds_mixed", {});
    register_fixture(kFixtures / "parquet_types", {});

    emitted_documents.clear();
    for (const auto& fixture : fixtures) {
        BakeResult first = run_pipeline(fixture.dir, semantic_stub(), fixture.options);
        BakeResult second = run_pipeline(fixture.dir, semantic_stub(), fixture.options);
        std::string label = fixture.dir.filename().string() +
                            (fixture.options.group_partitions ? " (grouped)" : "");
        expect(first.serialized == second.serialized, label + ": consecutive bakes differ");
        emitted_documents.emplace_back(label, first.serialized);
    }
    expect(emitted_documents.size() >= 10, "determinism sweep covered too few fixtures");
}

void check_validation_closure() {
    expect(!emitted_documents.empty(), "no emitted documents to validate");
    for (const auto& [label, serialized] : emitted_documents) {
        CroissantDocument parsed = parse_jsonld(ordered_json::parse(serialized));
        auto violations = validate_document(parsed);
        expect(violations.empty(),
               label + ": " + std::to_string(violations.size()) + " validator violations");
        expect(serialize_jsonld(parsed) == serialized, label + ": reload changed the bytes");
    }
}

void check_lattice_laws() {
    const std::vector<ValueClass> classes = {
        ValueClass::Null, ValueClass::Bool, ValueClass::Int,  ValueClass::Float, ValueClass::Date,
        ValueClass::DateTime, ValueClass::Time, ValueClass::Url, ValueClass::Text,
    };
    auto representable = [&](DataType type) -> std::set<ValueClass> {
        switch (type) {
            case DataType::Int64: return {ValueClass::Int};
            case DataType::Float64: return {ValueClass::Int, ValueClass::Float};
            case DataType::Date: return {ValueClass::Date};
            case DataType::DateTime: return {ValueClass::Date, ValueClass::DateTime};
            case DataType::Boolean: return {ValueClass::Bool};
            case DataType::Time: return {ValueClass::Time};
            case DataType::Url: return {ValueClass::Url};
            default: return std::set<ValueClass>(classes.begin(), classes.end());
        }
    };
    auto fold = [](const std::vector<ValueClass>& seq) {
        TypeLatticeState state;
        for (ValueClass c : seq) state = join_types(state, c);
        return state;
    };
    auto subset = [](const std::set<ValueClass>& a, const std::set<ValueClass>& b) {
        return std::includes(b.begin(), b.end(), a.begin(), a.end());
    };

    std::mt19937 rng(7);
    bool commutative = true, associative = true, idempotent = true, monotone = true,
         sound = true;
    for (int trial = 0; trial < 10000; ++trial) {
        std::vector<ValueClass> seq(rng() % 13);
        for (auto& c : seq) c = classes[rng() % classes.size()];
        TypeLatticeState folded = fold(seq);
        DataType resolved = resolve_column(folded);

        std::vector<ValueClass> shuffled = seq;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        TypeLatticeState reordered = fold(shuffled);
        if (reordered.seen != folded.seen || resolve_column(reordered) != resolved) {
            commutative = false;
        }

        std::size_t cut = seq.empty() ? 0 : rng() % (seq.size() + 1);
        TypeLatticeState resumed = fold({seq.begin(), seq.begin() + cut});
        for (std::size_t i = cut; i < seq.size(); ++i) resumed = join_types(resumed, seq[i]);
        if (resumed.seen != folded.seen || resumed.non_null_count != folded.non_null_count ||
            resumed.sampled_count != folded.sampled_count) {
            associative = false;
        }

        TypeLatticeState doubled = folded;
        for (ValueClass c : seq) doubled = join_types(doubled, c);
        if (doubled.seen != folded.seen || resolve_column(doubled) != resolved) {
            idempotent = false;
        }

        // With no non-null evidence the resolver falls back to text, so the
        // widening law only binds once something was observed.
        std::vector<ValueClass> extension(rng() % 7);
        for (auto& c : extension) c = classes[rng() % classes.size()];
        TypeLatticeState extended = folded;
        for (ValueClass c : extension) extended = join_types(extended, c);
        if (folded.non_null_count > 0 &&
            !subset(representable(resolved), representable(resolve_column(extended)))) {
            monotone = false;
        }

        for (ValueClass c : seq) {
            if (c != ValueClass::Null && !representable(resolved).count(c)) sound = false;
        }
    }
    expect(commutative, "resolution depends on observation order");
    expect(associative, "resuming a fold mid-sequence changes the state");
    expect(idempotent, "replaying observations changes the resolved type");
    expect(monotone, "extending a sample narrowed the resolved type");
    expect(sound, "a resolved type cannot represent an observed class");
}

void check_scale_smoke() {
    fs::path dir = testutil::scratch_dir("acc_scale");
    for (int i = 0; i < 10000; ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "d%02d/f%04d.csv", i / 400, i);
        testutil::write_file(dir / name, "a,b\n1,x\n2,y\n");
    }
    auto start = std::chrono::steady_clock::now();
    BakeResult result = run_pipeline(dir, semantic_stub(), {});
    double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    expect(result.stats.files_discovered == 10000, "discovery missed files");
    expect(result.document.record_sets.size() == 10000, "record set count wrong");
    expect(seconds < 60.0, "bake took " + std::to_string(seconds) + "s, budget is 60s");
    long peak_kb = max_rss_kb();
    expect(peak_kb < 512 * 1024,
           "peak memory " + std::to_string(peak_kb) + " KiB exceeds the 512 MiB ceiling");
}

}  // namespace

int main() {
    criterion(1, "compressed tabular bake shape", check_compressed_tabular_shape);
    criterion(2, "waveform record fidelity", check_waveform_fidelity);
    criterion(3, "parquet partition semantics and footer-bounded memory", check_parquet_semantics);
    criterion(4, "fhir chunk merging and bundle grouping", check_fhir_grouping);
    criterion(5, "agreement metric arithmetic", check_metric_arithmetic);
    criterion(6, "packaging perturbation detection", check_perturbation_detection);
    criterion(7, "dicom tag resolution and pixel-data stop", check_dicom_resolution);
    criterion(8, "deterministic output bytes", check_determinism);
    criterion(9, "validation closure over emitted documents", check_validation_closure);
    criterion(10, "type lattice laws", check_lattice_laws);
    criterion(11, "scale smoke", check_scale_smoke);
    return failures == 0 ? 0 : 1;
}

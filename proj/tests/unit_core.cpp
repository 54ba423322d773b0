#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "crbake/datatype.hpp"
#include "crbake/discovery.hpp"
#include "crbake/inference.hpp"
#include "crbake/util.hpp"
#include "testutil.hpp"

using namespace crbake;

TEST_CASE("compression suffix handling") {
    CHECK(compression_of("a.csv.gz") == Compression::Gzip);
    CHECK(compression_of("a.csv.GZ") == Compression::Gzip);
    CHECK(compression_of("a.bz2") == Compression::Bzip2);
    CHECK(compression_of("a.xz") == Compression::Xz);
    CHECK(compression_of("a.csv") == Compression::None);
    CHECK(strip_compression_suffix("hosp/admissions.csv.gz") == "hosp/admissions.csv");
    CHECK(strip_compression_suffix("plain.csv") == "plain.csv");
    CHECK(record_set_stem("admissions.csv.gz") == "admissions");
    CHECK(record_set_stem("vol.nii.gz") == "vol");
    CHECK(record_set_stem("noext") == "noext");
    CHECK(has_suffix("DIR/FILE.PARQUET", ".parquet"));
    CHECK(!has_suffix("file.parquet.gz", ".parquet"));
}

TEST_CASE("id sanitization") {
    CHECK(sanitize_id("subject id-1") == "subject_id_1");
    CHECK(sanitize_id("plain_ok_42") == "plain_ok_42");
}

TEST_CASE("media types: outer compression wins") {
    CHECK(media_type_for("x.csv") == "text/csv");
    CHECK(media_type_for("x.tsv") == "text/tab-separated-values");
    CHECK(media_type_for("x.csv.gz") == "application/gzip");
    CHECK(media_type_for("x.parquet") == "application/x-parquet");
    CHECK(media_type_for("x.ndjson") == "application/x-ndjson");
    CHECK(media_type_for("x.json") == "application/json");
}

TEST_CASE("format_double renders shortest round trip") {
    CHECK(format_double(360.0) == "360");
    CHECK(format_double(2.5) == "2.5");
    CHECK(format_double(0.001) == "0.001");
}

TEST_CASE("logical_prefix undoes a gzip wrapper") {
    auto dir = testutil::scratch_dir("logical_prefix");
    testutil::write_file(dir / "plain.txt", "hello world");
    testutil::write_file(dir / "wrapped.txt.gz", testutil::gzip_bytes("wrapped payload"));
    CHECK(logical_prefix(dir / "plain.txt", 64) == "hello world");
    CHECK(logical_prefix(dir / "wrapped.txt.gz", 64) == "wrapped payload");
    CHECK(logical_prefix(dir / "wrapped.txt.gz", 7) == "wrapped");
}

TEST_CASE("datatype names and uris are a bijection") {
    for (DataType t : all_datatypes()) {
        auto name = datatype_name(t);
        auto parsed = parse_datatype(name);
        REQUIRE(parsed.has_value());
        CHECK(*parsed == t);
        auto from_uri = parse_datatype(datatype_uri(t));
        REQUIRE(from_uri.has_value());
        CHECK(*from_uri == t);
    }
    CHECK(parse_datatype("https://schema.org/Integer") == DataType::Integer);
    CHECK(parse_datatype("http://schema.org/Integer") == DataType::Integer);
    CHECK(parse_datatype("sc:Integer") == DataType::Integer);
    CHECK(parse_datatype("cr:Int64") == DataType::Int64);
    CHECK(!parse_datatype("sc:Banana").has_value());
    CHECK(!parse_datatype("").has_value());
}

TEST_CASE("classify_value covers the stated grammar") {
    CHECK(classify_value("") == ValueClass::Null);
    CHECK(classify_value("true") == ValueClass::Bool);
    CHECK(classify_value("FALSE") == ValueClass::Bool);
    CHECK(classify_value("10000032") == ValueClass::Int);
    CHECK(classify_value("-42") == ValueClass::Int);
    CHECK(classify_value("007") == ValueClass::Int);
    CHECK(classify_value("9223372036854775807") == ValueClass::Int);
    // one past the signed 64-bit maximum
    CHECK(classify_value("9223372036854775808") == ValueClass::Text);
    CHECK(classify_value("3.14") == ValueClass::Float);
    CHECK(classify_value("-1e6") == ValueClass::Float);
    CHECK(classify_value("2180-05-06") == ValueClass::Date);
    CHECK(classify_value("2180-05-06 22:23:00") == ValueClass::DateTime);
    CHECK(classify_value("2180-05-06T22:23:00.123+05:00") == ValueClass::DateTime);
    CHECK(classify_value("12:34:56") == ValueClass::Time);
    CHECK(classify_value("12:34:56.789") == ValueClass::Time);
    CHECK(classify_value("https://example.org/x") == ValueClass::Url);
    CHECK(classify_value("http://example.org") == ValueClass::Url);
    CHECK(classify_value("ftp://example.org") == ValueClass::Text);
    CHECK(classify_value("hello") == ValueClass::Text);
    CHECK(classify_value("2180-13-40") == ValueClass::Text);
    CHECK(classify_value("25:00:00") == ValueClass::Text);
}

namespace {

// Brute-force oracle: pairwise class combination per the stated table,
// written independently of the lattice implementation.
ValueClass combine(ValueClass a, ValueClass b) {
    if (a == ValueClass::Null) return b;
    if (b == ValueClass::Null) return a;
    if (a == b) return a;
    auto pair_is = [&](ValueClass x, ValueClass y) {
        return (a == x && b == y) || (a == y && b == x);
    };
    if (pair_is(ValueClass::Int, ValueClass::Float)) return ValueClass::Float;
    if (pair_is(ValueClass::Date, ValueClass::DateTime)) return ValueClass::DateTime;
    return ValueClass::Text;
}

DataType expected_type(ValueClass c) {
    switch (c) {
        case ValueClass::Bool: return DataType::Boolean;
        case ValueClass::Int: return DataType::Int64;
        case ValueClass::Float: return DataType::Float64;
        case ValueClass::Date: return DataType::Date;
        case ValueClass::DateTime: return DataType::DateTime;
        case ValueClass::Time: return DataType::Time;
        case ValueClass::Url: return DataType::Url;
        default: return DataType::Text;
    }
}

DataType oracle_resolve(const std::vector<ValueClass>& classes) {
    ValueClass acc = ValueClass::Null;
    for (ValueClass c : classes) acc = combine(acc, c);
    if (acc == ValueClass::Null) return DataType::Text;
    return expected_type(acc);
}

DataType impl_resolve(const std::vector<ValueClass>& classes) {
    TypeLatticeState state;
    for (ValueClass c : classes) state = join_types(state, c);
    return resolve_column(state);
}

const ValueClass kAllClasses[] = {ValueClass::Null, ValueClass::Bool,     ValueClass::Int,
                                  ValueClass::Float, ValueClass::Date,    ValueClass::DateTime,
                                  ValueClass::Time,  ValueClass::Url,     ValueClass::Text};

// In the widening order, a may only move up toward Text.
bool lattice_le(DataType a, DataType b) {
    if (a == b) return true;
    if (b == DataType::Text) return true;
    if (a == DataType::Int64 && b == DataType::Float64) return true;
    if (a == DataType::Date && b == DataType::DateTime) return true;
    return false;
}

}  // namespace

TEST_CASE("resolve_column matches the pairwise oracle on short sequences") {
    for (ValueClass a : kAllClasses) {
        std::vector<ValueClass> one{a};
        CHECK(impl_resolve(one) == oracle_resolve(one));
        for (ValueClass b : kAllClasses) {
            std::vector<ValueClass> two{a, b};
            CHECK(impl_resolve(two) == oracle_resolve(two));
            for (ValueClass c : kAllClasses) {
                std::vector<ValueClass> three{a, b, c};
                CHECK(impl_resolve(three) == oracle_resolve(three));
            }
        }
    }
}

TEST_CASE("lattice laws hold over random sequences") {
    std::mt19937 rng(20240613);
    std::uniform_int_distribution<int> pick(0, 8);
    auto random_class = [&] { return kAllClasses[pick(rng)]; };

    for (int i = 0; i < 12000; ++i) {
        ValueClass a = random_class();
        ValueClass b = random_class();
        ValueClass c = random_class();

        TypeLatticeState ab = join_types(join_types(TypeLatticeState{}, a), b);
        TypeLatticeState ba = join_types(join_types(TypeLatticeState{}, b), a);
        REQUIRE(resolve_column(ab) == resolve_column(ba));  // commutative

        TypeLatticeState ab_c = join_types(ab, c);
        TypeLatticeState bc = join_types(join_types(TypeLatticeState{}, b), c);
        TypeLatticeState a_bc = join_types(join_types(TypeLatticeState{}, a), c);
        a_bc = join_types(a_bc, b);
        REQUIRE(resolve_column(ab_c) == resolve_column(a_bc));  // associative

        TypeLatticeState aa = join_types(join_types(TypeLatticeState{}, a), a);
        TypeLatticeState a_once = join_types(TypeLatticeState{}, a);
        REQUIRE(resolve_column(aa) == resolve_column(a_once));  // idempotent
    }

    // Monotone under sample extension: once any non-null evidence exists, a
    // longer sample can only widen the resolution.
    std::uniform_int_distribution<int> len(1, 24);
    for (int i = 0; i < 12000; ++i) {
        int n = len(rng);
        std::vector<ValueClass> seq;
        TypeLatticeState state;
        DataType previous = DataType::Text;
        bool have_evidence = false;
        for (int k = 0; k < n; ++k) {
            ValueClass c = random_class();
            state = join_types(state, c);
            DataType now = resolve_column(state);
            bool evidence_now = state.non_null_count > 0;
            if (have_evidence) REQUIRE(lattice_le(previous, now));
            previous = now;
            have_evidence = evidence_now;
        }
    }
}

TEST_CASE("join_types counts samples and non-null evidence") {
    TypeLatticeState s;
    s = join_types(s, ValueClass::Null);
    s = join_types(s, ValueClass::Int);
    s = join_types(s, ValueClass::Int);
    CHECK(s.sampled_count == 3);
    CHECK(s.non_null_count == 2);
    CHECK(resolve_column(s) == DataType::Int64);
    CHECK(resolve_column(TypeLatticeState{}) == DataType::Text);
}

TEST_CASE("hash_file matches the reference implementation") {
    auto dir = testutil::scratch_dir("hashing");
    testutil::write_file(dir / "empty.bin", "");
    testutil::write_file(dir / "abc.txt", "abc");
    std::string blob;
    for (int i = 0; i < 100000; ++i) blob.push_back(char(i % 251));
    testutil::write_file(dir / "blob.bin", blob);

    auto empty = hash_file(dir / "empty.bin");
    CHECK(empty.sha256 == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(empty.byte_size == 0);
    auto abc = hash_file(dir / "abc.txt");
    CHECK(abc.sha256 == testutil::sha256_ref("abc"));
    CHECK(abc.sha256 == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    auto big = hash_file(dir / "blob.bin");
    CHECK(big.sha256 == testutil::sha256_ref(blob));
    CHECK(big.byte_size == blob.size());
    CHECK(hash_file(dir / "blob.bin").sha256 == big.sha256);
}

TEST_CASE("compressed files hash as stored bytes") {
    auto dir = testutil::scratch_dir("hash_compressed");
    std::string gz = testutil::gzip_bytes("col\n1\n2\n");
    testutil::write_file(dir / "t.csv.gz", gz);
    auto r = hash_file(dir / "t.csv.gz");
    CHECK(r.sha256 == testutil::sha256_ref(gz));
    CHECK(r.sha256 != testutil::sha256_ref("col\n1\n2\n"));
}

TEST_CASE("discover_files sorts, recurses, and includes hidden files") {
    auto dir = testutil::scratch_dir("discovery");
    testutil::write_file(dir / "b.txt", "b");
    testutil::write_file(dir / "a" / "b" / "c.csv", "x");
    testutil::write_file(dir / ".hidden", "h");
    testutil::write_file(dir / "a" / "z.txt", "z");
    WarningSink warnings;
    auto files = discover_files(dir, warnings);
    REQUIRE(files.size() == 4);
    std::vector<std::string> paths;
    for (const auto& f : files) paths.push_back(f.relative_path);
    std::vector<std::string> expected = {".hidden", "a/b/c.csv", "a/z.txt", "b.txt"};
    CHECK(paths == expected);
    CHECK(std::is_sorted(paths.begin(), paths.end()));
    for (const auto& f : files) {
        CHECK(f.sha256 == testutil::sha256_ref(testutil::read_file(dir / f.relative_path)));
    }
    CHECK(warnings.empty());

    WarningSink again;
    CHECK(discover_files(testutil::scratch_dir("discovery_empty"), again).empty());
    CHECK_THROWS_AS(discover_files(dir / "nope", again), std::runtime_error);
}

TEST_CASE("symlinks escaping the root are skipped with a warning") {
    auto dir = testutil::scratch_dir("discovery_links");
    auto outside = testutil::scratch_dir("discovery_outside");
    testutil::write_file(outside / "secret.txt", "s");
    testutil::write_file(dir / "inside.txt", "i");
    std::error_code ec;
    std::filesystem::create_symlink(outside / "secret.txt", dir / "leak.txt", ec);
    if (ec) return;  // filesystem without symlink support
    std::filesystem::create_symlink(dir / "inside.txt", dir / "alias.txt", ec);
    WarningSink warnings;
    auto files = discover_files(dir, warnings);
    std::vector<std::string> paths;
    for (const auto& f : files) paths.push_back(f.relative_path);
    CHECK(std::find(paths.begin(), paths.end(), "leak.txt") == paths.end());
    CHECK(std::find(paths.begin(), paths.end(), "inside.txt") != paths.end());
    CHECK(std::find(paths.begin(), paths.end(), "alias.txt") != paths.end());
    CHECK(!warnings.empty());
}

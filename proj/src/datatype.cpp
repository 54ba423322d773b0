#include "crbake/datatype.hpp"

#include <array>

namespace crbake {

namespace {

struct Entry {
    DataType type;
    std::string_view prefixed;
    std::string_view local;  // name under its namespace
    bool schema_org;
};

constexpr std::array<Entry, 20> kEntries = {{
    {DataType::Text, "sc:Text", "Text", true},
    {DataType::Boolean, "sc:Boolean", "Boolean", true},
    {DataType::Integer, "sc:Integer", "Integer", true},
    {DataType::Float, "sc:Float", "Float", true},
    {DataType::Date, "sc:Date", "Date", true},
    {DataType::DateTime, "sc:DateTime", "DateTime", true},
    {DataType::Time, "sc:Time", "Time", true},
    {DataType::Url, "sc:URL", "URL", true},
    {DataType::ImageObject, "sc:ImageObject", "ImageObject", true},
    {DataType::Int8, "cr:Int8", "Int8", false},
    {DataType::Int16, "cr:Int16", "Int16", false},
    {DataType::Int32, "cr:Int32", "Int32", false},
    {DataType::Int64, "cr:Int64", "Int64", false},
    {DataType::UInt8, "cr:UInt8", "UInt8", false},
    {DataType::UInt16, "cr:UInt16", "UInt16", false},
    {DataType::UInt32, "cr:UInt32", "UInt32", false},
    {DataType::UInt64, "cr:UInt64", "UInt64", false},
    {DataType::Float16, "cr:Float16", "Float16", false},
    {DataType::Float32, "cr:Float32", "Float32", false},
    {DataType::Float64, "cr:Float64", "Float64", false},
}};

constexpr std::array<DataType, 20> kAll = {
    DataType::Text,    DataType::Boolean, DataType::Integer, DataType::Float,
    DataType::Date,    DataType::DateTime, DataType::Time,   DataType::Url,
    DataType::ImageObject, DataType::Int8, DataType::Int16,  DataType::Int32,
    DataType::Int64,   DataType::UInt8,   DataType::UInt16,  DataType::UInt32,
    DataType::UInt64,  DataType::Float16, DataType::Float32, DataType::Float64,
};

const Entry& entry_for(DataType t) {
    for (const Entry& e : kEntries) {
        if (e.type == t) return e;
    }
    return kEntries[0];
}

}  // namespace

std::string_view datatype_name(DataType t) { return entry_for(t).prefixed; }

std::string datatype_uri(DataType t) {
    const Entry& e = entry_for(t);
    std::string uri(e.schema_org ? kSchemaOrgPrefix : kCroissantPrefix);
    uri += e.local;
    return uri;
}

std::optional<DataType> parse_datatype(std::string_view text) {
    std::string_view local;
    bool want_schema = false, want_cr = false;
    if (text.starts_with("sc:")) {
        local = text.substr(3);
        want_schema = true;
    } else if (text.starts_with("cr:")) {
        local = text.substr(3);
        want_cr = true;
    } else if (text.starts_with(kSchemaOrgPrefix)) {
        local = text.substr(kSchemaOrgPrefix.size());
        want_schema = true;
    } else if (text.starts_with("http://schema.org/")) {
        local = text.substr(std::string_view("http://schema.org/").size());
        want_schema = true;
    } else if (text.starts_with(kCroissantPrefix)) {
        local = text.substr(kCroissantPrefix.size());
        want_cr = true;
    } else {
        return std::nullopt;
    }
    for (const Entry& e : kEntries) {
        if (e.local != local) continue;
        if ((want_schema && e.schema_org) || (want_cr && !e.schema_org)) return e.type;
    }
    return std::nullopt;
}

std::span<const DataType> all_datatypes() { return kAll; }

}  // namespace crbake

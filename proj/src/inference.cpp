#include "crbake/inference.hpp"

#include <charconv>
#include <cstdint>

namespace crbake {

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }

bool all_digits(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s) {
        if (!is_digit(c)) return false;
    }
    return true;
}

bool iequals(std::string_view a, std::string_view b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        char x = a[i], y = b[i];
        if (x >= 'A' && x <= 'Z') x = static_cast<char>(x - 'A' + 'a');
        if (y >= 'A' && y <= 'Z') y = static_cast<char>(y - 'A' + 'a');
        if (x != y) return false;
    }
    return true;
}

// Signed decimal integer within int64 range. Values past the range are not
// integers for our purposes (precision would be lost downstream).
bool is_int64(std::string_view s) {
    if (s.empty()) return false;
    std::string_view digits = s;
    bool negative = false;
    if (digits.front() == '+' || digits.front() == '-') {
        negative = digits.front() == '-';
        digits.remove_prefix(1);
    }
    if (!all_digits(digits)) return false;
    // Strip leading zeros before the range check so "007" stays an integer.
    std::size_t nz = digits.find_first_not_of('0');
    if (nz == std::string_view::npos) return true;
    digits.remove_prefix(nz);
    if (digits.size() > 19) return false;
    std::uint64_t value = 0;
    for (char c : digits) value = value * 10 + static_cast<std::uint64_t>(c - '0');
    constexpr std::uint64_t kMax = 9223372036854775807ULL;
    return negative ? value <= kMax + 1 : value <= kMax;
}

// Decimal or scientific literal. Requires a '.' or an exponent so plain
// integer strings stay integers.
bool is_float(std::string_view s) {
    if (s.empty()) return false;
    std::size_t i = 0;
    if (s[i] == '+' || s[i] == '-') ++i;
    std::size_t mantissa_digits = 0;
    bool dot = false;
    while (i < s.size() && (is_digit(s[i]) || s[i] == '.')) {
        if (s[i] == '.') {
            if (dot) return false;
            dot = true;
        } else {
            ++mantissa_digits;
        }
        ++i;
    }
    if (mantissa_digits == 0) return false;
    bool exponent = false;
    if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
        exponent = true;
        ++i;
        if (i < s.size() && (s[i] == '+' || s[i] == '-')) ++i;
        std::size_t exp_digits = 0;
        while (i < s.size() && is_digit(s[i])) {
            ++exp_digits;
            ++i;
        }
        if (exp_digits == 0) return false;
    }
    if (i != s.size()) return false;
    return dot || exponent;
}

bool in_range(std::string_view two_digits, int lo, int hi) {
    int v = (two_digits[0] - '0') * 10 + (two_digits[1] - '0');
    return v >= lo && v <= hi;
}

// YYYY-MM-DD
bool is_date(std::string_view s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
    if (!all_digits(s.substr(0, 4)) || !all_digits(s.substr(5, 2)) ||
        !all_digits(s.substr(8, 2)))
        return false;
    return in_range(s.substr(5, 2), 1, 12) && in_range(s.substr(8, 2), 1, 31);
}

// HH:MM[:SS[.frac]] — `require_seconds` distinguishes the bare TIME grammar
// from the time part of a DATETIME.
bool is_time_part(std::string_view s, bool require_seconds) {
    if (s.size() < 5 || s[2] != ':') return false;
    if (!all_digits(s.substr(0, 2)) || !all_digits(s.substr(3, 2))) return false;
    if (!in_range(s.substr(0, 2), 0, 23) || !in_range(s.substr(3, 2), 0, 59)) return false;
    if (s.size() == 5) return !require_seconds;
    if (s.size() < 8 || s[5] != ':') return false;
    if (!all_digits(s.substr(6, 2)) || !in_range(s.substr(6, 2), 0, 60)) return false;
    if (s.size() == 8) return true;
    if (s[8] != '.') return false;
    return all_digits(s.substr(9));
}

// Trailing zone designator: Z, ±HH, ±HHMM, ±HH:MM. Returns the length
// consumed from the end, or 0 when no zone is present.
std::size_t zone_suffix_len(std::string_view s) {
    if (s.empty()) return 0;
    if (s.back() == 'Z') return 1;
    for (std::size_t len : {6, 5, 3}) {
        if (s.size() <= len) continue;
        std::string_view z = s.substr(s.size() - len);
        if (z[0] != '+' && z[0] != '-') continue;
        std::string_view rest = z.substr(1);
        if (len == 6) {
            if (rest[2] == ':' && all_digits(rest.substr(0, 2)) && all_digits(rest.substr(3, 2)))
                return len;
        } else if (all_digits(rest)) {
            return len;
        }
    }
    return 0;
}

bool is_datetime(std::string_view s) {
    if (s.size() < 16) return false;
    if (!is_date(s.substr(0, 10))) return false;
    if (s[10] != ' ' && s[10] != 'T') return false;
    std::string_view time = s.substr(11);
    std::size_t zone = zone_suffix_len(time);
    time.remove_suffix(zone);
    return is_time_part(time, /*require_seconds=*/false);
}

bool is_url(std::string_view s) {
    std::string_view rest;
    if (s.starts_with("http://"))
        rest = s.substr(7);
    else if (s.starts_with("https://"))
        rest = s.substr(8);
    else
        return false;
    if (rest.empty()) return false;
    for (char c : rest) {
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r') return false;
    }
    return true;
}

}  // namespace

ValueClass classify_value(std::string_view raw) {
    if (raw.empty()) return ValueClass::Null;
    if (iequals(raw, "true") || iequals(raw, "false")) return ValueClass::Bool;
    if (is_int64(raw)) return ValueClass::Int;
    if (is_float(raw)) return ValueClass::Float;
    if (is_date(raw)) return ValueClass::Date;
    if (is_datetime(raw)) return ValueClass::DateTime;
    if (is_time_part(raw, /*require_seconds=*/true)) return ValueClass::Time;
    if (is_url(raw)) return ValueClass::Url;
    return ValueClass::Text;
}

TypeLatticeState join_types(TypeLatticeState state, ValueClass cls) {
    state.seen |= static_cast<std::uint16_t>(cls);
    state.sampled_count += 1;
    if (cls != ValueClass::Null) state.non_null_count += 1;
    return state;
}

DataType resolve_column(const TypeLatticeState& state) {
    constexpr std::uint16_t kNull = static_cast<std::uint16_t>(ValueClass::Null);
    const std::uint16_t classes = state.seen & static_cast<std::uint16_t>(~kNull);
    if (classes == 0) return DataType::Text;

    constexpr auto bit = [](ValueClass c) { return static_cast<std::uint16_t>(c); };
    constexpr std::uint16_t kNumeric = bit(ValueClass::Int) | bit(ValueClass::Float);
    constexpr std::uint16_t kTemporal = bit(ValueClass::Date) | bit(ValueClass::DateTime);

    if ((classes & ~kNumeric) == 0)
        return (classes & bit(ValueClass::Float)) ? DataType::Float64 : DataType::Int64;
    if ((classes & ~kTemporal) == 0)
        return (classes & bit(ValueClass::DateTime)) ? DataType::DateTime : DataType::Date;
    if (classes == bit(ValueClass::Bool)) return DataType::Boolean;
    if (classes == bit(ValueClass::Time)) return DataType::Time;
    if (classes == bit(ValueClass::Url)) return DataType::Url;
    return DataType::Text;
}

}  // namespace crbake

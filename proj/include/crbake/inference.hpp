#pragma once

#include <cstdint>
#include <string_view>

#include "crbake/datatype.hpp"

namespace crbake {

/// Shape classes a single textual value can take. Classification is a pure
/// function of the string.
enum class ValueClass : std::uint16_t {
    Null = 1 << 0,
    Bool = 1 << 1,
    Int = 1 << 2,
    Float = 1 << 3,
    Date = 1 << 4,
    DateTime = 1 << 5,
    Time = 1 << 6,
    Url = 1 << 7,
    Text = 1 << 8,
};

/// Accumulated evidence about one column. Evidence only ever widens the
/// resolved type (join is monotone); order of observation does not matter.
struct TypeLatticeState {
    std::uint16_t seen = 0;
    std::uint64_t non_null_count = 0;
    std::uint64_t sampled_count = 0;

    bool has(ValueClass c) const { return seen & static_cast<std::uint16_t>(c); }
};

ValueClass classify_value(std::string_view raw);

/// Folds one more observation into the state.
TypeLatticeState join_types(TypeLatticeState state, ValueClass cls);

/// Final Croissant type for a column. All-null columns resolve sc:Text.
DataType resolve_column(const TypeLatticeState& state);

}  // namespace crbake

#pragma once

#include <string>
#include <string_view>

#include "rsg/graphic.hpp"

namespace rsg {

inline constexpr int kGraphicFormatVersion = 1;

/// Graphic interchange JSON. Numbers are written with 17 significant digits, so
/// deserialize(serialize(g)) reproduces every coordinate bit for bit.
std::string serialize(const Graphic& g);

/// Throws SchemaError carrying the JSON pointer of the first offending value.
Graphic deserialize(std::string_view text);

/// "%.17g" rendering used by every JSON writer in the project.
std::string format_double(double v);

}  // namespace rsg

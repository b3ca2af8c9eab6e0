#pragma once

#include <string>

namespace effdyn {

/// Shortest decimal string that parses back to the same double ('.' decimal
/// separator regardless of locale).
std::string format_double(double v);

}  // namespace effdyn

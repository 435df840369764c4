#pragma once

#include <string>

namespace shotlab {

// Shortest decimal string that round-trips to the same double (at most 17
// significant digits). Used for every numeric field in emitted CSV files.
std::string format_double(double x);

} // namespace shotlab

#pragma once

#include <string>

namespace robustfair {

/// Shortest decimal form that round-trips to the same double; locale-free.
std::string format_double(double v);

/// Fixed number of significant digits (general format), locale-free.
std::string format_significant(double v, int digits);

}  // namespace robustfair

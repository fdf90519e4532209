#include "robustfair/format.hpp"

#include <charconv>

namespace robustfair {

std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

std::string format_significant(double v, int digits) {
  char buf[64];
  const auto r =
      std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, digits);
  return std::string(buf, r.ptr);
}

}  // namespace robustfair

#include "shotlab/io.hpp"

#include <charconv>
#include <system_error>

namespace shotlab {

std::string format_double(double x) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

} // namespace shotlab

#pragma once

namespace shotlab {

inline constexpr const char* kVersion = "0.1.0";

} // namespace shotlab

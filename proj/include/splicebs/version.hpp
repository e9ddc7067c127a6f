#pragma once

namespace splicebs {

inline constexpr const char* version = "1.0.0";

}  // namespace splicebs

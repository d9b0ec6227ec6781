#pragma once

namespace fcix {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace fcix

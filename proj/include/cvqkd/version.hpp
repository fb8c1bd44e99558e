#pragma once

namespace cvqkd {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace cvqkd

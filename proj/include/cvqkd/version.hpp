#pragma once

namespace cvqkd {

/// Library version, embedded in CLI output headers so downstream
/// figure scripts can pin the producing build.
inline constexpr const char* version = "0.1.0";

}  // namespace cvqkd

#pragma once

namespace crowdsel {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kCsvSchema = "v1";

} // namespace crowdsel

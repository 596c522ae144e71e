#pragma once

namespace combraman {

inline constexpr const char* k_version = "0.1.0";
inline constexpr int k_schema_version = 1;

}  // namespace combraman

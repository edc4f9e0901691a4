#pragma once

namespace sarsim {

inline constexpr const char* kEngineName = "sarsim";
inline constexpr const char* kEngineVersion = "0.1.0";

}  // namespace sarsim

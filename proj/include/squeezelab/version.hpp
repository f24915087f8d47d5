#pragma once

namespace squeezelab {

inline constexpr const char* kEngineName = "squeezelab";
inline constexpr const char* kEngineVersion = "1.0.0";

}  // namespace squeezelab

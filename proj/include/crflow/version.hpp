#pragma once

namespace crflow {

inline constexpr const char* kToolName = "crflow";
inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace crflow

#pragma once

namespace lorenzlab {

inline constexpr const char* kVersion = "0.1.0";

// Bumped whenever the layout of an emitted JSON report changes.
inline constexpr int kSchemaVersion = 1;

}  // namespace lorenzlab

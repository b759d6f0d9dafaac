#pragma once

namespace cirisk {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace cirisk

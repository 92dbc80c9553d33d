#pragma once

namespace isilab {

inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace isilab

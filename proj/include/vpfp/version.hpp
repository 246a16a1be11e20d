#pragma once

namespace vpfp {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace vpfp

#pragma once

namespace dthp {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace dthp

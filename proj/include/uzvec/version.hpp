#pragma once

namespace uzvec {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace uzvec

#pragma once

namespace daec {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace daec

#pragma once

namespace un {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace un

#pragma once

#include <string>
#include <string_view>

namespace mtct {

inline constexpr std::string_view kVersion = "0.1.0";

inline std::string tool_version() { return "mtct " + std::string(kVersion); }

} // namespace mtct

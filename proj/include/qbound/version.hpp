#pragma once

#include <string_view>

namespace qbound {

inline constexpr std::string_view kVersion = "1.0.0";

}  // namespace qbound

#pragma once

namespace hsprobe {

inline constexpr const char* kVersionString = "0.1.0";

}  // namespace hsprobe

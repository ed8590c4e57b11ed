#pragma once

namespace pnoise {

inline constexpr const char* version = "0.1.0";

}  // namespace pnoise
